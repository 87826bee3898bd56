#ifndef MPLEX_GRAPH_HPP
#define MPLEX_GRAPH_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <map>
#include <utility>
#include <variant>
#include <vector>

namespace mplex {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseBlock = Eigen::SparseMatrix<double>;

// What the block entries represent.
enum class EntryKind {
    binary,    // observed adjacency, entries in {0, 1}
    averaged,  // mean of replicates (or probabilities), entries in [0, 1]
};

// n, K and T of a dynamic multiplex graph.
struct Geometry {
    std::size_t n = 0;
    std::size_t layers = 0;  // K
    std::size_t times = 0;   // T

    std::size_t rows() const noexcept { return n * layers; }
    std::size_t cols() const noexcept { return n * times; }
    friend bool operator==(const Geometry&, const Geometry&) = default;
};

// One adjacency block A^{k,t}, stored densely or in compressed form.
// Both representations expose the same values.
class Block {
public:
    Block() = default;
    explicit Block(Matrix dense) : storage_(std::move(dense)) {}
    explicit Block(SparseBlock sparse) : storage_(std::move(sparse)) {}

    bool is_sparse() const noexcept { return std::holds_alternative<SparseBlock>(storage_); }
    Eigen::Index size() const noexcept;
    double at(Eigen::Index i, Eigen::Index j) const;
    Matrix dense() const;
    const Matrix* dense_ptr() const noexcept { return std::get_if<Matrix>(&storage_); }
    const SparseBlock* sparse_ptr() const noexcept { return std::get_if<SparseBlock>(&storage_); }
    std::size_t nonzeros() const;

private:
    std::variant<Matrix, SparseBlock> storage_;
};

// A graph on n shared nodes observed over K layers and T times. Immutable
// after construction; blocks are indexed from zero.
class MultiplexGraph {
public:
    MultiplexGraph() = default;

    // Blocks are given in layer-major order: index k*T + t. Validates every
    // invariant (shapes, entry range, symmetry when undirected).
    MultiplexGraph(Geometry geometry, std::vector<Block> blocks, bool directed = true,
                   EntryKind kind = EntryKind::binary);

    // Builds from an explicit (k, t) -> block map; a missing pair is a
    // StructuralError naming it (1-based in the message).
    static MultiplexGraph from_map(Geometry geometry,
                                   const std::map<std::pair<std::size_t, std::size_t>, Matrix>& blocks,
                                   bool directed = true, EntryKind kind = EntryKind::binary);

    const Geometry& geometry() const noexcept { return geometry_; }
    std::size_t n() const noexcept { return geometry_.n; }
    std::size_t layers() const noexcept { return geometry_.layers; }
    std::size_t times() const noexcept { return geometry_.times; }
    bool directed() const noexcept { return directed_; }
    EntryKind kind() const noexcept { return kind_; }

    const Block& block(std::size_t k, std::size_t t) const;
    double at(std::size_t k, std::size_t t, std::size_t i, std::size_t j) const {
        return block(k, t).at(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    // Copy with blocks below `density` stored sparse and the rest dense.
    MultiplexGraph compacted(double density = 0.1) const;
    // Copy with every block dense.
    MultiplexGraph densified() const;
    // Keeps only the listed layers, in the given order.
    MultiplexGraph select_layers(const std::vector<std::size_t>& layers) const;

    // Entrywise equality of geometry, flags and values (storage ignored).
    bool same_values(const MultiplexGraph& other) const;

private:
    void validate() const;

    Geometry geometry_;
    std::vector<Block> blocks_;
    bool directed_ = true;
    EntryKind kind_ = EntryKind::binary;
};

// The nK x nT doubly unfolded matrix: block (k, t) occupies rows
// [k n, (k+1) n) and columns [t n, (t+1) n).
struct UnfoldedMatrix {
    Matrix data;
    Geometry geometry;
};

UnfoldedMatrix unfold(const MultiplexGraph& graph);

// Inverse of `unfold`. The result is marked binary when every entry is 0 or 1
// unless `kind` forces otherwise.
MultiplexGraph refold(const UnfoldedMatrix& matrix, bool directed = true);
MultiplexGraph refold(const UnfoldedMatrix& matrix, bool directed, EntryKind kind);

// Blockwise arithmetic mean; the result is marked averaged.
MultiplexGraph average_replicates(const std::vector<MultiplexGraph>& graphs);

// Stacks single-layer graphs (or more generally, all layers of each input in
// turn) into one graph whose layers are the inputs.
MultiplexGraph stack_layers(const std::vector<MultiplexGraph>& graphs);

}  // namespace mplex

#endif  // MPLEX_GRAPH_HPP
