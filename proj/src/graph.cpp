#include "mplex/graph.hpp"

#include "mplex/error.hpp"

#include <cmath>
#include <string>

namespace mplex {

namespace {

std::string pair_name(std::size_t k, std::size_t t) {
    return "(k=" + std::to_string(k + 1) + ", t=" + std::to_string(t + 1) + ")";
}

}  // namespace

Eigen::Index Block::size() const noexcept {
    if (const auto* d = dense_ptr()) return d->rows();
    return sparse_ptr()->rows();
}

double Block::at(Eigen::Index i, Eigen::Index j) const {
    if (const auto* d = dense_ptr()) return (*d)(i, j);
    return sparse_ptr()->coeff(i, j);
}

Matrix Block::dense() const {
    if (const auto* d = dense_ptr()) return *d;
    return Matrix(*sparse_ptr());
}

std::size_t Block::nonzeros() const {
    if (const auto* d = dense_ptr()) return static_cast<std::size_t>((d->array() != 0.0).count());
    const auto& s = *sparse_ptr();
    std::size_t count = 0;
    for (Eigen::Index c = 0; c < s.outerSize(); ++c)
        for (SparseBlock::InnerIterator it(s, c); it; ++it)
            if (it.value() != 0.0) ++count;
    return count;
}

MultiplexGraph::MultiplexGraph(Geometry geometry, std::vector<Block> blocks, bool directed,
                               EntryKind kind)
    : geometry_(geometry), blocks_(std::move(blocks)), directed_(directed), kind_(kind) {
    validate();
}

MultiplexGraph MultiplexGraph::from_map(
    Geometry geometry, const std::map<std::pair<std::size_t, std::size_t>, Matrix>& blocks,
    bool directed, EntryKind kind) {
    std::vector<Block> ordered;
    ordered.reserve(geometry.layers * geometry.times);
    for (std::size_t k = 0; k < geometry.layers; ++k) {
        for (std::size_t t = 0; t < geometry.times; ++t) {
            auto it = blocks.find({k, t});
            if (it == blocks.end()) throw StructuralError("missing block " + pair_name(k, t));
            ordered.emplace_back(it->second);
        }
    }
    if (blocks.size() != ordered.size())
        throw StructuralError("block map holds pairs outside the declared geometry");
    return MultiplexGraph(geometry, std::move(ordered), directed, kind);
}

void MultiplexGraph::validate() const {
    const auto& g = geometry_;
    if (g.n == 0 || g.layers == 0 || g.times == 0)
        throw StructuralError("graph geometry must have n, K, T >= 1");
    if (blocks_.size() != g.layers * g.times)
        throw StructuralError("expected " + std::to_string(g.layers * g.times) + " blocks, got " +
                              std::to_string(blocks_.size()));
    const auto n = static_cast<Eigen::Index>(g.n);
    for (std::size_t k = 0; k < g.layers; ++k) {
        for (std::size_t t = 0; t < g.times; ++t) {
            const Block& b = blocks_[k * g.times + t];
            if (const auto* d = b.dense_ptr()) {
                if (d->rows() != n || d->cols() != n)
                    throw StructuralError("block " + pair_name(k, t) + " is not n x n");
            } else if (b.sparse_ptr()->rows() != n || b.sparse_ptr()->cols() != n) {
                throw StructuralError("block " + pair_name(k, t) + " is not n x n");
            }
            Matrix materialized;
            const Matrix& m = b.dense_ptr() ? *b.dense_ptr() : (materialized = b.dense());
            for (Eigen::Index j = 0; j < n; ++j) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double v = m(i, j);
                    if (!std::isfinite(v))
                        throw DomainError("non-finite entry in block " + pair_name(k, t));
                    if (kind_ == EntryKind::binary ? (v != 0.0 && v != 1.0) : (v < 0.0 || v > 1.0))
                        throw DomainError("entry " + std::to_string(v) + " out of range in block " +
                                          pair_name(k, t) + " at (" + std::to_string(i + 1) + ", " +
                                          std::to_string(j + 1) + ")");
                }
            }
            if (!directed_ && m != m.transpose())
                throw DomainError("undirected graph has asymmetric block " + pair_name(k, t));
        }
    }
}

const Block& MultiplexGraph::block(std::size_t k, std::size_t t) const {
    if (k >= geometry_.layers || t >= geometry_.times)
        throw StructuralError("block index " + pair_name(k, t) + " out of range");
    return blocks_[k * geometry_.times + t];
}

MultiplexGraph MultiplexGraph::compacted(double density) const {
    std::vector<Block> out;
    out.reserve(blocks_.size());
    const double cells = static_cast<double>(geometry_.n) * static_cast<double>(geometry_.n);
    for (const Block& b : blocks_) {
        if (static_cast<double>(b.nonzeros()) < density * cells)
            out.emplace_back(SparseBlock(b.dense().sparseView()));
        else
            out.emplace_back(b.dense());
    }
    MultiplexGraph g;
    g.geometry_ = geometry_;
    g.blocks_ = std::move(out);
    g.directed_ = directed_;
    g.kind_ = kind_;
    return g;
}

MultiplexGraph MultiplexGraph::densified() const { return compacted(0.0); }

MultiplexGraph MultiplexGraph::select_layers(const std::vector<std::size_t>& layers) const {
    if (layers.empty()) throw ValidationError("layer selection is empty");
    std::vector<Block> out;
    for (std::size_t k : layers) {
        if (k >= geometry_.layers)
            throw ValidationError("layer " + std::to_string(k + 1) + " out of range");
        for (std::size_t t = 0; t < geometry_.times; ++t) out.push_back(blocks_[k * geometry_.times + t]);
    }
    MultiplexGraph g;
    g.geometry_ = {geometry_.n, layers.size(), geometry_.times};
    g.blocks_ = std::move(out);
    g.directed_ = directed_;
    g.kind_ = kind_;
    return g;
}

bool MultiplexGraph::same_values(const MultiplexGraph& other) const {
    if (!(geometry_ == other.geometry_) || directed_ != other.directed_ || kind_ != other.kind_)
        return false;
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        if (blocks_[i].dense() != other.blocks_[i].dense()) return false;
    return true;
}

UnfoldedMatrix unfold(const MultiplexGraph& graph) {
    const Geometry& g = graph.geometry();
    const auto n = static_cast<Eigen::Index>(g.n);
    Matrix data = Matrix::Zero(static_cast<Eigen::Index>(g.rows()), static_cast<Eigen::Index>(g.cols()));
    for (std::size_t k = 0; k < g.layers; ++k) {
        for (std::size_t t = 0; t < g.times; ++t) {
            const Block& b = graph.block(k, t);
            auto target = data.block(static_cast<Eigen::Index>(k) * n, static_cast<Eigen::Index>(t) * n, n, n);
            if (const auto* d = b.dense_ptr()) {
                target = *d;
            } else {
                const auto& s = *b.sparse_ptr();
                for (Eigen::Index c = 0; c < s.outerSize(); ++c)
                    for (SparseBlock::InnerIterator it(s, c); it; ++it) target(it.row(), it.col()) = it.value();
            }
        }
    }
    return {std::move(data), g};
}

MultiplexGraph refold(const UnfoldedMatrix& matrix, bool directed) {
    const bool binary = ((matrix.data.array() == 0.0) || (matrix.data.array() == 1.0)).all();
    return refold(matrix, directed, binary ? EntryKind::binary : EntryKind::averaged);
}

MultiplexGraph refold(const UnfoldedMatrix& matrix, bool directed, EntryKind kind) {
    const Geometry& g = matrix.geometry;
    if (matrix.data.rows() != static_cast<Eigen::Index>(g.rows()) ||
        matrix.data.cols() != static_cast<Eigen::Index>(g.cols()))
        throw StructuralError("unfolded matrix is " + std::to_string(matrix.data.rows()) + " x " +
                              std::to_string(matrix.data.cols()) + " but geometry requires " +
                              std::to_string(g.rows()) + " x " + std::to_string(g.cols()));
    const auto n = static_cast<Eigen::Index>(g.n);
    std::vector<Block> blocks;
    blocks.reserve(g.layers * g.times);
    for (std::size_t k = 0; k < g.layers; ++k)
        for (std::size_t t = 0; t < g.times; ++t)
            blocks.emplace_back(Matrix(
                matrix.data.block(static_cast<Eigen::Index>(k) * n, static_cast<Eigen::Index>(t) * n, n, n)));
    return MultiplexGraph(g, std::move(blocks), directed, kind);
}

MultiplexGraph average_replicates(const std::vector<MultiplexGraph>& graphs) {
    if (graphs.empty()) throw ValidationError("cannot average an empty list of graphs");
    const MultiplexGraph& first = graphs.front();
    for (const auto& g : graphs) {
        if (!(g.geometry() == first.geometry()))
            throw StructuralError("replicates have mismatched geometry");
        if (g.directed() != first.directed())
            throw StructuralError("replicates disagree on directedness");
    }
    const Geometry& geo = first.geometry();
    std::vector<Block> blocks;
    blocks.reserve(geo.layers * geo.times);
    const double scale = 1.0 / static_cast<double>(graphs.size());
    for (std::size_t k = 0; k < geo.layers; ++k) {
        for (std::size_t t = 0; t < geo.times; ++t) {
            Matrix sum = first.block(k, t).dense();
            for (std::size_t r = 1; r < graphs.size(); ++r) sum += graphs[r].block(k, t).dense();
            blocks.emplace_back(Matrix(sum * scale));
        }
    }
    return MultiplexGraph(geo, std::move(blocks), first.directed(), EntryKind::averaged);
}

MultiplexGraph stack_layers(const std::vector<MultiplexGraph>& graphs) {
    if (graphs.empty()) throw ValidationError("cannot stack an empty list of graphs");
    const MultiplexGraph& first = graphs.front();
    std::vector<Block> blocks;
    std::size_t layers = 0;
    bool binary = true;
    for (const auto& g : graphs) {
        if (g.n() != first.n() || g.times() != first.times())
            throw StructuralError("graphs to stack differ in node count or time count");
        if (g.directed() != first.directed())
            throw StructuralError("graphs to stack disagree on directedness");
        binary = binary && g.kind() == EntryKind::binary;
        for (std::size_t k = 0; k < g.layers(); ++k)
            for (std::size_t t = 0; t < g.times(); ++t) blocks.push_back(g.block(k, t));
        layers += g.layers();
    }
    return MultiplexGraph({first.n(), layers, first.times()}, std::move(blocks), first.directed(),
                          binary ? EntryKind::binary : EntryKind::averaged);
}

}  // namespace mplex
