#include "mplex/samplers.hpp"

#include "mplex/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace mplex {

namespace {

using Index = Eigen::Index;

void check_labels(const std::vector<std::vector<int>>& labels, std::size_t rows, std::size_t n,
                  std::size_t groups, const char* what) {
    if (labels.size() != rows)
        throw StructuralError(std::string(what) + " labels: expected " + std::to_string(rows) + " rows");
    for (std::size_t r = 0; r < rows; ++r) {
        if (labels[r].size() != n)
            throw StructuralError(std::string(what) + " labels: row " + std::to_string(r + 1) +
                                  " does not cover all " + std::to_string(n) + " nodes");
        for (std::size_t i = 0; i < n; ++i)
            if (labels[r][i] < 0 || static_cast<std::size_t>(labels[r][i]) >= groups)
                throw DomainError(std::string(what) + " label " + std::to_string(labels[r][i]) +
                                  " of node " + std::to_string(i + 1) + " out of range [0, " +
                                  std::to_string(groups) + ")");
    }
}

MultiplexGraph to_graph(const CsrMatrix& csr, const Geometry& geometry) {
    return refold(UnfoldedMatrix{csr.to_dense(), geometry}, true, EntryKind::binary);
}

}  // namespace

Matrix LatentPair::probabilities(std::size_t k, std::size_t t) const {
    return layer(k) * time(t).transpose();
}

void LatentPair::validate(double slack) const {
    if (X.cols() != Y.cols()) throw StructuralError("latent matrices differ in dimension");
    if (X.rows() != static_cast<Index>(geometry.rows()) || Y.rows() != static_cast<Index>(geometry.cols()))
        throw StructuralError("latent matrices do not match the declared geometry");
    if (!X.allFinite() || !Y.allFinite()) throw DomainError("latent positions must be finite");
    for (std::size_t k = 0; k < geometry.layers; ++k) {
        for (std::size_t t = 0; t < geometry.times; ++t) {
            const Matrix p = probabilities(k, t);
            const double lo = p.minCoeff();
            const double hi = p.maxCoeff();
            if (lo < -slack || hi > 1.0 + slack)
                throw DomainError("latent inner products leave [0, 1] in block (k=" + std::to_string(k + 1) +
                                  ", t=" + std::to_string(t + 1) + "): range [" + std::to_string(lo) +
                                  ", " + std::to_string(hi) + "]");
        }
    }
}

Matrix BlockModelSpec::probabilities(std::size_t k, std::size_t t) const {
    const std::size_t count = n();
    const Matrix& bm = b(k, t);
    Matrix p(static_cast<Index>(count), static_cast<Index>(count));
    for (std::size_t j = 0; j < count; ++j)
        for (std::size_t i = 0; i < count; ++i)
            p(static_cast<Index>(i), static_cast<Index>(j)) = bm(z[k][i], upsilon[t][j]);
    return p;
}

void BlockModelSpec::validate() const {
    if (groups_left == 0 || groups_right == 0 || layers == 0 || times == 0)
        throw StructuralError("block model needs G1, G2, K, T >= 1");
    if (B.size() != layers * times)
        throw StructuralError("block model needs one B matrix per (k, t)");
    for (std::size_t idx = 0; idx < B.size(); ++idx) {
        const Matrix& m = B[idx];
        if (m.rows() != static_cast<Index>(groups_left) || m.cols() != static_cast<Index>(groups_right))
            throw StructuralError("B matrix " + std::to_string(idx) + " is not G1 x G2");
        if (!m.allFinite() || m.minCoeff() < 0.0 || m.maxCoeff() > 1.0)
            throw DomainError("B matrix for (k=" + std::to_string(idx / times + 1) + ", t=" +
                              std::to_string(idx % times + 1) + ") has entries outside [0, 1]");
    }
    const std::size_t count = n();
    if (count == 0) throw StructuralError("block model has no nodes");
    check_labels(z, layers, count, groups_left, "layer-community");
    check_labels(upsilon, times, count, groups_right, "time-community");
}

BlockModelSpec BlockModelSpec::with_static_labels(const std::vector<int>& layer_labels,
                                                  const std::vector<int>& time_labels) const {
    BlockModelSpec out = *this;
    out.z.assign(layers, layer_labels);
    out.upsilon.assign(times, time_labels);
    return out;
}

CsrMatrix sample_unfolded(const ProbabilitySource& probabilities, const Geometry& geometry,
                          const SeedSpec& seed, int replicates, bool hollow) {
    if (replicates < 1) throw ValidationError("replicate count must be >= 1");
    const std::size_t n = geometry.n;
    const std::size_t times = geometry.times;
    const double scale = 1.0 / static_cast<double>(replicates);

    CsrMatrix out;
    out.rows = static_cast<Index>(geometry.rows());
    out.cols = static_cast<Index>(geometry.cols());
    out.row_start.reserve(geometry.rows() + 1);

    // Thresholds are laid out row-major and carried over between layers by
    // block address, since bootstrap sources hand back the same matrix for
    // every layer.
    using Thresholds = std::pair<const Matrix*, std::vector<std::uint64_t>>;
    std::vector<Thresholds> previous, current;
    auto thresholds = [&](const Matrix* p) -> const std::uint64_t* {
        for (auto& entry : current)
            if (entry.first == p) return entry.second.data();
        for (auto& entry : previous)
            if (entry.first == p) {
                current.push_back(std::move(entry));
                entry.first = nullptr;
                return current.back().second.data();
            }
        std::vector<std::uint64_t> values(n * n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                values[i * n + j] = bernoulli_threshold((*p)(static_cast<Index>(i), static_cast<Index>(j)));
        current.emplace_back(p, std::move(values));
        return current.back().second.data();
    };

    std::vector<const std::uint64_t*> blocks(times);
    std::size_t used = 0;
    std::vector<CounterStream> streams;
    for (std::size_t k = 0; k < geometry.layers; ++k) {
        previous = std::move(current);
        current.clear();
        current.reserve(times);
        streams.clear();
        for (std::size_t t = 0; t < times; ++t) {
            const Matrix* p = &probabilities(k, t);
            if (p->rows() != static_cast<Index>(n) || p->cols() != static_cast<Index>(n))
                throw StructuralError("probability block is not n x n");
            blocks[t] = thresholds(p);
            streams.push_back(seed.stream(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(t)));
        }
        // Rows of block (k, t) are read in order, so each stream is consumed
        // sequentially: row i starts at word i * n * replicates.
        for (std::size_t i = 0; i < n; ++i) {
            if (out.col_index.size() < used + times * n)
                out.col_index.resize(std::max(2 * out.col_index.size(), used + times * n));
            if (replicates > 1 && out.values.size() < out.col_index.size()) out.values.resize(out.col_index.size());
            for (std::size_t t = 0; t < times; ++t) {
                const std::uint64_t* row = blocks[t] + i * n;
                CounterStream& s = streams[t];
                const auto offset = static_cast<std::uint32_t>(t * n);
                std::uint32_t* cols = out.col_index.data();
                if (replicates == 1) {
                    // Branch-free append: always write, advance on success.
                    for (std::size_t j = 0; j < n; ++j) {
                        cols[used] = offset + static_cast<std::uint32_t>(j);
                        used += (s.next_u32() < row[j]) & (!hollow | (i != j));
                    }
                    continue;
                }
                double* vals = out.values.data();
                for (std::size_t j = 0; j < n; ++j) {
                    int hits = 0;
                    for (int r = 0; r < replicates; ++r) hits += s.next_u32() < row[j];
                    cols[used] = offset + static_cast<std::uint32_t>(j);
                    vals[used] = hits * scale;
                    used += (hits > 0) & (!hollow | (i != j));
                }
            }
            out.row_start.push_back(used);
        }
    }
    out.col_index.resize(used);
    out.values.resize(used);
    if (replicates == 1) std::fill(out.values.begin(), out.values.end(), 1.0);
    return out;
}

MultiplexGraph sample_dmprdpg(const LatentPair& latents, const SeedSpec& seed) {
    latents.validate();
    const Geometry& g = latents.geometry;
    std::vector<Matrix> blocks;
    blocks.reserve(g.layers * g.times);
    for (std::size_t k = 0; k < g.layers; ++k)
        for (std::size_t t = 0; t < g.times; ++t)
            blocks.push_back(latents.probabilities(k, t).cwiseMax(0.0).cwiseMin(1.0));
    const CsrMatrix csr = sample_unfolded(
        [&](std::size_t k, std::size_t t) -> const Matrix& { return blocks[k * g.times + t]; }, g, seed);
    return to_graph(csr, g);
}

LatentPair sbm_to_latents(const BlockModelSpec& spec) {
    spec.validate();
    const auto g1 = static_cast<Index>(spec.groups_left);
    const auto g2 = static_cast<Index>(spec.groups_right);
    Matrix unfolded(static_cast<Index>(spec.layers) * g1, static_cast<Index>(spec.times) * g2);
    for (std::size_t k = 0; k < spec.layers; ++k)
        for (std::size_t t = 0; t < spec.times; ++t)
            unfolded.block(static_cast<Index>(k) * g1, static_cast<Index>(t) * g2, g1, g2) = spec.b(k, t);

    Eigen::JacobiSVD<Matrix> svd(unfolded, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    Index rank = 0;
    while (rank < s.size() && s(rank) > 1e-10 * s(0)) ++rank;
    const Index d = std::max<Index>(rank, 1);
    Matrix left = Matrix::Zero(unfolded.rows(), d);
    Matrix right = Matrix::Zero(unfolded.cols(), d);
    if (rank > 0) {
        const Vector root = s.head(rank).cwiseSqrt();
        left.leftCols(rank) = svd.matrixU().leftCols(rank) * root.asDiagonal();
        right.leftCols(rank) = svd.matrixV().leftCols(rank) * root.asDiagonal();
    }

    const std::size_t n = spec.n();
    LatentPair out;
    out.geometry = {n, spec.layers, spec.times};
    out.X.resize(static_cast<Index>(n * spec.layers), d);
    out.Y.resize(static_cast<Index>(n * spec.times), d);
    for (std::size_t k = 0; k < spec.layers; ++k)
        for (std::size_t i = 0; i < n; ++i)
            out.X.row(static_cast<Index>(k * n + i)) = left.row(static_cast<Index>(k) * g1 + spec.z[k][i]);
    for (std::size_t t = 0; t < spec.times; ++t)
        for (std::size_t j = 0; j < n; ++j)
            out.Y.row(static_cast<Index>(t * n + j)) = right.row(static_cast<Index>(t) * g2 + spec.upsilon[t][j]);
    return out;
}

MultiplexGraph sample_dmpsbm(const BlockModelSpec& spec, std::size_t n, const SeedSpec& seed) {
    spec.validate();
    if (spec.n() != n)
        throw ValidationError("block model labels cover " + std::to_string(spec.n()) + " nodes, not " +
                              std::to_string(n));
    const Geometry g{n, spec.layers, spec.times};
    std::vector<Matrix> blocks;
    blocks.reserve(g.layers * g.times);
    for (std::size_t k = 0; k < g.layers; ++k)
        for (std::size_t t = 0; t < g.times; ++t) blocks.push_back(spec.probabilities(k, t));
    // The blockmodel draws every (i, j), self-pairs included.
    const CsrMatrix csr = sample_unfolded(
        [&](std::size_t k, std::size_t t) -> const Matrix& { return blocks[k * g.times + t]; }, g, seed, 1, false);
    return to_graph(csr, g);
}

}  // namespace mplex
