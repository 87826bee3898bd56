#include "mplex/embedding.hpp"

#include "mplex/error.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

namespace mplex {

namespace {

using Index = Eigen::Index;

void check_dimension(Index d, const Geometry& g) {
    const auto limit = static_cast<Index>(std::min(g.rows(), g.cols()));
    if (d < 1 || d > limit)
        throw ValidationError("embedding dimension " + std::to_string(d) + " outside [1, " +
                              std::to_string(limit) + "]");
}

}  // namespace

DuaseEmbedding embedding_from_svd(const TruncatedSvd& svd, const Geometry& geometry) {
    const Index d = svd.S.size();
    if (d == 0 || !(svd.S(0) > 0.0) || !(svd.S(d - 1) > 1e-12 * svd.S(0)))
        throw DegenerateInputError("unfolded matrix has fewer than " + std::to_string(d) +
                                   " positive singular values");
    const Vector root = svd.S.cwiseSqrt();
    return {svd.U * root.asDiagonal(), svd.V * root.asDiagonal(), svd.S, geometry};
}

DuaseEmbedding duase(const UnfoldedMatrix& matrix, Index d, const SvdOptions& options) {
    check_dimension(d, matrix.geometry);
    const Index cells = matrix.data.size();
    const Index nonzero = (matrix.data.array() != 0.0).count();
    if (cells > 0 && static_cast<double>(nonzero) < kSparseOperatorDensity * static_cast<double>(cells))
        return duase(CsrMatrix::from_dense(matrix.data), matrix.geometry, d, options);
    return embedding_from_svd(svd_truncated(matrix.data, d, options), matrix.geometry);
}

DuaseEmbedding duase(const MultiplexGraph& graph, Index d, const SvdOptions& options) {
    return duase(unfold(graph), d, options);
}

DuaseEmbedding duase(const CsrMatrix& matrix, const Geometry& geometry, Index d, const SvdOptions& options) {
    check_dimension(d, geometry);
    if (matrix.rows != static_cast<Index>(geometry.rows()) || matrix.cols != static_cast<Index>(geometry.cols()))
        throw StructuralError("sparse unfolding does not match the declared geometry");
    return embedding_from_svd(svd_truncated(matrix, d, options), geometry);
}

std::vector<double> profile_log_likelihood(std::span<const double> values) {
    const std::size_t p = values.size();
    if (p < 3) throw ValidationError("scree selection needs at least 3 values, got " + std::to_string(p));
    std::vector<double> x(values.begin(), values.end());
    for (double v : x)
        if (!std::isfinite(v)) throw DomainError("scree values must be finite");
    std::sort(x.begin(), x.end(), std::greater<>());

    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    const double floor = std::max(DBL_MIN, (1e-12 * scale) * (1e-12 * scale));

    std::vector<double> out;
    out.reserve(p - 1);
    for (std::size_t q = 1; q < p; ++q) {
        double mean1 = 0.0, mean2 = 0.0;
        for (std::size_t i = 0; i < q; ++i) mean1 += x[i];
        for (std::size_t i = q; i < p; ++i) mean2 += x[i];
        mean1 /= static_cast<double>(q);
        mean2 /= static_cast<double>(p - q);
        double ss = 0.0;
        for (std::size_t i = 0; i < q; ++i) ss += (x[i] - mean1) * (x[i] - mean1);
        for (std::size_t i = q; i < p; ++i) ss += (x[i] - mean2) * (x[i] - mean2);
        const double variance = std::max(ss / static_cast<double>(p - 2), floor);
        out.push_back(-0.5 * static_cast<double>(p) * std::log(2.0 * std::numbers::pi * variance) -
                      ss / (2.0 * variance));
    }
    return out;
}

Index select_dimension(std::span<const double> values) {
    const std::vector<double> ll = profile_log_likelihood(values);
    std::size_t best = 0;
    for (std::size_t i = 1; i < ll.size(); ++i)
        if (ll[i] > ll[best]) best = i;
    return static_cast<Index>(best + 1);
}

Index select_dimension(std::span<const double> values, int elbows) {
    if (elbows < 1) throw ValidationError("elbow count must be >= 1");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    Index q = select_dimension(std::span<const double>(sorted));
    for (int e = 1; e < elbows; ++e) {
        const std::span<const double> rest(sorted.begin() + q, sorted.end());
        if (rest.size() < 3) break;
        q += select_dimension(rest);
    }
    return q;
}

Index select_dimension(const MultiplexGraph& graph, std::optional<Index> max_d, int elbows) {
    const Geometry& g = graph.geometry();
    const auto limit = static_cast<Index>(std::min(g.rows(), g.cols()));
    const Index cap = max_d.value_or(std::min<Index>(50, limit));
    if (cap > limit)
        throw ValidationError("max_d " + std::to_string(cap) + " exceeds min(nK, nT) = " + std::to_string(limit));
    if (cap < 3) throw ValidationError("scree selection needs at least 3 singular values, got " + std::to_string(cap));
    const Vector s = top_singular_values(unfold(graph).data, cap);
    return select_dimension(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), elbows);
}

Matrix layer_mean(const Matrix& xhat, std::size_t n, std::size_t layers) {
    const auto rows = static_cast<Index>(n);
    if (xhat.rows() != rows * static_cast<Index>(layers) || layers == 0)
        throw StructuralError("embedding rows do not match n * K");
    // Averaging offsets from the first block keeps the mean of equal blocks exact.
    const auto first = xhat.topRows(rows);
    Matrix offset = Matrix::Zero(rows, xhat.cols());
    for (std::size_t k = 1; k < layers; ++k) offset += xhat.middleRows(static_cast<Index>(k) * rows, rows) - first;
    return first + offset / static_cast<double>(layers);
}

Matrix layer_mean(const DuaseEmbedding& embedding) {
    return layer_mean(embedding.Xhat, embedding.geometry.n, embedding.geometry.layers);
}

}  // namespace mplex
