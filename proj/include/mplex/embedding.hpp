#ifndef MPLEX_EMBEDDING_HPP
#define MPLEX_EMBEDDING_HPP

#include "mplex/graph.hpp"
#include "mplex/linalg.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mplex {

// Doubly unfolded adjacency spectral embedding: Xhat = U S^{1/2} (nK x d)
// and Yhat = V S^{1/2} (nT x d) from the top-d singular triplets.
struct DuaseEmbedding {
    Matrix Xhat;
    Matrix Yhat;
    Vector singular_values;
    Geometry geometry;

    Eigen::Index dimension() const noexcept { return Xhat.cols(); }
    auto layer(std::size_t k) const {
        const auto n = static_cast<Eigen::Index>(geometry.n);
        return Xhat.middleRows(static_cast<Eigen::Index>(k) * n, n);
    }
    auto time(std::size_t t) const {
        const auto n = static_cast<Eigen::Index>(geometry.n);
        return Yhat.middleRows(static_cast<Eigen::Index>(t) * n, n);
    }
};

// Embeddings switch to the sparse operator below this fill fraction.
inline constexpr double kSparseOperatorDensity = 0.5;

DuaseEmbedding duase(const MultiplexGraph& graph, Eigen::Index d, const SvdOptions& options = {});
DuaseEmbedding duase(const UnfoldedMatrix& matrix, Eigen::Index d, const SvdOptions& options = {});
DuaseEmbedding duase(const CsrMatrix& matrix, const Geometry& geometry, Eigen::Index d,
                     const SvdOptions& options = {});
// Builds the embedding from an already computed truncated SVD.
DuaseEmbedding embedding_from_svd(const TruncatedSvd& svd, const Geometry& geometry);

// Profile log-likelihood of every split q = 1..p-1 of the values (sorted
// descending) into two Gaussian groups with a shared variance. Entry q-1
// holds the value for split q.
std::vector<double> profile_log_likelihood(std::span<const double> values);

// Elbow of a scree sequence: the split maximizing the profile likelihood,
// smallest q on ties. Needs at least three values.
Eigen::Index select_dimension(std::span<const double> values);

// Position of the `elbows`-th elbow: after each elbow the search restarts on
// the values beyond it. Stops early when fewer than three values remain.
Eigen::Index select_dimension(std::span<const double> values, int elbows);

// Elbow of the leading singular values of the unfolded graph; `max_d`
// defaults to min(50, min(nK, nT)). The default takes the second elbow: the
// first one usually only separates the dominant singular value.
inline constexpr int kDefaultElbows = 2;
Eigen::Index select_dimension(const MultiplexGraph& graph, std::optional<Eigen::Index> max_d = std::nullopt,
                              int elbows = kDefaultElbows);

// Mean of the K layer blocks of Xhat (n x d).
Matrix layer_mean(const DuaseEmbedding& embedding);
Matrix layer_mean(const Matrix& xhat, std::size_t n, std::size_t layers);

}  // namespace mplex

#endif  // MPLEX_EMBEDDING_HPP
