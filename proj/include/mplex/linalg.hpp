#ifndef MPLEX_LINALG_HPP
#define MPLEX_LINALG_HPP

#include "mplex/graph.hpp"

#include <cstdint>
#include <vector>

namespace mplex {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Compressed sparse rows. Explicit zeros are never stored.
struct CsrMatrix {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::vector<std::size_t> row_start{0};
    std::vector<std::uint32_t> col_index;
    std::vector<double> values;

    static CsrMatrix from_dense(const Matrix& m);
    Matrix to_dense() const;
    std::size_t nonzeros() const noexcept { return values.size(); }
    double density() const noexcept;
};

// Top-d singular triplets: columns of U and V orthonormal, S descending.
struct TruncatedSvd {
    Matrix U;
    Vector S;
    Matrix V;
};

enum class SvdBackend {
    automatic,   // dense when min(rows, cols) <= 2000, randomized otherwise
    dense,       // converged to machine tolerance
    randomized,  // range finder with oversampling and power iterations
};

struct SvdOptions {
    SvdBackend backend = SvdBackend::automatic;
    // Optional guess for the right singular subspace (cols x k, any k <= d).
    // Only affects the iteration count of the dense backend, not its result
    // beyond the convergence tolerance.
    const Matrix* start = nullptr;
    std::uint64_t seed = 0x5eedu;
    double tolerance = 1e-12;
    int max_iterations = 500;
    int oversampling = 10;
    int power_iterations = 2;
};

// Above this size the automatic backend switches to the randomized one.
inline constexpr Eigen::Index kDenseBackendLimit = 2000;

TruncatedSvd svd_truncated(const Matrix& matrix, Eigen::Index d, const SvdOptions& options = {});
TruncatedSvd svd_truncated(const Matrix& matrix, Eigen::Index d, SvdBackend backend);
// Same contract on a sparse operand.
TruncatedSvd svd_truncated(const CsrMatrix& matrix, Eigen::Index d, const SvdOptions& options = {});

// The `count` largest singular values, descending.
Vector top_singular_values(const Matrix& matrix, Eigen::Index count);

// Largest row Euclidean norm.
double two_to_infinity_norm(const Matrix& matrix);
double frobenius_norm(const Matrix& matrix);

// Flips column pairs so the largest-magnitude entry of each U column is
// positive (first index wins ties).
void normalize_signs(TruncatedSvd& svd);

}  // namespace mplex

#endif  // MPLEX_LINALG_HPP
