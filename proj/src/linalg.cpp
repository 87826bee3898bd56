#include "mplex/linalg.hpp"

#include "mplex/error.hpp"
#include "mplex/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace mplex {

namespace {

using Index = Eigen::Index;

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw DomainError(std::string(what) + ": matrix has non-finite entries");
}

void require_rank(Index d, Index rows, Index cols) {
    if (d < 1 || d > std::min(rows, cols))
        throw ValidationError("requested rank " + std::to_string(d) + " outside [1, " +
                              std::to_string(std::min(rows, cols)) + "]");
}

// W (rows x B, row-major) = A Q  with Q (cols x B, row-major). Four
// interleaved accumulators hide the add latency; Unit skips the multiply for
// 0/1 matrices.
template <int B, bool Unit>
void csr_apply(const CsrMatrix& a, const double* q, double* w) {
    for (Index r = 0; r < a.rows; ++r) {
        double acc[4][B] = {};
        std::size_t p = a.row_start[r];
        const std::size_t end = a.row_start[r + 1];
        for (; p + 4 <= end; p += 4) {
            for (int s = 0; s < 4; ++s) {
                const double* qr = q + static_cast<std::size_t>(a.col_index[p + s]) * B;
                if constexpr (Unit) {
                    for (int l = 0; l < B; ++l) acc[s][l] += qr[l];
                } else {
                    const double v = a.values[p + s];
                    for (int l = 0; l < B; ++l) acc[s][l] += v * qr[l];
                }
            }
        }
        for (; p < end; ++p) {
            const double* qr = q + static_cast<std::size_t>(a.col_index[p]) * B;
            const double v = Unit ? 1.0 : a.values[p];
            for (int l = 0; l < B; ++l) acc[0][l] += v * qr[l];
        }
        for (int l = 0; l < B; ++l)
            w[static_cast<std::size_t>(r) * B + l] = (acc[0][l] + acc[1][l]) + (acc[2][l] + acc[3][l]);
    }
}

template <int B>
void csr_apply(const CsrMatrix& a, bool unit, const double* q, double* w) {
    if (unit)
        csr_apply<B, true>(a, q, w);
    else
        csr_apply<B, false>(a, q, w);
}

void csr_apply_generic(const CsrMatrix& a, const RowMatrix& q, RowMatrix& w) {
    w.setZero(a.rows, q.cols());
    for (Index r = 0; r < a.rows; ++r)
        for (std::size_t p = a.row_start[r]; p < a.row_start[r + 1]; ++p)
            w.row(r) += a.values[p] * q.row(a.col_index[p]);
}

class Operator {
public:
    virtual ~Operator() = default;
    virtual Index rows() const = 0;
    virtual Index cols() const = 0;
    virtual void apply(const Matrix& v, Matrix& w) const = 0;
    virtual void apply_transpose(const Matrix& u, Matrix& c) const = 0;
    virtual Matrix dense() const = 0;
};

class DenseOperator final : public Operator {
public:
    explicit DenseOperator(const Matrix& m) : m_(m) {}
    Index rows() const override { return m_.rows(); }
    Index cols() const override { return m_.cols(); }
    void apply(const Matrix& v, Matrix& w) const override { w.noalias() = m_ * v; }
    void apply_transpose(const Matrix& u, Matrix& c) const override { c.noalias() = m_.transpose() * u; }
    Matrix dense() const override { return m_; }

private:
    const Matrix& m_;
};

// Keeps an explicit transpose so both products are row gathers.
class CsrOperator final : public Operator {
public:
    explicit CsrOperator(const CsrMatrix& m)
        : m_(m), t_(transpose(m)),
          unit_(std::all_of(m.values.begin(), m.values.end(), [](double v) { return v == 1.0; })) {}
    Index rows() const override { return m_.rows; }
    Index cols() const override { return m_.cols; }
    void apply(const Matrix& v, Matrix& w) const override { product(m_, v, w); }
    void apply_transpose(const Matrix& u, Matrix& c) const override { product(t_, u, c); }
    Matrix dense() const override { return m_.to_dense(); }

private:
    static CsrMatrix transpose(const CsrMatrix& m) {
        CsrMatrix t;
        t.rows = m.cols;
        t.cols = m.rows;
        std::vector<std::size_t> count(static_cast<std::size_t>(m.cols) + 1, 0);
        for (std::uint32_t c : m.col_index) ++count[c + 1];
        for (std::size_t c = 0; c < static_cast<std::size_t>(m.cols); ++c) count[c + 1] += count[c];
        t.row_start = count;
        t.col_index.resize(m.col_index.size());
        t.values.resize(m.values.size());
        for (Index r = 0; r < m.rows; ++r)
            for (std::size_t p = m.row_start[r]; p < m.row_start[r + 1]; ++p) {
                const std::size_t dst = count[m.col_index[p]]++;
                t.col_index[dst] = static_cast<std::uint32_t>(r);
                t.values[dst] = m.values[p];
            }
        return t;
    }

    void product(const CsrMatrix& a, const Matrix& x, Matrix& y) const {
        in_ = x;
        out_.resize(a.rows, x.cols());
        switch (x.cols()) {
            case 4: csr_apply<4>(a, unit_, in_.data(), out_.data()); break;
            case 8: csr_apply<8>(a, unit_, in_.data(), out_.data()); break;
            default: csr_apply_generic(a, in_, out_);
        }
        y = out_;
    }

    const CsrMatrix& m_;
    CsrMatrix t_;
    bool unit_;
    mutable RowMatrix in_;
    mutable RowMatrix out_;
};

Matrix orthonormal_basis(const Matrix& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

Matrix gaussian_block(Index rows, Index cols, std::uint64_t seed, Index first_col = 0) {
    Matrix g(rows, cols);
    for (Index c = 0; c < cols; ++c) {
        CounterStream s =
            SeedSpec{seed, Purpose::svd_start, static_cast<std::uint64_t>(c + first_col)}.stream();
        for (Index r = 0; r < rows; ++r) g(r, c) = s.next_normal();
    }
    return g;
}

TruncatedSvd full_svd_top(const Matrix& m, Index d) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU().leftCols(d), svd.singularValues().head(d), svd.matrixV().leftCols(d)};
}

Index block_size(Index d) {
    if (d + 2 <= 4) return 4;
    if (d + 2 <= 8) return 8;
    return d + 4;
}

// Block subspace iteration with Rayleigh-Ritz extraction. Stops once every
// retained triplet satisfies ||A^T u_i - s_i v_i|| <= tol * s_1.
TruncatedSvd converged_svd(const Operator& op, Index d, const SvdOptions& options) {
    const Index rows = op.rows();
    const Index cols = op.cols();
    const Index b = block_size(d);
    if (std::min(rows, cols) <= 48 || 2 * b > std::min(rows, cols)) return full_svd_top(op.dense(), d);

    Matrix start(cols, b);
    Index given = 0;
    if (options.start != nullptr && options.start->rows() == cols) {
        given = std::min<Index>(options.start->cols(), b);
        start.leftCols(given) = options.start->leftCols(given);
    }
    if (given < b) start.rightCols(b - given) = gaussian_block(cols, b - given, options.seed, given);
    Matrix v = orthonormal_basis(start);

    Matrix w, c;
    for (int it = 0; it < options.max_iterations; ++it) {
        op.apply(v, w);
        Eigen::HouseholderQR<Matrix> qr(w);
        const Matrix qw = qr.householderQ() * Matrix::Identity(rows, b);
        const Matrix r = qr.matrixQR().topRows(b).triangularView<Eigen::Upper>();
        Eigen::JacobiSVD<Matrix> small(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Matrix u = qw * small.matrixU();
        v = v * small.matrixV();
        const Vector& s = small.singularValues();
        op.apply_transpose(u, c);

        double worst = 0.0;
        for (Index i = 0; i < d; ++i) worst = std::max(worst, (c.col(i) - s(i) * v.col(i)).norm());
        if (worst <= options.tolerance * s(0)) return {u.leftCols(d), s.head(d), v.leftCols(d)};
        v = orthonormal_basis(c);
    }
    return full_svd_top(op.dense(), d);
}

// Range finder with at least `power_iterations` power steps, continued until
// the leading d Ritz triplets satisfy ||A v_i - s_i u_i|| <= 1e-9 s_1. Without
// the extra steps small spectral gaps leave the subspace visibly off.
TruncatedSvd randomized_svd(const Operator& op, Index d, const SvdOptions& options) {
    constexpr double kTolerance = 1e-9;
    const Index rows = op.rows();
    const Index cols = op.cols();
    const Index l = std::min(d + options.oversampling, std::min(rows, cols));
    Matrix y, bt;
    op.apply(gaussian_block(cols, l, options.seed), y);
    Matrix q = orthonormal_basis(y);
    TruncatedSvd out;
    for (int it = 0;; ++it) {
        op.apply_transpose(q, bt);  // (Q^T A)^T
        Eigen::JacobiSVD<Matrix> small(bt, Eigen::ComputeThinU | Eigen::ComputeThinV);
        // A ~ Q B = Q (V_s S U_s^T) since B^T = U_s S V_s^T.
        out = {q * small.matrixV(), small.singularValues(), small.matrixU()};
        op.apply(out.V, y);
        if (it >= options.power_iterations) {
            double worst = 0.0;
            for (Index i = 0; i < d; ++i) worst = std::max(worst, (y.col(i) - out.S(i) * out.U.col(i)).norm());
            if (worst <= kTolerance * out.S(0) || it >= options.max_iterations) break;
        }
        q = orthonormal_basis(y);
    }
    return {out.U.leftCols(d), out.S.head(d), out.V.leftCols(d)};
}

TruncatedSvd dispatch(const Operator& op, Index d, const SvdOptions& options) {
    require_rank(d, op.rows(), op.cols());
    SvdBackend backend = options.backend;
    if (backend == SvdBackend::automatic)
        backend = std::min(op.rows(), op.cols()) <= kDenseBackendLimit ? SvdBackend::dense
                                                                       : SvdBackend::randomized;
    TruncatedSvd out =
        backend == SvdBackend::dense ? converged_svd(op, d, options) : randomized_svd(op, d, options);
    normalize_signs(out);
    return out;
}

}  // namespace

CsrMatrix CsrMatrix::from_dense(const Matrix& m) {
    CsrMatrix out;
    out.rows = m.rows();
    out.cols = m.cols();
    out.row_start.assign(1, 0);
    out.row_start.reserve(static_cast<std::size_t>(m.rows()) + 1);
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            const double v = m(r, c);
            if (v != 0.0) {
                out.col_index.push_back(static_cast<std::uint32_t>(c));
                out.values.push_back(v);
            }
        }
        out.row_start.push_back(out.values.size());
    }
    return out;
}

Matrix CsrMatrix::to_dense() const {
    Matrix m = Matrix::Zero(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (std::size_t p = row_start[r]; p < row_start[r + 1]; ++p) m(r, col_index[p]) = values[p];
    return m;
}

double CsrMatrix::density() const noexcept {
    const double cells = static_cast<double>(rows) * static_cast<double>(cols);
    return cells > 0 ? static_cast<double>(values.size()) / cells : 0.0;
}

TruncatedSvd svd_truncated(const Matrix& matrix, Eigen::Index d, const SvdOptions& options) {
    require_finite(matrix, "svd_truncated");
    return dispatch(DenseOperator(matrix), d, options);
}

TruncatedSvd svd_truncated(const Matrix& matrix, Eigen::Index d, SvdBackend backend) {
    SvdOptions options;
    options.backend = backend;
    return svd_truncated(matrix, d, options);
}

TruncatedSvd svd_truncated(const CsrMatrix& matrix, Eigen::Index d, const SvdOptions& options) {
    for (double v : matrix.values)
        if (!std::isfinite(v)) throw DomainError("svd_truncated: matrix has non-finite entries");
    return dispatch(CsrOperator(matrix), d, options);
}

Vector top_singular_values(const Matrix& matrix, Eigen::Index count) {
    require_finite(matrix, "top_singular_values");
    require_rank(count, matrix.rows(), matrix.cols());
    // Eigenvalues of the Gram matrix on the smaller side.
    const bool tall = matrix.rows() >= matrix.cols();
    const Index side = tall ? matrix.cols() : matrix.rows();
    Matrix gram = Matrix::Zero(side, side);
    if (tall)
        gram.selfadjointView<Eigen::Lower>().rankUpdate(matrix.transpose());
    else
        gram.selfadjointView<Eigen::Lower>().rankUpdate(matrix);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const Vector& lambda = eig.eigenvalues();  // ascending
    Vector out(count);
    for (Index i = 0; i < count; ++i) out(i) = std::sqrt(std::max(0.0, lambda(side - 1 - i)));
    return out;
}

double two_to_infinity_norm(const Matrix& matrix) {
    require_finite(matrix, "two_to_infinity_norm");
    if (matrix.rows() == 0 || matrix.cols() == 0) return 0.0;
    return matrix.rowwise().norm().maxCoeff();
}

double frobenius_norm(const Matrix& matrix) {
    require_finite(matrix, "frobenius_norm");
    return matrix.norm();
}

void normalize_signs(TruncatedSvd& svd) {
    for (Index j = 0; j < svd.U.cols(); ++j) {
        Index best = 0;
        double mag = -1.0;
        for (Index i = 0; i < svd.U.rows(); ++i) {
            const double a = std::abs(svd.U(i, j));
            if (a > mag) {
                mag = a;
                best = i;
            }
        }
        if (svd.U(best, j) < 0.0) {
            svd.U.col(j) *= -1.0;
            svd.V.col(j) *= -1.0;
        }
    }
}

}  // namespace mplex
