#ifndef MPLEX_TESTS_SUPPORT_HPP
#define MPLEX_TESTS_SUPPORT_HPP

#include "mplex/graph.hpp"

#include <Eigen/QR>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace testing {

using mplex::Matrix;

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = z(rng);
    return m;
}

inline Matrix uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
    return m;
}

inline Matrix orthogonal(Eigen::Index d, std::uint64_t seed) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(d, d, seed));
    return qr.householderQ() * Matrix::Identity(d, d);
}

inline Matrix orthonormal_columns(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(rows, cols, seed));
    return qr.householderQ() * Matrix::Identity(rows, cols);
}

inline Matrix random_binary(Eigen::Index n, std::uint64_t seed, double p = 0.3, bool hollow = true) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution b(p);
    Matrix m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = (hollow && i == j) ? 0.0 : (b(rng) ? 1.0 : 0.0);
    return m;
}

inline mplex::MultiplexGraph random_graph(std::size_t n, std::size_t K, std::size_t T, std::uint64_t seed,
                                          double p = 0.3) {
    std::vector<mplex::Block> blocks;
    for (std::size_t i = 0; i < K * T; ++i)
        blocks.emplace_back(random_binary(static_cast<Eigen::Index>(n), seed * 1000 + i, p));
    return mplex::MultiplexGraph({n, K, T}, std::move(blocks));
}

// A fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("mplex_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing

#endif  // MPLEX_TESTS_SUPPORT_HPP
