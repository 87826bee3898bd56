#include "doctest.h"

#include "mplex/error.hpp"
#include "mplex/experiments.hpp"
#include "mplex/inference.hpp"
#include "mplex/samplers.hpp"
#include "support.hpp"

#include <cmath>

using namespace mplex;

namespace {

DuaseEmbedding embedding_of(const Matrix& xhat, const Matrix& yhat, std::size_t n, std::size_t K, std::size_t T) {
    DuaseEmbedding e;
    e.Xhat = xhat;
    e.Yhat = yhat;
    e.geometry = {n, K, T};
    e.singular_values = Vector::Ones(xhat.cols());
    return e;
}

// Oracle: psi from per-layer blocks without the library's layer mean.
double psi_oracle(const std::vector<Matrix>& layers) {
    Matrix mean = Matrix::Zero(layers[0].rows(), layers[0].cols());
    for (const auto& x : layers) mean += x;
    mean /= static_cast<double>(layers.size());
    double total = 0.0;
    for (const auto& x : layers) total += std::sqrt((x - mean).array().square().sum());
    return total / (static_cast<double>(layers.size()) * std::sqrt(std::log(static_cast<double>(layers[0].rows()))));
}

DuaseEmbedding eq13_embedding(double eps, std::size_t K, std::size_t n, std::uint64_t seed) {
    return duase(sample_dmpsbm(build_eq13_spec(eps, K, 3, n), n, SeedSpec{seed}), 2);
}

}  // namespace

TEST_CASE("psi hand computations") {
    const Matrix m = testing::gaussian(10, 2, 1);
    Matrix x(20, 2);
    x << m, m;
    CHECK(psi_statistic(x, 10, 2) == 0.0);
    x << m, -m;
    CHECK(psi_statistic(x, 10, 2) == doctest::Approx(m.norm() / std::sqrt(std::log(10.0))).epsilon(1e-14));
    CHECK(psi_statistic(m, 10, 1) == 0.0);

    std::vector<Matrix> layers;
    Matrix stacked(35, 3);
    for (int k = 0; k < 5; ++k) {
        layers.push_back(testing::gaussian(7, 3, 10 + k));
        stacked.middleRows(7 * k, 7) = layers.back();
    }
    CHECK(psi_statistic(stacked, 7, 5) == doctest::Approx(psi_oracle(layers)).epsilon(1e-12));

    // Invariant under a common orthogonal transform and common translation.
    const Matrix q = testing::orthogonal(3, 4);
    CHECK(psi_statistic(stacked * q, 7, 5) == doctest::Approx(psi_oracle(layers)).epsilon(1e-12));
    Matrix shifted = stacked;
    const Matrix c = testing::gaussian(7, 3, 99);
    for (int k = 0; k < 5; ++k) shifted.middleRows(7 * k, 7) += c;
    CHECK(psi_statistic(shifted, 7, 5) == doctest::Approx(psi_oracle(layers)).epsilon(1e-12));
    // Scales linearly.
    CHECK(psi_statistic(2.5 * stacked, 7, 5) == doctest::Approx(2.5 * psi_oracle(layers)).epsilon(1e-12));

    CHECK_THROWS_AS(psi_statistic(Matrix::Ones(2, 1), 1, 2), ValidationError);
}

TEST_CASE("bootstrap p-value") {
    const std::vector<double> s{0.1, 0.2, 0.3, 0.4};
    CHECK(bootstrap_p_value(0.5, s) == doctest::Approx(0.2));
    CHECK(bootstrap_p_value(0.0, s) == doctest::Approx(1.0));
    CHECK(bootstrap_p_value(0.3, s) == doctest::Approx(0.4));  // ties do not count
    CHECK(bootstrap_p_value(0.25, s) == doctest::Approx(0.6));
}

TEST_CASE("bootstrap result invariants") {
    const DuaseEmbedding e = eq13_embedding(0.0, 4, 60, 3);
    const TestResult r = bootstrap_test(e, 25, SeedSpec{9});
    CHECK(r.bootstrap_samples.size() == 25);
    CHECK(r.n_boot == 25);
    CHECK(r.d == 2);
    CHECK(r.variant == BootstrapVariant::plain);
    CHECK(r.layers == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(r.p_value >= 1.0 / 26.0);
    CHECK(r.p_value <= 1.0);
    for (double v : r.bootstrap_samples) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
    CHECK(r.psi_obs == psi_statistic(e));
    CHECK(r.p_value == bootstrap_p_value(r.psi_obs, r.bootstrap_samples));
    CHECK(r.seed_fingerprint == SeedSpec{9}.fingerprint());
}

TEST_CASE("bootstrap is reproducible and thread independent") {
    const DuaseEmbedding e = eq13_embedding(0.01, 3, 50, 4);
    const TestResult a = bootstrap_test(e, 20, SeedSpec{1});
    const TestResult b = bootstrap_test(e, 20, SeedSpec{1}, {.threads = 4});
    CHECK(a.bootstrap_samples == b.bootstrap_samples);
    CHECK(a.p_value == b.p_value);
    const TestResult c = bootstrap_test(e, 20, SeedSpec{2});
    CHECK(a.bootstrap_samples != c.bootstrap_samples);
}

TEST_CASE("averaged variant with one draw is the plain test") {
    const DuaseEmbedding e = eq13_embedding(0.0, 3, 40, 5);
    const TestResult plain = bootstrap_test(e, 15, SeedSpec{6});
    const TestResult avg = bootstrap_test_averaged(e, 15, 1, SeedSpec{6});
    CHECK(plain.bootstrap_samples == avg.bootstrap_samples);
    CHECK(plain.p_value == avg.p_value);
    CHECK(avg.variant == BootstrapVariant::averaged);
    CHECK(avg.n_rep == 1);
}

TEST_CASE("identical layers give the largest p-value") {
    // Every layer embeds to the same rows, so psi_obs = 0.
    const Matrix x = testing::uniform(30, 2, 1, 0.2, 0.5);
    Matrix stacked(90, 2);
    stacked << x, x, x;
    const Matrix y = testing::uniform(60, 2, 2, 0.2, 0.5);
    const TestResult r = bootstrap_test(embedding_of(stacked, y, 30, 3, 2), 30, SeedSpec{3});
    CHECK(r.psi_obs == 0.0);
    CHECK(r.p_value == 1.0);
    for (double v : r.bootstrap_samples) CHECK(v > 0.0);
}

TEST_CASE("plug-in clamping is reported") {
    Matrix x = Matrix::Constant(20, 1, 1.2);
    Matrix y = Matrix::Constant(20, 1, 1.0);
    const TestResult r = bootstrap_test(embedding_of(x, y, 10, 2, 2), 3, SeedSpec{1});
    CHECK(r.clamped_entries == 200);
}

TEST_CASE("bootstrap arguments") {
    const DuaseEmbedding e = eq13_embedding(0.0, 2, 20, 1);
    CHECK_THROWS_AS(bootstrap_test(e, 0, SeedSpec{1}), ValidationError);
    CHECK_THROWS_AS(bootstrap_test_averaged(e, 5, 0, SeedSpec{1}), ValidationError);
    DuaseEmbedding broken = e;
    broken.geometry.layers = 3;
    CHECK_THROWS_AS(bootstrap_test(broken, 5, SeedSpec{1}), StructuralError);
}

TEST_CASE("pairwise tests on two layers") {
    const MultiplexGraph g = sample_dmpsbm(build_eq13_spec(0.0, 2, 3, 40), 40, SeedSpec{8});
    PairwiseOptions opt;
    opt.d = 2;
    const PairwiseResult r = pairwise_tests(g, 10, SeedSpec{4}, opt);
    CHECK(r.layers == 2);
    REQUIRE(r.at(0, 1).has_value());
    REQUIRE(r.at(1, 0).has_value());
    CHECK_FALSE(r.at(0, 0).has_value());
    CHECK(std::isnan(r.p_values(0, 0)));
    CHECK(r.p_values(0, 1) == r.p_values(1, 0));
    // The single pair equals a direct test on the re-embedded subgraph.
    const TestResult direct = bootstrap_test(duase(g.select_layers({0, 1}), 2), 10,
                                             SeedSpec{4}.child(Purpose::pairwise, (0ull << 32) | 1));
    CHECK(r.at(0, 1)->p_value == direct.p_value);
    CHECK(r.at(0, 1)->bootstrap_samples == direct.bootstrap_samples);
    const std::size_t reject = r.p_values(0, 1) <= opt.alpha;
    CHECK(r.rejections == std::vector<std::size_t>{reject, reject});

    CHECK_THROWS_AS(pairwise_tests(g.select_layers({0}), 10, SeedSpec{1}), ValidationError);
}

TEST_CASE("pairwise tests over several layers") {
    const MultiplexGraph g = sample_dmpsbm(build_eq13_spec(0.02, 4, 3, 40), 40, SeedSpec{8});
    PairwiseOptions opt;
    opt.d = 2;
    opt.alpha = 0.2;
    opt.variant = BootstrapVariant::averaged;
    opt.n_rep = 2;
    const PairwiseResult r = pairwise_tests(g, 8, SeedSpec{5}, opt);
    std::vector<std::size_t> counts(4, 0);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t l = 0; l < 4; ++l) {
            if (k == l) continue;
            CHECK(r.p_values(k, l) == r.p_values(l, k));
            CHECK(r.at(k, l)->n_rep == 2);
            if (r.p_values(k, l) <= 0.2) ++counts[k];
        }
    CHECK(r.rejections == counts);
}
