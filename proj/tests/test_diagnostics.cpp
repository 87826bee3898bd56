#include "doctest.h"

#include "mplex/diagnostics.hpp"
#include "mplex/error.hpp"
#include "mplex/experiments.hpp"
#include "support.hpp"

#include <sstream>

using namespace mplex;

TEST_CASE("alignment recovers a known transform") {
    const Matrix x = testing::gaussian(50, 3, 1);
    CHECK((align_least_squares(x, x) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    const Matrix w = testing::orthogonal(3, 2);
    CHECK((align_least_squares(x * w, x) - w.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    const Matrix g = testing::gaussian(3, 3, 5);
    CHECK((align_least_squares(x * g, x) - g.inverse()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("alignment is a least-squares solution") {
    const Matrix xhat = testing::gaussian(40, 2, 3);
    const Matrix x = testing::gaussian(40, 2, 4);
    const Matrix q = align_least_squares(xhat, x);
    const Matrix residual = xhat * q - x;
    CHECK((xhat.transpose() * residual).cwiseAbs().maxCoeff() < 1e-8);
    const double best = residual.norm();
    for (std::uint64_t s = 0; s < 100; ++s) {
        const Matrix dq = 1e-3 * testing::gaussian(2, 2, 100 + s);
        CHECK((xhat * (q + dq) - x).norm() >= best);
    }
    // Column sign flips of Xhat leave the aligned residual unchanged.
    Matrix flipped = xhat;
    flipped.col(1) *= -1.0;
    const Matrix q2 = align_least_squares(flipped, x);
    CHECK((flipped * q2 - x - residual).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("alignment errors") {
    Matrix x = testing::gaussian(20, 2, 1);
    Matrix deficient(20, 2);
    deficient << x.col(0), 2.0 * x.col(0);
    CHECK_THROWS_AS(align_least_squares(deficient, x), DegenerateInputError);
    CHECK_THROWS_AS(align_least_squares(x, testing::gaussian(20, 3, 1)), StructuralError);
}

TEST_CASE("quantiles") {
    CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({4, 1, 3, 2}, 0.0) == 1.0);
    CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
    CHECK(quantile({1, 2, 3, 4, 5}, 0.25) == doctest::Approx(2.0));
    CHECK(quantile({10, 20}, 0.1) == doctest::Approx(11.0));
    CHECK_THROWS_AS(quantile({}, 0.5), ValidationError);
}

TEST_CASE("noise-free sweep has no error") {
    const SpecFamily family = [](std::size_t n) { return build_eq13_spec(0.0, 4, 3, n); };
    const ConsistencyCurve curve =
        consistency_sweep(family, {20, 40, 80}, 2, SeedSpec{1}, SweepOptions{.noise_free = true});
    REQUIRE(curve.points.size() == 3);
    for (const auto& p : curve.points) {
        CHECK(p.median < 1e-6);
        CHECK(p.q95 < 1e-6);
        CHECK(p.frobenius_median < 1e-6);
        CHECK(p.errors.size() == 2);
    }
}

TEST_CASE("sampled sweep summaries") {
    const SpecFamily family = [](std::size_t n) { return build_eq13_spec(0.0, 4, 3, n); };
    const ConsistencyCurve a = consistency_sweep(family, {30, 60}, 6, SeedSpec{2});
    const ConsistencyCurve b = consistency_sweep(family, {30, 60}, 6, SeedSpec{2}, SweepOptions{.threads = 3});
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& p = a.points[i];
        CHECK(p.errors == b.points[i].errors);
        CHECK(p.seeds == 6);
        CHECK(p.q05 <= p.q25);
        CHECK(p.q25 <= p.median);
        CHECK(p.median <= p.q75);
        CHECK(p.q75 <= p.q95);
        CHECK(p.median > 0.0);
        CHECK(std::isfinite(p.q95));
        CHECK(p.gram.size() == 2);
        CHECK(p.gram(0) >= p.gram(1));
    }
    std::ostringstream csv;
    write_consistency_csv(csv, a);
    const std::string text = csv.str();
    CHECK(text.rfind("n,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("sweep arguments") {
    const SpecFamily family = [](std::size_t n) { return build_eq13_spec(0.0, 2, 2, n); };
    CHECK_THROWS_AS(consistency_sweep(family, {40, 20}, 2, SeedSpec{1}), ValidationError);
    CHECK_THROWS_AS(consistency_sweep(family, {}, 2, SeedSpec{1}), ValidationError);
    CHECK_THROWS_AS(consistency_sweep(family, {20}, 0, SeedSpec{1}), ValidationError);
    const SpecFamily wrong = [](std::size_t n) { return build_eq13_spec(0.0, 2, 2, n + 1); };
    CHECK_THROWS_AS(consistency_sweep(wrong, {20}, 1, SeedSpec{1}), ValidationError);
}
