#include "doctest.h"

#include "mplex/error.hpp"
#include "mplex/experiments.hpp"
#include "mplex/samplers.hpp"
#include "support.hpp"

#include <cmath>

using namespace mplex;

namespace {

LatentPair constant_latents(std::size_t n, std::size_t K, std::size_t T, double p) {
    LatentPair l;
    l.geometry = {n, K, T};
    l.X = Matrix::Constant(static_cast<Eigen::Index>(n * K), 1, std::sqrt(p));
    l.Y = Matrix::Constant(static_cast<Eigen::Index>(n * T), 1, std::sqrt(p));
    return l;
}

}  // namespace

TEST_CASE("latent validation allows rounding slack only") {
    LatentPair l = constant_latents(4, 1, 1, 1.0);
    CHECK_NOTHROW(l.validate());
    l.X *= 1.0 + 1e-14;
    CHECK_NOTHROW(l.validate());
    l.X = Matrix::Constant(4, 1, 1.001);
    CHECK_THROWS_AS(l.validate(), DomainError);
    l.X = Matrix::Constant(4, 1, -0.5);
    CHECK_THROWS_AS(l.validate(), DomainError);
    l.X = Matrix::Constant(3, 1, 0.5);
    CHECK_THROWS_AS(l.validate(), StructuralError);
}

TEST_CASE("blockmodel latents reproduce every block probability") {
    const BlockModelSpec spec = build_eq13_spec(0.0, 10, 3, 21);
    const LatentPair l = sbm_to_latents(spec);
    CHECK(l.dimension() == 2);
    for (std::size_t k = 0; k < 10; ++k)
        for (std::size_t t = 0; t < 3; ++t)
            CHECK((l.probabilities(k, t) - spec.probabilities(k, t)).cwiseAbs().maxCoeff() < 1e-10);

    const BlockModelSpec tilted = build_eq13_spec(0.02, 10, 3, 21);
    const LatentPair lt = sbm_to_latents(tilted);
    CHECK(lt.dimension() == 3);
    for (std::size_t k = 0; k < 10; ++k)
        for (std::size_t t = 0; t < 3; ++t)
            CHECK((lt.probabilities(k, t) - tilted.probabilities(k, t)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("blockmodel latents on small exhaustive fixtures") {
    // Every 2 x 2 block matrix with entries on a coarse grid, K = 2, T = 1.
    const double grid[] = {0.0, 0.3, 1.0};
    int checked = 0;
    for (int code = 0; code < 81 * 9; code += 7) {
        BlockModelSpec spec;
        spec.groups_left = spec.groups_right = 2;
        spec.layers = 2;
        spec.times = 1;
        int c = code;
        for (int b = 0; b < 2; ++b) {
            Matrix m(2, 2);
            for (int e = 0; e < 4; ++e) {
                m(e / 2, e % 2) = grid[c % 3];
                c /= 3;
            }
            spec.B.push_back(m);
        }
        if (spec.B[0].isZero() && spec.B[1].isZero()) continue;
        spec.z = {{0, 1, 1, 0}, {1, 1, 0, 0}};
        spec.upsilon = {{0, 0, 1, 1}};
        const LatentPair l = sbm_to_latents(spec);
        for (std::size_t k = 0; k < 2; ++k)
            CHECK((l.probabilities(k, 0) - spec.probabilities(k, 0)).cwiseAbs().maxCoeff() < 1e-10);
        ++checked;
    }
    CHECK(checked > 90);
}

TEST_CASE("blockmodel validation") {
    BlockModelSpec spec = build_eq13_spec(0.0, 2, 2, 6);
    spec.z[1][3] = 2;
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec = build_eq13_spec(0.0, 2, 2, 6);
    spec.B[1](0, 0) = 1.2;
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec = build_eq13_spec(0.0, 2, 2, 6);
    CHECK_THROWS_AS(sample_dmpsbm(spec, 7, SeedSpec{1}), ValidationError);
    spec.upsilon.pop_back();
    CHECK_THROWS_AS(spec.validate(), StructuralError);
}

TEST_CASE("latent-position graphs are hollow, blockmodel graphs are not") {
    const BlockModelSpec spec = build_eq13_spec(0.01, 3, 2, 40);
    const MultiplexGraph g = sample_dmpsbm(spec, 40, SeedSpec{7});
    CHECK(g.kind() == EntryKind::binary);
    CHECK(g.directed());
    double loops = 0.0;
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t t = 0; t < 2; ++t)
            for (std::size_t i = 0; i < 40; ++i) loops += g.at(k, t, i, i);
    CHECK(loops > 0.0);

    const MultiplexGraph h = sample_dmprdpg(constant_latents(40, 3, 2, 0.9), SeedSpec{7});
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t t = 0; t < 2; ++t)
            for (std::size_t i = 0; i < 40; ++i) CHECK(h.at(k, t, i, i) == 0.0);
}

TEST_CASE("a full draw keeps the diagonal and the same words") {
    const Matrix probs = testing::uniform(12, 12, 5);
    const auto src = [&](std::size_t, std::size_t) -> const Matrix& { return probs; };
    const Matrix hollow = sample_unfolded(src, {12, 2, 2}, SeedSpec{9}, 2).to_dense();
    const Matrix full = sample_unfolded(src, {12, 2, 2}, SeedSpec{9}, 2, false).to_dense();
    Matrix off = full;
    for (Eigen::Index k = 0; k < 2; ++k)
        for (Eigen::Index t = 0; t < 2; ++t) off.block(12 * k, 12 * t, 12, 12).diagonal().setZero();
    CHECK(off == hollow);
    CHECK(full != hollow);
}

TEST_CASE("each entry is the documented word of its block stream") {
    const std::size_t n = 9, K = 2, T = 3;
    std::vector<Matrix> probs;
    for (std::size_t b = 0; b < K * T; ++b) probs.push_back(testing::uniform(9, 9, 40 + b));
    const Geometry geo{n, K, T};
    const SeedSpec seed = SeedSpec{123}.with(Purpose::bootstrap, 4);
    const CsrMatrix csr = sample_unfolded(
        [&](std::size_t k, std::size_t t) -> const Matrix& { return probs[k * T + t]; }, geo, seed);
    const Matrix u = csr.to_dense();
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t t = 0; t < T; ++t) {
            CounterStream s = seed.stream(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(t));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const std::uint32_t w = s.next_u32();
                    const double expect =
                        i == j ? 0.0
                               : (w < bernoulli_threshold(probs[k * T + t](static_cast<Eigen::Index>(i),
                                                                           static_cast<Eigen::Index>(j)))
                                      ? 1.0
                                      : 0.0);
                    CHECK(u(static_cast<Eigen::Index>(k * n + i), static_cast<Eigen::Index>(t * n + j)) == expect);
                }
        }

    // Replicated draws: word (i n + j) R + r.
    const int R = 3;
    const Matrix avg = sample_unfolded(
        [&](std::size_t k, std::size_t t) -> const Matrix& { return probs[k * T + t]; }, geo, seed, R).to_dense();
    CounterStream s = seed.stream(1, 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            int hits = 0;
            for (int r = 0; r < R; ++r)
                hits += s.next_u32() < bernoulli_threshold(probs[5](static_cast<Eigen::Index>(i),
                                                                     static_cast<Eigen::Index>(j)));
            if (i == j) hits = 0;
            CHECK(avg(static_cast<Eigen::Index>(n + i), static_cast<Eigen::Index>(2 * n + j)) ==
                  doctest::Approx(hits / 3.0).epsilon(1e-15));
        }
}

TEST_CASE("sampling is deterministic in the seed") {
    const LatentPair l = constant_latents(30, 2, 2, 0.4);
    const MultiplexGraph a = sample_dmprdpg(l, SeedSpec{5});
    CHECK(a.same_values(sample_dmprdpg(l, SeedSpec{5})));
    CHECK_FALSE(a.same_values(sample_dmprdpg(l, SeedSpec{6})));
    CHECK_FALSE(a.same_values(sample_dmprdpg(l, SeedSpec{5}.with(Purpose::bootstrap, 0))));
}

TEST_CASE("edge frequency matches the probability") {
    const double p = 0.3;
    const std::size_t n = 200;
    const MultiplexGraph g = sample_dmprdpg(constant_latents(n, 2, 2, p), SeedSpec{17});
    double edges = 0.0;
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t t = 0; t < 2; ++t) edges += static_cast<double>(g.block(k, t).nonzeros());
    const double cells = 4.0 * n * (n - 1);
    CHECK(std::abs(edges / cells - p) < 4.0 * std::sqrt(p * (1 - p) / cells));
}

TEST_CASE("averaged draws have binomial variance") {
    const double p = 0.3;
    const int R = 5;
    const Eigen::Index n = 150;
    const Matrix probs = Matrix::Constant(n, n, p);
    const Matrix avg =
        sample_unfolded([&](std::size_t, std::size_t) -> const Matrix& { return probs; }, {150, 1, 1}, SeedSpec{3}, R)
            .to_dense();
    double sum = 0.0, sum2 = 0.0;
    const double cells = static_cast<double>(n * (n - 1));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) {
                sum += avg(i, j);
                sum2 += avg(i, j) * avg(i, j);
                CHECK(std::abs(avg(i, j) * R - std::round(avg(i, j) * R)) < 1e-12);
            }
    const double mean = sum / cells;
    const double var = sum2 / cells - mean * mean;
    CHECK(std::abs(mean - p) < 4.0 * std::sqrt(p * (1 - p) / R / cells));
    CHECK(std::abs(var / (p * (1 - p) / R) - 1.0) < 0.05);
}

TEST_CASE("probabilities outside [0, 1] are clamped") {
    const Matrix high = Matrix::Constant(20, 20, 1.7);
    const Matrix low = Matrix::Constant(20, 20, -0.2);
    const Matrix a = sample_unfolded([&](std::size_t, std::size_t t) -> const Matrix& { return t ? low : high; },
                                     {20, 1, 2}, SeedSpec{1})
                         .to_dense();
    Matrix expect = Matrix::Ones(20, 20);
    expect.diagonal().setZero();
    CHECK(a.leftCols(20) == expect);
    CHECK(a.rightCols(20).isZero());
}

TEST_CASE("sampler arguments") {
    const Matrix probs = Matrix::Constant(4, 4, 0.5);
    auto src = [&](std::size_t, std::size_t) -> const Matrix& { return probs; };
    CHECK_THROWS_AS(sample_unfolded(src, {4, 1, 1}, SeedSpec{1}, 0), ValidationError);
    CHECK_THROWS_AS(sample_unfolded(src, {5, 1, 1}, SeedSpec{1}), StructuralError);
}
