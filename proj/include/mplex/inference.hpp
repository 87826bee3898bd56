#ifndef MPLEX_INFERENCE_HPP
#define MPLEX_INFERENCE_HPP

#include "mplex/embedding.hpp"
#include "mplex/random.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mplex {

enum class BootstrapVariant {
    plain,     // Bernoulli plug-in graphs
    averaged,  // each block is the mean of n_rep plug-in draws
};

struct TestResult {
    double psi_obs = 0.0;
    std::vector<double> bootstrap_samples;
    double p_value = 1.0;
    Eigen::Index d = 0;
    std::size_t n_boot = 0;
    BootstrapVariant variant = BootstrapVariant::plain;
    int n_rep = 1;
    std::string seed_fingerprint;
    std::vector<std::size_t> layers;  // zero-based layers of the tested graph
    // Plug-in probabilities that fell outside [0, 1] and were clamped
    // (counted once per distinct n x n time block).
    std::size_t clamped_entries = 0;
};

struct BootstrapOptions {
    unsigned threads = 1;
    SvdOptions svd;
};

// (K sqrt(log n))^{-1} sum_k ||Xhat^k - mean_k Xhat^k||_F, natural log.
double psi_statistic(const DuaseEmbedding& embedding);
double psi_statistic(const Matrix& xhat, std::size_t n, std::size_t layers);

// (1 + #{b : sample_b > observed}) / (1 + samples.size()).
double bootstrap_p_value(double psi_obs, std::span<const double> samples);

// Plug-in bootstrap: every bootstrap graph has blocks
// Bernoulli(clamp(mean(Xhat) Yhat^{t T})), diagonal included, embedded at
// the same dimension. A hollow bootstrap overstates psi* and makes the test
// conservative. Iteration b draws from seed.with(bootstrap, b).
TestResult bootstrap_test(const DuaseEmbedding& embedding, std::size_t n_boot, const SeedSpec& seed,
                          const BootstrapOptions& options = {});

// As bootstrap_test, but each bootstrap block is the mean of n_rep draws.
// With n_rep = 1 the result equals bootstrap_test for the same seed.
TestResult bootstrap_test_averaged(const DuaseEmbedding& embedding, std::size_t n_boot, int n_rep,
                                   const SeedSpec& seed, const BootstrapOptions& options = {});

struct PairwiseOptions {
    std::optional<Eigen::Index> d;  // unset: scree selection per pair
    double alpha = 0.01;
    BootstrapVariant variant = BootstrapVariant::plain;
    int n_rep = 1;
    BootstrapOptions bootstrap;
};

struct PairwiseResult {
    std::size_t layers = 0;
    double alpha = 0.0;
    std::vector<std::optional<TestResult>> tests;  // K x K, row-major, empty diagonal
    Matrix p_values;                               // NaN on the diagonal
    std::vector<std::size_t> rejections;           // per layer, p <= alpha

    const std::optional<TestResult>& at(std::size_t k, std::size_t l) const { return tests[k * layers + l]; }
};

// Tests every unordered layer pair on the re-embedded two-layer subgraph.
// Pair (k, l) uses seed.child(pairwise, (k << 32) | l).
PairwiseResult pairwise_tests(const MultiplexGraph& graph, std::size_t n_boot, const SeedSpec& seed,
                              const PairwiseOptions& options = {});

}  // namespace mplex

#endif  // MPLEX_INFERENCE_HPP
