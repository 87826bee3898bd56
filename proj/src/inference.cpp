#include "mplex/inference.hpp"

#include "mplex/error.hpp"
#include "mplex/parallel.hpp"
#include "mplex/samplers.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mplex {

namespace {

using Index = Eigen::Index;

void check_embedding(const DuaseEmbedding& e) {
    const Geometry& g = e.geometry;
    if (g.n == 0 || g.layers == 0 || g.times == 0 || e.Xhat.rows() != static_cast<Index>(g.rows()) ||
        e.Yhat.rows() != static_cast<Index>(g.cols()) || e.Xhat.cols() != e.Yhat.cols() || e.Xhat.cols() == 0)
        throw StructuralError("embedding geometry is inconsistent with its matrices");
    if (!e.Xhat.allFinite() || !e.Yhat.allFinite()) throw DomainError("embedding has non-finite entries");
}

TestResult run_bootstrap(const DuaseEmbedding& embedding, std::size_t n_boot, int n_rep,
                         BootstrapVariant variant, const SeedSpec& seed, const BootstrapOptions& options) {
    check_embedding(embedding);
    if (n_boot < 1) throw ValidationError("n_boot must be >= 1");
    if (n_rep < 1) throw ValidationError("n_rep must be >= 1");
    const Geometry& g = embedding.geometry;
    const Index d = embedding.dimension();

    TestResult result;
    result.psi_obs = psi_statistic(embedding);
    result.d = d;
    result.n_boot = n_boot;
    result.variant = variant;
    result.n_rep = n_rep;
    result.seed_fingerprint = seed.fingerprint();
    for (std::size_t k = 0; k < g.layers; ++k) result.layers.push_back(k);

    // The plug-in probabilities do not depend on the layer.
    const Matrix mean = layer_mean(embedding);
    std::vector<Matrix> plug_in(g.times);
    for (std::size_t t = 0; t < g.times; ++t) {
        Matrix p = mean * embedding.time(t).transpose();
        result.clamped_entries += static_cast<std::size_t>(((p.array() < 0.0) || (p.array() > 1.0)).count());
        plug_in[t] = p.cwiseMax(0.0).cwiseMin(1.0);
    }
    const ProbabilitySource source = [&](std::size_t, std::size_t t) -> const Matrix& { return plug_in[t]; };

    SvdOptions svd = options.svd;
    svd.start = &embedding.Yhat;
    result.bootstrap_samples.assign(n_boot, 0.0);
    parallel_for(n_boot, options.threads, [&](std::size_t b) {
        const CsrMatrix sample = sample_unfolded(source, g, seed.with(Purpose::bootstrap, b), n_rep, false);
        result.bootstrap_samples[b] = psi_statistic(duase(sample, g, d, svd));
    });
    result.p_value = bootstrap_p_value(result.psi_obs, result.bootstrap_samples);
    return result;
}

}  // namespace

double psi_statistic(const Matrix& xhat, std::size_t n, std::size_t layers) {
    if (n < 2) throw ValidationError("psi needs n >= 2 so that log n > 0");
    const Matrix mean = layer_mean(xhat, n, layers);
    const auto rows = static_cast<Index>(n);
    double total = 0.0;
    for (std::size_t k = 0; k < layers; ++k)
        total += (xhat.middleRows(static_cast<Index>(k) * rows, rows) - mean).norm();
    return total / (static_cast<double>(layers) * std::sqrt(std::log(static_cast<double>(n))));
}

double psi_statistic(const DuaseEmbedding& embedding) {
    return psi_statistic(embedding.Xhat, embedding.geometry.n, embedding.geometry.layers);
}

double bootstrap_p_value(double psi_obs, std::span<const double> samples) {
    std::size_t exceed = 0;
    for (double s : samples)
        if (s > psi_obs) ++exceed;
    return static_cast<double>(1 + exceed) / static_cast<double>(1 + samples.size());
}

TestResult bootstrap_test(const DuaseEmbedding& embedding, std::size_t n_boot, const SeedSpec& seed,
                          const BootstrapOptions& options) {
    return run_bootstrap(embedding, n_boot, 1, BootstrapVariant::plain, seed, options);
}

TestResult bootstrap_test_averaged(const DuaseEmbedding& embedding, std::size_t n_boot, int n_rep,
                                   const SeedSpec& seed, const BootstrapOptions& options) {
    return run_bootstrap(embedding, n_boot, n_rep, BootstrapVariant::averaged, seed, options);
}

PairwiseResult pairwise_tests(const MultiplexGraph& graph, std::size_t n_boot, const SeedSpec& seed,
                              const PairwiseOptions& options) {
    const std::size_t layers = graph.layers();
    if (layers < 2) throw ValidationError("pairwise tests need at least 2 layers");
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");

    PairwiseResult out;
    out.layers = layers;
    out.alpha = options.alpha;
    out.tests.resize(layers * layers);
    out.p_values = Matrix::Constant(static_cast<Index>(layers), static_cast<Index>(layers),
                                    std::numeric_limits<double>::quiet_NaN());
    out.rejections.assign(layers, 0);

    for (std::size_t k = 0; k < layers; ++k) {
        for (std::size_t l = k + 1; l < layers; ++l) {
            const MultiplexGraph sub = graph.select_layers({k, l});
            const Index d = options.d ? *options.d : select_dimension(sub);
            const DuaseEmbedding emb = duase(sub, d, options.bootstrap.svd);
            const SeedSpec pair_seed = seed.child(Purpose::pairwise, (static_cast<std::uint64_t>(k) << 32) | l);
            TestResult r = options.variant == BootstrapVariant::plain
                               ? bootstrap_test(emb, n_boot, pair_seed, options.bootstrap)
                               : bootstrap_test_averaged(emb, n_boot, options.n_rep, pair_seed, options.bootstrap);
            r.layers = {k, l};
            out.p_values(static_cast<Index>(k), static_cast<Index>(l)) = r.p_value;
            out.p_values(static_cast<Index>(l), static_cast<Index>(k)) = r.p_value;
            if (r.p_value <= options.alpha) {
                ++out.rejections[k];
                ++out.rejections[l];
            }
            out.tests[k * layers + l] = r;
            out.tests[l * layers + k] = std::move(r);
        }
    }
    return out;
}

}  // namespace mplex
