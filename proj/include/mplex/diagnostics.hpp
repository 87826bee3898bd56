#ifndef MPLEX_DIAGNOSTICS_HPP
#define MPLEX_DIAGNOSTICS_HPP

#include "mplex/random.hpp"
#include "mplex/samplers.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace mplex {

// Q minimizing ||Xhat Q - X||_F, from the normal equations. Throws
// DegenerateInputError when Xhat is not of full column rank.
Matrix align_least_squares(const Matrix& xhat, const Matrix& x);

struct ConsistencyPoint {
    std::size_t n = 0;
    std::size_t seeds = 0;
    // sqrt(n / log n) * ||Xhat Q - X||_{2->inf} across seeds.
    double median = 0.0;
    double q05 = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double q95 = 0.0;
    // Median of ||Xhat Q - X||_F / sqrt(nK), reported next to the 2->inf error.
    double frobenius_median = 0.0;
    // Seed average of Xhat^T Xhat / n, which equals diag(S) / n.
    Vector gram;
    std::vector<double> errors;  // per seed, normalized 2->inf
};

struct ConsistencyCurve {
    std::vector<ConsistencyPoint> points;  // strictly increasing n
};

struct SweepOptions {
    // Embed the probability blocks themselves instead of a sampled graph.
    bool noise_free = false;
    unsigned threads = 1;
    SvdOptions svd;
};

using SpecFamily = std::function<BlockModelSpec(std::size_t n)>;

// For each n and seed: sample the model, embed at the true latent dimension,
// align to the true latents and record the normalized errors. Cell (n, s)
// draws from seed.child(sweep, n).with(observed, s).
ConsistencyCurve consistency_sweep(const SpecFamily& family, const std::vector<std::size_t>& n_list,
                                   std::size_t seeds, const SeedSpec& seed, const SweepOptions& options = {});

void write_consistency_csv(std::ostream& out, const ConsistencyCurve& curve);

// Linear-interpolation quantile (type 7) of unsorted values.
double quantile(std::vector<double> values, double q);

}  // namespace mplex

#endif  // MPLEX_DIAGNOSTICS_HPP
