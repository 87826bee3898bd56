#ifndef MPLEX_SAMPLERS_HPP
#define MPLEX_SAMPLERS_HPP

#include "mplex/graph.hpp"
#include "mplex/linalg.hpp"
#include "mplex/random.hpp"

#include <functional>
#include <vector>

namespace mplex {

// Left latent positions X (nK x d, layer blocks stacked) and right latent
// positions Y (nT x d, time blocks stacked).
struct LatentPair {
    Matrix X;
    Matrix Y;
    Geometry geometry;

    Eigen::Index dimension() const noexcept { return X.cols(); }
    auto layer(std::size_t k) const {
        const auto n = static_cast<Eigen::Index>(geometry.n);
        return X.middleRows(static_cast<Eigen::Index>(k) * n, n);
    }
    auto time(std::size_t t) const {
        const auto n = static_cast<Eigen::Index>(geometry.n);
        return Y.middleRows(static_cast<Eigen::Index>(t) * n, n);
    }
    // P^{k,t} = X^k Y^{t T}.
    Matrix probabilities(std::size_t k, std::size_t t) const;
    // Shapes consistent, and every inner product within [0, 1] up to `slack`.
    void validate(double slack = 1e-12) const;
};

// Dynamic multiplex stochastic blockmodel. Labels are zero-based.
struct BlockModelSpec {
    std::size_t groups_left = 0;   // G1
    std::size_t groups_right = 0;  // G2
    std::size_t layers = 0;        // K
    std::size_t times = 0;         // T
    std::vector<Matrix> B;         // G1 x G2, index k * T + t
    std::vector<std::vector<int>> z;        // K rows of n layer-community labels
    std::vector<std::vector<int>> upsilon;  // T rows of n time-community labels

    std::size_t n() const noexcept { return z.empty() ? 0 : z.front().size(); }
    const Matrix& b(std::size_t k, std::size_t t) const { return B[k * times + t]; }
    // Probability matrix of block (k, t): entries B^{k,t}[z^k_i, upsilon^t_j].
    Matrix probabilities(std::size_t k, std::size_t t) const;
    void validate() const;
    // Copy with every layer and time sharing the given node labels.
    BlockModelSpec with_static_labels(const std::vector<int>& layer_labels,
                                      const std::vector<int>& time_labels) const;
};

// Source of the n x n probability matrix for block (k, t). Values outside
// [0, 1] are clamped by the sampler.
using ProbabilitySource = std::function<const Matrix&(std::size_t k, std::size_t t)>;

// Draws every entry of every block as the mean of `replicates` Bernoulli
// draws and returns the nK x nT unfolding in sparse form. Block (k, t)
// consumes stream seed.stream(k, t): entry (i, j), draw r uses word
// (i n + j) * replicates + r. With `hollow` the diagonal draws are still
// consumed but stored as zero.
CsrMatrix sample_unfolded(const ProbabilitySource& probabilities, const Geometry& geometry,
                          const SeedSpec& seed, int replicates = 1, bool hollow = true);

// Hollow: only i != j is drawn.
MultiplexGraph sample_dmprdpg(const LatentPair& latents, const SeedSpec& seed);

// Realizes the blockmodel as latent positions by factorizing the
// (K G1) x (T G2) block-probability unfolding at its numerical rank.
LatentPair sbm_to_latents(const BlockModelSpec& spec);

// Labels in `spec` must cover exactly n nodes. Unlike sample_dmprdpg, the
// diagonal is drawn too.
MultiplexGraph sample_dmpsbm(const BlockModelSpec& spec, std::size_t n, const SeedSpec& seed);

}  // namespace mplex

#endif  // MPLEX_SAMPLERS_HPP
