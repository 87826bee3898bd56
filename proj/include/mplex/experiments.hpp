#ifndef MPLEX_EXPERIMENTS_HPP
#define MPLEX_EXPERIMENTS_HPP

#include "mplex/inference.hpp"
#include "mplex/samplers.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mplex {

// The two-community design of the simulation study: for k in 1..K, t in 1..T
//   B^{k,t} = [[0.25 + eps k, 0.1 + 0.1 sin(2 pi t / T)],
//              [0.1 + 0.1 sin(2 pi t / T), 0.25]]
// with static labels; for odd n the first community gets the extra node.
BlockModelSpec build_eq13_spec(double epsilon, std::size_t layers, std::size_t times, std::size_t n);

struct SimulationConfig {
    std::vector<std::size_t> n_list{50, 100, 200, 300};
    std::vector<double> epsilon_list{0.0, 0.005, 0.01, 0.02};
    std::size_t layers = 10;
    std::size_t times = 3;
    std::size_t groups = 2;
    Eigen::Index d = 2;
    std::size_t n_boot = 200;
    std::size_t monte_carlo = 200;
    double alpha = 0.05;
    std::uint64_t seed = 20240101;
    unsigned threads = 1;
    SvdOptions svd;

    // 1000 Monte Carlo replicates with 1000 bootstrap draws each.
    void use_paper_scale() {
        n_boot = 1000;
        monte_carlo = 1000;
    }
    void validate() const;
};

struct PowerCell {
    std::size_t n = 0;
    double epsilon = 0.0;
    std::size_t replicates = 0;
    std::size_t rejections = 0;
    double fraction = 0.0;
    double std_error = 0.0;  // sqrt(f (1 - f) / replicates)
    std::vector<double> p_values;
};

struct PowerTable {
    std::vector<std::size_t> n_list;
    std::vector<double> epsilon_list;
    std::vector<std::optional<PowerCell>> cells;  // row-major over (n, epsilon)

    const std::optional<PowerCell>& at(std::size_t i, std::size_t j) const {
        return cells[i * epsilon_list.size() + j];
    }
    // Cell by value; throws when the pair was not computed.
    const PowerCell& cell(std::size_t n, double epsilon) const;
};

// Seed root of the (n, epsilon) cell; independent of which other cells run.
SeedSpec cell_seed(std::uint64_t root, std::size_t n, double epsilon);

// Monte Carlo rejection fractions. Replicate r of a cell samples from
// cell_seed(...).child(monte_carlo, r) and rejects iff p <= alpha. `only`
// restricts the run to the listed cells; the others stay empty.
PowerTable power_table(const SimulationConfig& config,
                       const std::vector<std::pair<std::size_t, double>>& only = {});

// Wide layout: one row per n, fraction columns then standard-error columns.
void write_power_table_csv(std::ostream& out, const PowerTable& table);

struct NullCdf {
    std::size_t n = 0;
    std::vector<double> p_values;  // sorted ascending
    double ks_distance = 0.0;
};

// Kolmogorov-Smirnov distance between the empirical CDF and Uniform[0, 1].
double ks_uniform(std::vector<double> values);

// Null p-value samples per n (epsilon forced to 0). Uses the same cell seeds
// as the epsilon = 0 column of power_table.
std::vector<NullCdf> null_pvalue_cdf(const SimulationConfig& config);

// Writes pvalues_n<n>.csv (p, ecdf), ks.csv and a gnuplot script into dir.
void write_null_cdf(const std::filesystem::path& dir, const std::vector<NullCdf>& cdfs, std::size_t n_boot);

struct WorkflowOptions {
    std::size_t n_boot = 200;
    double alpha = 0.01;
    std::optional<Eigen::Index> d;  // unset: scree selection per test
    unsigned threads = 1;
    SvdOptions svd;
};

struct WorkflowReport {
    std::size_t conditions = 0;
    std::size_t replicates = 0;
    std::vector<TestResult> within;  // stage 1, one per condition
    std::optional<TestResult> global;
    std::optional<PairwiseResult> pairwise;
    std::string global_status;
    std::string pairwise_status;

    // Per-condition rejection counts of stage 3 (empty when skipped).
    const std::vector<std::size_t>& rejection_counts() const;
};

// Synthetic stand-in for a replicate study: condition c holds `replicates`
// single-layer graphs drawn from layer c+1 of the simulation design with
// epsilon = epsilons[c]. Replicate r of condition c draws from
// seed.child(workflow, 0).child(cell, c).child(monte_carlo, r).
std::vector<std::vector<MultiplexGraph>> planted_conditions(std::size_t n, const std::vector<double>& epsilons,
                                                            std::size_t replicates, std::size_t times,
                                                            const SeedSpec& seed);

// Three stages over replicate graphs grouped by condition. Every replicate is
// a single-layer graph and all conditions hold the same number of them.
//   1. per condition: replicates stacked as layers, plain bootstrap test
//   2. condition averages stacked as layers, averaged bootstrap with
//      n_rep = replicate count
//   3. pairwise averaged tests between conditions, rejections at alpha
// Stage s of the run draws from seed.child(workflow, s).
WorkflowReport replicate_workflow(const std::vector<std::vector<MultiplexGraph>>& conditions, const SeedSpec& seed,
                                  const WorkflowOptions& options = {});

}  // namespace mplex

#endif  // MPLEX_EXPERIMENTS_HPP
