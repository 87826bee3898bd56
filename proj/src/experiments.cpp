#include "mplex/experiments.hpp"

#include "mplex/error.hpp"
#include "mplex/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <string>

namespace mplex {

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

}  // namespace

BlockModelSpec build_eq13_spec(double epsilon, std::size_t layers, std::size_t times, std::size_t n) {
    if (layers == 0 || times == 0 || n == 0) throw ValidationError("K, T and n must be positive");
    if (!std::isfinite(epsilon)) throw DomainError("epsilon must be finite");
    BlockModelSpec spec;
    spec.groups_left = 2;
    spec.groups_right = 2;
    spec.layers = layers;
    spec.times = times;
    for (std::size_t k = 1; k <= layers; ++k) {
        const double within = 0.25 + epsilon * static_cast<double>(k);
        if (within < 0.0 || within > 1.0)
            throw DomainError("epsilon " + format_label(epsilon) + " puts B(1,1) of layer " + std::to_string(k) +
                              " at " + format_label(within) + ", outside [0, 1]");
        for (std::size_t t = 1; t <= times; ++t) {
            // t mod T keeps sin(2 pi) exactly zero.
            const double phase = 2.0 * std::numbers::pi * static_cast<double>(t % times) / static_cast<double>(times);
            const double across = 0.1 + 0.1 * std::sin(phase);
            Matrix b(2, 2);
            b << within, across, across, 0.25;
            spec.B.push_back(b);
        }
    }
    std::vector<int> labels(n);
    const std::size_t first = (n + 1) / 2;
    for (std::size_t i = 0; i < n; ++i) labels[i] = i < first ? 0 : 1;
    return spec.with_static_labels(labels, labels);
}

void SimulationConfig::validate() const {
    if (n_list.empty() || epsilon_list.empty()) throw ValidationError("n and epsilon lists must be non-empty");
    for (std::size_t n : n_list)
        if (n < 2) throw ValidationError("every n must be >= 2");
    if (layers == 0 || times == 0) throw ValidationError("K and T must be positive");
    if (groups != 2) throw ValidationError("the simulation design has exactly two communities");
    if (d < 1) throw ValidationError("d must be >= 1");
    if (n_boot == 0 || monte_carlo == 0) throw ValidationError("n_boot and Monte Carlo count must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    for (double eps : epsilon_list) {
        const double top = 0.25 + eps * static_cast<double>(layers);
        if (!std::isfinite(eps) || top > 1.0 || 0.25 + eps < 0.0)
            throw ValidationError("epsilon " + format_label(eps) + " leaves [0, 1] for K = " + std::to_string(layers));
    }
}

const PowerCell& PowerTable::cell(std::size_t n, double epsilon) const {
    for (std::size_t i = 0; i < n_list.size(); ++i)
        for (std::size_t j = 0; j < epsilon_list.size(); ++j)
            if (n_list[i] == n && epsilon_list[j] == epsilon && at(i, j)) return *at(i, j);
    throw ValidationError("cell (n=" + std::to_string(n) + ", eps=" + format_label(epsilon) + ") was not computed");
}

SeedSpec cell_seed(std::uint64_t root, std::size_t n, double epsilon) {
    if (epsilon == 0.0) epsilon = 0.0;  // -0 and +0 share a cell
    return SeedSpec{root}.child(Purpose::cell, n).child(Purpose::cell, std::bit_cast<std::uint64_t>(epsilon));
}

PowerTable power_table(const SimulationConfig& config, const std::vector<std::pair<std::size_t, double>>& only) {
    config.validate();
    PowerTable table;
    table.n_list = config.n_list;
    table.epsilon_list = config.epsilon_list;
    table.cells.resize(config.n_list.size() * config.epsilon_list.size());

    struct CellJob {
        std::size_t slot;
        std::size_t n;
        double epsilon;
        BlockModelSpec spec;
        SeedSpec seed;
    };
    std::vector<CellJob> jobs;
    for (std::size_t i = 0; i < config.n_list.size(); ++i) {
        for (std::size_t j = 0; j < config.epsilon_list.size(); ++j) {
            const std::size_t n = config.n_list[i];
            const double eps = config.epsilon_list[j];
            if (!only.empty() && std::find(only.begin(), only.end(), std::make_pair(n, eps)) == only.end()) continue;
            jobs.push_back({i * config.epsilon_list.size() + j, n, eps,
                            build_eq13_spec(eps, config.layers, config.times, n), cell_seed(config.seed, n, eps)});
        }
    }
    if (!only.empty() && jobs.size() != only.size())
        throw ValidationError("requested cells are not all on the configured grid");

    const std::size_t reps = config.monte_carlo;
    std::vector<double> p_values(jobs.size() * reps);
    BootstrapOptions boot;
    boot.svd = config.svd;
    parallel_for(p_values.size(), config.threads, [&](std::size_t idx) {
        const CellJob& job = jobs[idx / reps];
        const SeedSpec rep = job.seed.child(Purpose::monte_carlo, idx % reps);
        const MultiplexGraph graph = sample_dmpsbm(job.spec, job.n, rep);
        const DuaseEmbedding e = duase(graph, config.d, config.svd);
        p_values[idx] = bootstrap_test(e, config.n_boot, rep, boot).p_value;
    });

    for (std::size_t c = 0; c < jobs.size(); ++c) {
        PowerCell cell;
        cell.n = jobs[c].n;
        cell.epsilon = jobs[c].epsilon;
        cell.replicates = reps;
        cell.p_values.assign(p_values.begin() + static_cast<std::ptrdiff_t>(c * reps),
                             p_values.begin() + static_cast<std::ptrdiff_t>((c + 1) * reps));
        for (double p : cell.p_values)
            if (p <= config.alpha) ++cell.rejections;
        cell.fraction = static_cast<double>(cell.rejections) / static_cast<double>(reps);
        cell.std_error = std::sqrt(cell.fraction * (1.0 - cell.fraction) / static_cast<double>(reps));
        table.cells[jobs[c].slot] = std::move(cell);
    }
    return table;
}

void write_power_table_csv(std::ostream& out, const PowerTable& table) {
    out << "n";
    for (double eps : table.epsilon_list) out << ",eps_" << format_label(eps);
    for (double eps : table.epsilon_list) out << ",se_eps_" << format_label(eps);
    out << '\n';
    for (std::size_t i = 0; i < table.n_list.size(); ++i) {
        out << table.n_list[i];
        for (std::size_t j = 0; j < table.epsilon_list.size(); ++j) {
            out << ',';
            if (const auto& c = table.at(i, j)) out << format_number(c->fraction);
        }
        for (std::size_t j = 0; j < table.epsilon_list.size(); ++j) {
            out << ',';
            if (const auto& c = table.at(i, j)) out << format_number(c->std_error);
        }
        out << '\n';
    }
}

double ks_uniform(std::vector<double> values) {
    if (values.empty()) throw ValidationError("KS distance of an empty sample");
    std::sort(values.begin(), values.end());
    const double m = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double u = std::clamp(values[i], 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / m - u, u - static_cast<double>(i) / m});
    }
    return d;
}

std::vector<NullCdf> null_pvalue_cdf(const SimulationConfig& config) {
    SimulationConfig null_config = config;
    null_config.epsilon_list = {0.0};
    const PowerTable table = power_table(null_config);
    std::vector<NullCdf> out;
    for (std::size_t i = 0; i < table.n_list.size(); ++i) {
        NullCdf cdf;
        cdf.n = table.n_list[i];
        cdf.p_values = table.at(i, 0)->p_values;
        std::sort(cdf.p_values.begin(), cdf.p_values.end());
        cdf.ks_distance = ks_uniform(cdf.p_values);
        out.push_back(std::move(cdf));
    }
    return out;
}

void write_null_cdf(const std::filesystem::path& dir, const std::vector<NullCdf>& cdfs, std::size_t n_boot) {
    std::filesystem::create_directories(dir);
    std::ofstream ks = open_output(dir / "ks.csv");
    ks << "n,replicates,n_boot,ks_distance\n";
    std::ofstream plot = open_output(dir / "cdf.gp");
    plot << "set datafile separator ','\nset key bottom right\nset xlabel 'p-value'\nset ylabel 'CDF'\n"
            "set xrange [0:1]\nset yrange [0:1]\nplot x title 'Uniform' with lines dashtype 2";
    for (const NullCdf& c : cdfs) {
        const std::string name = "pvalues_n" + std::to_string(c.n) + ".csv";
        std::ofstream out = open_output(dir / name);
        out << "p,ecdf\n";
        const double m = static_cast<double>(c.p_values.size());
        for (std::size_t i = 0; i < c.p_values.size(); ++i)
            out << format_number(c.p_values[i]) << ',' << format_number(static_cast<double>(i + 1) / m) << '\n';
        ks << c.n << ',' << c.p_values.size() << ',' << n_boot << ',' << format_number(c.ks_distance) << '\n';
        plot << ", \\\n     '" << name << "' using 1:2 title 'n = " << c.n << "' with steps";
    }
    plot << '\n';
}

std::vector<std::vector<MultiplexGraph>> planted_conditions(std::size_t n, const std::vector<double>& epsilons,
                                                            std::size_t replicates, std::size_t times,
                                                            const SeedSpec& seed) {
    if (epsilons.empty() || replicates == 0) throw ValidationError("need at least one condition and replicate");
    std::vector<std::vector<MultiplexGraph>> out;
    const SeedSpec base = seed.child(Purpose::workflow, 0);
    for (std::size_t c = 0; c < epsilons.size(); ++c) {
        const BlockModelSpec full = build_eq13_spec(epsilons[c], c + 1, times, n);
        BlockModelSpec one = full;
        one.layers = 1;
        one.B.assign(full.B.begin() + static_cast<std::ptrdiff_t>(c * times), full.B.end());
        one.z.resize(1);
        std::vector<MultiplexGraph> group;
        for (std::size_t r = 0; r < replicates; ++r)
            group.push_back(sample_dmpsbm(one, n, base.child(Purpose::cell, c).child(Purpose::monte_carlo, r)));
        out.push_back(std::move(group));
    }
    return out;
}

const std::vector<std::size_t>& WorkflowReport::rejection_counts() const {
    static const std::vector<std::size_t> none;
    return pairwise ? pairwise->rejections : none;
}

WorkflowReport replicate_workflow(const std::vector<std::vector<MultiplexGraph>>& conditions, const SeedSpec& seed,
                                  const WorkflowOptions& options) {
    if (conditions.empty()) throw ValidationError("workflow needs at least one condition");
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    const std::size_t reps = conditions.front().size();
    if (reps < 2) throw ValidationError("each condition needs at least two replicates");
    const Geometry& ref = conditions.front().front().geometry();
    for (std::size_t c = 0; c < conditions.size(); ++c) {
        if (conditions[c].size() != reps)
            throw StructuralError("condition " + std::to_string(c + 1) + " has " +
                                  std::to_string(conditions[c].size()) + " replicates, expected " +
                                  std::to_string(reps));
        for (std::size_t r = 0; r < reps; ++r) {
            const Geometry& g = conditions[c][r].geometry();
            if (g.layers != 1)
                throw StructuralError("replicate " + std::to_string(r + 1) + " of condition " +
                                      std::to_string(c + 1) + " has " + std::to_string(g.layers) +
                                      " layers; replicates must be single-layer");
            if (g.n != ref.n || g.times != ref.times)
                throw StructuralError("replicate " + std::to_string(r + 1) + " of condition " +
                                      std::to_string(c + 1) + " does not share the geometry of the first replicate");
        }
    }

    BootstrapOptions boot;
    boot.threads = options.threads;
    boot.svd = options.svd;
    auto dimension = [&](const MultiplexGraph& g) { return options.d ? *options.d : select_dimension(g); };

    WorkflowReport report;
    report.conditions = conditions.size();
    report.replicates = reps;

    const SeedSpec within_seed = seed.child(Purpose::workflow, 1);
    for (std::size_t c = 0; c < conditions.size(); ++c) {
        const MultiplexGraph stacked = stack_layers(conditions[c]);
        const DuaseEmbedding e = duase(stacked, dimension(stacked), options.svd);
        report.within.push_back(bootstrap_test(e, options.n_boot, within_seed.child(Purpose::workflow, c), boot));
    }

    if (conditions.size() < 2) {
        report.global_status = "skipped: a single condition leaves nothing to compare";
        report.pairwise_status = report.global_status;
        return report;
    }

    std::vector<MultiplexGraph> averages;
    for (const auto& group : conditions) averages.push_back(average_replicates(group));
    const MultiplexGraph combined = stack_layers(averages);
    const int n_rep = static_cast<int>(reps);
    const DuaseEmbedding e = duase(combined, dimension(combined), options.svd);
    report.global = bootstrap_test_averaged(e, options.n_boot, n_rep, seed.child(Purpose::workflow, 2), boot);
    report.global_status = "done";

    PairwiseOptions pairwise;
    pairwise.d = options.d;
    pairwise.alpha = options.alpha;
    pairwise.variant = BootstrapVariant::averaged;
    pairwise.n_rep = n_rep;
    pairwise.bootstrap = boot;
    report.pairwise = pairwise_tests(combined, options.n_boot, seed.child(Purpose::workflow, 3), pairwise);
    report.pairwise_status = "done";
    return report;
}

}  // namespace mplex
