#include "mplex/cli.hpp"

#include "mplex/diagnostics.hpp"
#include "mplex/error.hpp"
#include "mplex/experiments.hpp"
#include "mplex/io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace mplex {

namespace fs = std::filesystem;

namespace {

using Index = Eigen::Index;

struct Common {
    fs::path out;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string backend = "auto";
};

struct GraphInput {
    fs::path path;
    std::string format = "auto";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out, "Output directory")->required();
    sub->add_option("--seed", c.seed, "Root seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
    sub->add_option("--backend", c.backend, "SVD backend")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "dense", "randomized"}));
}

void add_input(CLI::App* sub, GraphInput& in) {
    sub->add_option("--input", in.path, "Graph file or directory")->required();
    sub->add_option("--format", in.format, "Input format")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "edge-list-dir", "dense-csv-dir", "container"}));
}

SvdOptions svd_options(const Common& c) {
    SvdOptions o;
    if (c.backend == "dense") o.backend = SvdBackend::dense;
    if (c.backend == "randomized") o.backend = SvdBackend::randomized;
    return o;
}

// A directory is an edge list when its first block file starts with the
// edge-list header; a regular file is a container.
GraphFormat detect_format(const fs::path& path) {
    if (fs::is_regular_file(path)) return GraphFormat::container;
    if (!fs::is_directory(path)) throw ValidationError("input " + path.string() + " does not exist");
    std::ifstream in(path / block_file_name(0, 0));
    std::string first;
    std::getline(in, first);
    return first.rfind("source", 0) == 0 ? GraphFormat::edge_list_dir : GraphFormat::dense_csv_dir;
}

MultiplexGraph load_graph(const GraphInput& in) {
    const GraphFormat f = in.format == "auto" ? detect_format(in.path) : parse_graph_format(in.format);
    return ingest(in.path, f);
}

// "auto" or a positive integer.
std::optional<Index> parse_dimension(const std::string& s) {
    if (s == "auto") return std::nullopt;
    Index d = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec != std::errc() || ptr != s.data() + s.size() || d < 1)
        throw ValidationError("--d must be 'auto' or a positive integer, got '" + s + "'");
    return d;
}

std::string fixed(double v, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

// Numbered children "<prefix><i>" of dir, in numeric order.
std::vector<fs::path> numbered_entries(const fs::path& dir, const std::string& prefix) {
    std::map<std::size_t, fs::path> found;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::string name = e.path().filename().string();
        if (name.rfind(prefix, 0) != 0) continue;
        std::string tail = name.substr(prefix.size());
        if (const auto dot = tail.find('.'); dot != std::string::npos) tail.resize(dot);
        std::size_t i = 0;
        const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), i);
        if (ec != std::errc() || ptr != tail.data() + tail.size()) continue;
        if (!found.emplace(i, e.path()).second)
            throw ValidationError("duplicate entry " + prefix + std::to_string(i) + " in " + dir.string());
    }
    std::vector<fs::path> out;
    for (auto& [i, p] : found) out.push_back(p);
    return out;
}

std::vector<std::size_t> parse_size_list(const std::vector<std::size_t>& v, const char* what) {
    if (v.empty()) throw ValidationError(std::string(what) + " must not be empty");
    return v;
}

BlockModelSpec read_spec_json(const fs::path& path) {
    const Json j = read_json(path);
    static const std::vector<std::string> keys{"groups_left", "groups_right", "layers", "times", "B", "z", "upsilon"};
    for (const auto& [key, value] : j.items())
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ValidationError(path.string() + ": unknown key '" + key + "'");
    BlockModelSpec s;
    try {
        s.groups_left = j.at("groups_left").get<std::size_t>();
        s.groups_right = j.at("groups_right").get<std::size_t>();
        s.layers = j.at("layers").get<std::size_t>();
        s.times = j.at("times").get<std::size_t>();
        for (const auto& b : j.at("B")) {
            const auto rows = b.get<std::vector<std::vector<double>>>();
            Matrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows[0].size()));
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (static_cast<Index>(rows[r].size()) != m.cols())
                    throw ValidationError(path.string() + ": ragged B matrix");
                for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
            }
            s.B.push_back(std::move(m));
        }
        // Labels are 1-based in the file.
        auto labels = [&](const char* key) {
            auto v = j.at(key).get<std::vector<std::vector<int>>>();
            for (auto& row : v)
                for (int& x : row) --x;
            return v;
        };
        s.z = labels("z");
        s.upsilon = labels("upsilon");
    } catch (const Json::exception& ex) {
        throw ValidationError(path.string() + ": " + ex.what());
    }
    s.validate();
    return s;
}

Matrix read_plain_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(field, &used));
                if (field.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ParseError(path.string(), number, "not a number: '" + field + "'");
            }
        }
        if (!rows.empty() && row.size() != rows[0].size()) throw ParseError(path.string(), number, "ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path.string(), number, "empty matrix");
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return m;
}

LatentPair read_latents(const fs::path& dir) {
    const Json j = read_json(dir / "manifest.json");
    LatentPair l;
    try {
        l.geometry = {j.at("n").get<std::size_t>(), j.at("layers").get<std::size_t>(), j.at("times").get<std::size_t>()};
    } catch (const Json::exception& ex) {
        throw ValidationError((dir / "manifest.json").string() + ": " + ex.what());
    }
    l.X = read_plain_csv(dir / "x.csv");
    l.Y = read_plain_csv(dir / "y.csv");
    return l;
}

class Runner {
public:
    Runner(std::vector<std::string> args, std::ostream& out) : args_(std::move(args)), out_(out) {}

    int run();

private:
    void finish(const std::string& name, CLI::App* sub, const Common& common, const Json& extra = {});

    std::vector<std::string> args_;
    std::ostream& out_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void Runner::finish(const std::string& name, CLI::App* sub, const Common& common, const Json& extra) {
    Json config;
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames()[0] == "help") continue;
        const std::string key = opt->get_lnames()[0];
        if (opt->count() == 0) {
            config[key] = opt->get_default_str();
        } else if (opt->get_expected_max() > 1) {
            config[key] = opt->results();
        } else {
            config[key] = opt->results().empty() ? std::string() : opt->results().back();
        }
    }
    Json run;
    run["tool"] = "mplex";
    run["version"] = kVersion;
    run["subcommand"] = name;
    run["argv"] = args_;
    run["cwd"] = fs::current_path().string();
    run["seed"] = common.seed;
    run["config"] = std::move(config);
    Json versions;
    versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    versions["cli11"] = CLI11_VERSION;
    versions["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    run["versions"] = std::move(versions);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    run["timing"] = {{"finished_utc", stamp}, {"wall_seconds", seconds}};
    if (!extra.is_null()) run["summary"] = extra;
    write_json(common.out / "run.json", run);
}

int Runner::run() {
    CLI::App app{"Layer-difference testing for dynamic multiplex graphs", "mplex"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough(false);

    // simulate
    Common sim_c;
    std::string model = "eq13";
    std::size_t sim_n = 100, sim_layers = 10, sim_times = 3, sim_reps = 1;
    double sim_eps = 0.0;
    fs::path spec_path, latents_path;
    std::string sim_format = "container";
    auto* sim = app.add_subcommand("simulate", "Sample graphs from a block model or latent positions");
    add_common(sim, sim_c);
    sim->add_option("--model", model, "eq13, sbm (--spec) or rdpg (--latents)")
        ->capture_default_str()
        ->check(CLI::IsMember({"eq13", "sbm", "rdpg"}));
    sim->add_option("--n", sim_n, "Nodes (eq13)")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--layers", sim_layers, "Layers K (eq13)")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--times", sim_times, "Times T (eq13)")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--epsilon", sim_eps, "Layer effect (eq13)")->capture_default_str();
    sim->add_option("--spec", spec_path, "Block model JSON (sbm)");
    sim->add_option("--latents", latents_path, "Directory with manifest.json, x.csv, y.csv (rdpg)");
    sim->add_option("--replicates", sim_reps, "Independent graphs to draw")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--output-format", sim_format, "Graph format written")
        ->capture_default_str()
        ->check(CLI::IsMember({"edge-list-dir", "dense-csv-dir", "container"}));

    // embed
    Common emb_c;
    GraphInput emb_in;
    std::string emb_d = "auto";
    std::optional<Index> emb_max_d;
    int emb_elbows = kDefaultElbows;
    auto* emb = app.add_subcommand("embed", "DUASE embedding with optional dimension selection");
    add_common(emb, emb_c);
    add_input(emb, emb_in);
    emb->add_option("--d", emb_d, "Dimension or 'auto'")->capture_default_str();
    emb->add_option("--max-d", emb_max_d, "Singular values inspected by 'auto'");
    emb->add_option("--elbows", emb_elbows, "Elbow taken by 'auto'")->capture_default_str()->check(CLI::PositiveNumber);

    // test / test-averaged
    Common test_c;
    GraphInput test_in;
    std::string test_d = "auto";
    std::size_t test_boot = 200;
    double test_alpha = 0.05;
    int test_rep = 1;
    auto* test = app.add_subcommand("test", "Plug-in bootstrap test for layer differences");
    auto* avg = app.add_subcommand("test-averaged", "Bootstrap test for graphs averaged over replicates");
    for (auto* s : {test, avg}) {
        add_common(s, test_c);
        add_input(s, test_in);
        s->add_option("--d", test_d, "Dimension or 'auto'")->capture_default_str();
        s->add_option("--n-boot", test_boot, "Bootstrap replicates")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_option("--alpha", test_alpha, "Level used for the reject flag")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    }
    avg->add_option("--n-rep", test_rep, "Replicates averaged per block")->required()->check(CLI::PositiveNumber);

    // pairwise
    Common pw_c;
    GraphInput pw_in;
    std::string pw_d = "auto", pw_variant = "plain";
    std::size_t pw_boot = 200;
    double pw_alpha = 0.01;
    int pw_rep = 1;
    auto* pw = app.add_subcommand("pairwise", "All pairwise layer tests");
    add_common(pw, pw_c);
    add_input(pw, pw_in);
    pw->add_option("--d", pw_d, "Dimension or 'auto' (per pair)")->capture_default_str();
    pw->add_option("--n-boot", pw_boot, "Bootstrap replicates")->capture_default_str()->check(CLI::PositiveNumber);
    pw->add_option("--alpha", pw_alpha, "Rejection level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    pw->add_option("--variant", pw_variant, "plain or averaged")
        ->capture_default_str()
        ->check(CLI::IsMember({"plain", "averaged"}));
    pw->add_option("--n-rep", pw_rep, "Replicates averaged per block")->capture_default_str()->check(CLI::PositiveNumber);

    // reproduce-table1 / null-cdf
    Common tab_c;
    SimulationConfig tab;
    bool paper_scale = false;
    auto* t1 = app.add_subcommand("reproduce-table1", "Monte Carlo rejection fractions of the simulation study");
    auto* cdf = app.add_subcommand("null-cdf", "Null p-value distributions per n");
    for (auto* s : {t1, cdf}) {
        add_common(s, tab_c);
        s->add_option("--n-list", tab.n_list, "Node counts")->capture_default_str()->delimiter(',');
        s->add_option("--mc", tab.monte_carlo, "Monte Carlo replicates per cell")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_option("--n-boot", tab.n_boot, "Bootstrap replicates")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_option("--alpha", tab.alpha, "Rejection level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
        s->add_option("--layers", tab.layers, "Layers K")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_option("--times", tab.times, "Times T")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_option("--d", tab.d, "Embedding dimension")->capture_default_str()->check(CLI::PositiveNumber);
        s->add_flag("--paper-scale", paper_scale, "1000 replicates x 1000 bootstrap draws");
    }
    t1->add_option("--eps-list", tab.epsilon_list, "Layer effects")->capture_default_str()->delimiter(',');

    // consistency-sweep
    Common cs_c;
    std::vector<std::size_t> cs_n{50, 100, 200, 400};
    std::size_t cs_seeds = 20, cs_layers = 10, cs_times = 3;
    double cs_eps = 0.0;
    bool cs_noise_free = false;
    auto* cs = app.add_subcommand("consistency-sweep", "Aligned two-to-infinity errors across n");
    add_common(cs, cs_c);
    cs->add_option("--n-list", cs_n, "Node counts")->capture_default_str()->delimiter(',');
    cs->add_option("--seeds", cs_seeds, "Graphs per n")->capture_default_str()->check(CLI::PositiveNumber);
    cs->add_option("--epsilon", cs_eps, "Layer effect")->capture_default_str();
    cs->add_option("--layers", cs_layers, "Layers K")->capture_default_str()->check(CLI::PositiveNumber);
    cs->add_option("--times", cs_times, "Times T")->capture_default_str()->check(CLI::PositiveNumber);
    cs->add_flag("--noise-free", cs_noise_free, "Embed the probability blocks");

    // replicate-workflow
    Common wf_c;
    fs::path wf_input;
    std::string wf_format = "auto", wf_d = "auto";
    bool wf_synthetic = false;
    std::size_t wf_n = 100, wf_reps = 5, wf_times = 3, wf_boot = 200;
    std::vector<double> wf_eps{0.0, 0.0, 0.05};
    double wf_alpha = 0.01;
    auto* wf = app.add_subcommand("replicate-workflow", "Within-condition, global and pairwise tests over replicates");
    add_common(wf, wf_c);
    wf->add_option("--input", wf_input, "Directory of condition-<c>/replicate-<r> graphs");
    wf->add_option("--format", wf_format, "Replicate graph format")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "edge-list-dir", "dense-csv-dir", "container"}));
    wf->add_flag("--synthetic", wf_synthetic, "Use the planted-difference stand-in instead of --input");
    wf->add_option("--n", wf_n, "Nodes (synthetic)")->capture_default_str()->check(CLI::PositiveNumber);
    wf->add_option("--replicates", wf_reps, "Replicates per condition (synthetic)")->capture_default_str()->check(CLI::PositiveNumber);
    wf->add_option("--times", wf_times, "Times T (synthetic)")->capture_default_str()->check(CLI::PositiveNumber);
    wf->add_option("--condition-eps", wf_eps, "Per-condition layer effect (synthetic)")->capture_default_str()->delimiter(',');
    wf->add_option("--d", wf_d, "Dimension or 'auto'")->capture_default_str();
    wf->add_option("--n-boot", wf_boot, "Bootstrap replicates")->capture_default_str()->check(CLI::PositiveNumber);
    wf->add_option("--alpha", wf_alpha, "Rejection level")->capture_default_str()->check(CLI::Range(0.0, 1.0));

    // replay
    fs::path replay_path;
    fs::path replay_out;
    auto* rp = app.add_subcommand("replay", "Re-run the command recorded in a run.json");
    rp->add_option("manifest", replay_path, "run.json to replay")->required()->check(CLI::ExistingFile);
    rp->add_option("--out", replay_out, "Output directory (default: the recorded one)");

    std::vector<std::string> reversed(args_.rbegin(), args_.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out_ << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out_ << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out_ << kVersion << '\n';
        return exit_ok;
    }

    if (rp->parsed()) {
        const Json j = read_json(replay_path);
        std::vector<std::string> args;
        try {
            args = j.at("argv").get<std::vector<std::string>>();
        } catch (const Json::exception& ex) {
            throw ValidationError(replay_path.string() + ": " + ex.what());
        }
        if (!args.empty() && args.front() == "replay") throw ValidationError("a replay manifest cannot replay itself");
        // Recorded paths are relative to the recorded working directory.
        if (!replay_out.empty()) replay_out = fs::absolute(replay_out);
        const fs::path here = fs::current_path();
        if (j.contains("cwd") && j["cwd"].is_string() && fs::is_directory(j["cwd"].get<std::string>()))
            fs::current_path(j["cwd"].get<std::string>());
        struct Restore {
            fs::path dir;
            ~Restore() { std::error_code ec; fs::current_path(dir, ec); }
        } restore{here};
        if (!replay_out.empty()) {
            std::vector<std::string> rewritten;
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (args[i] == "--out" && i + 1 < args.size()) {
                    ++i;
                    continue;
                }
                if (args[i].rfind("--out=", 0) == 0) continue;
                rewritten.push_back(args[i]);
            }
            rewritten.push_back("--out");
            rewritten.push_back(replay_out.string());
            args = std::move(rewritten);
        }
        return Runner(args, out_).run();
    }

    if (sim->parsed()) {
        fs::create_directories(sim_c.out);
        const GraphFormat f = parse_graph_format(sim_format);
        std::function<MultiplexGraph(const SeedSpec&)> draw;
        if (model == "eq13") {
            const BlockModelSpec spec = build_eq13_spec(sim_eps, sim_layers, sim_times, sim_n);
            draw = [spec, sim_n](const SeedSpec& s) { return sample_dmpsbm(spec, sim_n, s); };
        } else if (model == "sbm") {
            if (spec_path.empty()) throw ValidationError("--model sbm needs --spec");
            const BlockModelSpec spec = read_spec_json(spec_path);
            draw = [spec](const SeedSpec& s) { return sample_dmpsbm(spec, spec.n(), s); };
        } else {
            if (latents_path.empty()) throw ValidationError("--model rdpg needs --latents");
            const LatentPair latents = read_latents(latents_path);
            latents.validate();
            draw = [latents](const SeedSpec& s) { return sample_dmprdpg(latents, s); };
        }
        const std::string ext = f == GraphFormat::container ? ".bin" : "";
        Json files = Json::array();
        for (std::size_t r = 0; r < sim_reps; ++r) {
            const SeedSpec s = SeedSpec{sim_c.seed}.child(Purpose::monte_carlo, r);
            const std::string name = (sim_reps == 1 ? std::string("graph") : "replicate-" + std::to_string(r + 1)) + ext;
            export_graph(draw(s), sim_c.out / name, f);
            files.push_back(name);
        }
        out_ << "wrote " << sim_reps << " graph(s) to " << sim_c.out.string() << '\n';
        finish("simulate", sim, sim_c, {{"files", files}});
        return exit_ok;
    }

    if (emb->parsed()) {
        const std::optional<Index> fixed_d = parse_dimension(emb_d);
        const MultiplexGraph g = load_graph(emb_in);
        fs::create_directories(emb_c.out);
        const Index d = fixed_d ? *fixed_d : select_dimension(g, emb_max_d, emb_elbows);
        const DuaseEmbedding e = duase(g, d, svd_options(emb_c));
        write_embedding(emb_c.out, e);
        out_ << "d = " << d << (fixed_d ? "" : " (selected)") << '\n';
        finish("embed", emb, emb_c, {{"d", d}, {"selected", !fixed_d.has_value()}});
        return exit_ok;
    }

    if (test->parsed() || avg->parsed()) {
        const bool averaged = avg->parsed();
        const std::optional<Index> fixed_d = parse_dimension(test_d);
        const MultiplexGraph g = load_graph(test_in);
        if (g.layers() < 2) throw ValidationError("the test needs a graph with at least 2 layers");
        fs::create_directories(test_c.out);
        const Index d = fixed_d ? *fixed_d : select_dimension(g);
        const DuaseEmbedding e = duase(g, d, svd_options(test_c));
        BootstrapOptions bo;
        bo.threads = test_c.threads;
        bo.svd = svd_options(test_c);
        const SeedSpec seed{test_c.seed};
        const TestResult r = averaged ? bootstrap_test_averaged(e, test_boot, test_rep, seed, bo)
                                      : bootstrap_test(e, test_boot, seed, bo);
        Json j = to_json(r);
        j["alpha"] = test_alpha;
        j["reject"] = r.p_value <= test_alpha;
        write_json(test_c.out / "result.json", j);
        out_ << "psi = " << fixed(r.psi_obs) << "  p = " << fixed(r.p_value) << "  d = " << d << '\n';
        finish(averaged ? "test-averaged" : "test", averaged ? avg : test, test_c,
               {{"psi_obs", r.psi_obs}, {"p_value", r.p_value}, {"d", d}});
        return exit_ok;
    }

    if (pw->parsed()) {
        PairwiseOptions po;
        po.d = parse_dimension(pw_d);
        po.alpha = pw_alpha;
        po.variant = pw_variant == "plain" ? BootstrapVariant::plain : BootstrapVariant::averaged;
        po.n_rep = pw_rep;
        po.bootstrap.threads = pw_c.threads;
        po.bootstrap.svd = svd_options(pw_c);
        const MultiplexGraph g = load_graph(pw_in);
        fs::create_directories(pw_c.out);
        const PairwiseResult r = pairwise_tests(g, pw_boot, SeedSpec{pw_c.seed}, po);
        write_json(pw_c.out / "pairwise.json", to_json(r));
        std::ostringstream pv, rej;
        rej << "layer,rejections\n";
        for (std::size_t k = 0; k < r.layers; ++k) {
            for (std::size_t l = 0; l < r.layers; ++l) {
                if (l > 0) pv << ',';
                if (k != l) pv << format_double(r.p_values(static_cast<Index>(k), static_cast<Index>(l)));
            }
            pv << '\n';
            rej << k + 1 << ',' << r.rejections[k] << '\n';
        }
        write_text(pw_c.out / "pvalues.csv", pv.str());
        write_text(pw_c.out / "rejections.csv", rej.str());
        out_ << "tested " << r.layers * (r.layers - 1) / 2 << " pairs\n";
        finish("pairwise", pw, pw_c, {{"rejections", r.rejections}});
        return exit_ok;
    }

    if (t1->parsed() || cdf->parsed()) {
        if (paper_scale) tab.use_paper_scale();
        tab.seed = tab_c.seed;
        tab.threads = tab_c.threads;
        tab.svd = svd_options(tab_c);
        if (cdf->parsed()) tab.epsilon_list = {0.0};
        tab.validate();
        fs::create_directories(tab_c.out);
        if (t1->parsed()) {
            const PowerTable table = power_table(tab);
            std::ostringstream csv;
            write_power_table_csv(csv, table);
            write_text(tab_c.out / "table1.csv", csv.str());
            write_json(tab_c.out / "table1.json", to_json(table));
            out_ << csv.str();
            finish("reproduce-table1", t1, tab_c);
        } else {
            const auto cdfs = null_pvalue_cdf(tab);
            write_null_cdf(tab_c.out, cdfs, tab.n_boot);
            Json ks = Json::array();
            for (const auto& c : cdfs) {
                out_ << "n = " << c.n << "  KS = " << fixed(c.ks_distance) << '\n';
                ks.push_back({{"n", c.n}, {"ks_distance", c.ks_distance}});
            }
            finish("null-cdf", cdf, tab_c, {{"ks", ks}});
        }
        return exit_ok;
    }

    if (cs->parsed()) {
        parse_size_list(cs_n, "--n-list");
        SweepOptions so;
        so.noise_free = cs_noise_free;
        so.threads = cs_c.threads;
        so.svd = svd_options(cs_c);
        const SpecFamily family = [&](std::size_t n) { return build_eq13_spec(cs_eps, cs_layers, cs_times, n); };
        family(cs_n.front());  // validates epsilon before any work
        fs::create_directories(cs_c.out);
        const ConsistencyCurve curve = consistency_sweep(family, cs_n, cs_seeds, SeedSpec{cs_c.seed}, so);
        std::ostringstream csv;
        write_consistency_csv(csv, curve);
        write_text(cs_c.out / "consistency.csv", csv.str());
        write_json(cs_c.out / "consistency.json", to_json(curve));
        out_ << csv.str();
        finish("consistency-sweep", cs, cs_c);
        return exit_ok;
    }

    if (wf->parsed()) {
        if (wf_synthetic == !wf_input.empty()) throw ValidationError("give exactly one of --input and --synthetic");
        WorkflowOptions wo;
        wo.n_boot = wf_boot;
        wo.alpha = wf_alpha;
        wo.d = parse_dimension(wf_d);
        wo.threads = wf_c.threads;
        wo.svd = svd_options(wf_c);
        std::vector<std::vector<MultiplexGraph>> conditions;
        if (wf_synthetic) {
            conditions = planted_conditions(wf_n, wf_eps, wf_reps, wf_times, SeedSpec{wf_c.seed});
        } else {
            if (!fs::is_directory(wf_input)) throw ValidationError("--input must be a directory");
            for (const fs::path& c : numbered_entries(wf_input, "condition-")) {
                std::vector<MultiplexGraph> group;
                for (const fs::path& r : numbered_entries(c, "replicate-")) group.push_back(load_graph({r, wf_format}));
                conditions.push_back(std::move(group));
            }
            if (conditions.empty()) throw ValidationError("no condition-<c> directories in " + wf_input.string());
        }
        fs::create_directories(wf_c.out);
        const WorkflowReport report = replicate_workflow(conditions, SeedSpec{wf_c.seed}, wo);
        write_json(wf_c.out / "workflow.json", to_json(report));
        std::ostringstream bars;
        bars << "condition,rejections\n";
        for (std::size_t c = 0; c < report.rejection_counts().size(); ++c)
            bars << c + 1 << ',' << report.rejection_counts()[c] << '\n';
        write_text(wf_c.out / "rejections.csv", bars.str());
        for (std::size_t c = 0; c < report.within.size(); ++c)
            out_ << "condition " << c + 1 << ": within p = " << fixed(report.within[c].p_value) << '\n';
        out_ << "global: " << (report.global ? "p = " + fixed(report.global->p_value) : report.global_status) << '\n';
        finish("replicate-workflow", wf, wf_c, {{"rejection_counts", report.rejection_counts()}});
        return exit_ok;
    }
    return exit_validation;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
    Json j;
    j["error"] = kind;
    j["message"] = message;
    err << j.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return Runner(args, out).run();
    } catch (const CLI::ParseError& e) {
        report_error(err, "usage", e.what());
        return exit_validation;
    } catch (const DegenerateInputError& e) {
        report_error(err, e.kind(), e.what());
        return exit_runtime;
    } catch (const ValidationError& e) {
        report_error(err, e.kind(), e.what());
        return exit_validation;
    } catch (const ParseError& e) {
        report_error(err, e.kind(), e.what());
        return exit_validation;
    } catch (const StructuralError& e) {
        report_error(err, e.kind(), e.what());
        return exit_validation;
    } catch (const DomainError& e) {
        report_error(err, e.kind(), e.what());
        return exit_validation;
    } catch (const Error& e) {
        report_error(err, e.kind(), e.what());
        return exit_runtime;
    } catch (const std::exception& e) {
        report_error(err, "runtime", e.what());
        return exit_runtime;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace mplex
