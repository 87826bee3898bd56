#include "mplex/io.hpp"

#include "mplex/error.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

namespace mplex {

namespace fs = std::filesystem;

namespace {

using Index = Eigen::Index;

constexpr std::array<char, 8> kMagic{'M', 'P', 'L', 'X', 'G', 'R', 'P', 'H'};
constexpr std::uint32_t kContainerVersion = 1;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_double(std::string_view field, const fs::path& path, std::size_t line) {
    double v = 0.0;
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw ParseError(path.string(), line, "not a number: '" + std::string(field) + "'");
    if (!std::isfinite(v)) throw ParseError(path.string(), line, "non-finite value");
    return v;
}

std::size_t parse_index(std::string_view field, const fs::path& path, std::size_t line) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw ParseError(path.string(), line, "not a node index: '" + std::string(field) + "'");
    return v;
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    return in;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::string_view kind_name(EntryKind kind) { return kind == EntryKind::binary ? "binary" : "averaged"; }

struct Manifest {
    std::optional<std::size_t> n, layers, times;
    bool directed = true;
    std::optional<EntryKind> kind;
};

Manifest read_manifest(const fs::path& dir) {
    Manifest m;
    const fs::path path = dir / "manifest.json";
    if (!fs::exists(path)) return m;
    const Json j = read_json(path);
    if (!j.is_object()) throw ParseError(path.string(), 1, "manifest must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        auto count = [&](const char* what) -> std::size_t {
            if (!value.is_number_unsigned() || value.get<std::size_t>() == 0)
                throw ParseError(path.string(), 1, std::string(what) + " must be a positive integer");
            return value.get<std::size_t>();
        };
        if (key == "n")
            m.n = count("n");
        else if (key == "layers")
            m.layers = count("layers");
        else if (key == "times")
            m.times = count("times");
        else if (key == "directed") {
            if (!value.is_boolean()) throw ParseError(path.string(), 1, "directed must be true or false");
            m.directed = value.get<bool>();
        } else if (key == "kind") {
            const std::string s = value.is_string() ? value.get<std::string>() : "";
            if (s == "binary")
                m.kind = EntryKind::binary;
            else if (s == "averaged")
                m.kind = EntryKind::averaged;
            else
                throw ParseError(path.string(), 1, "kind must be \"binary\" or \"averaged\"");
        } else {
            throw ParseError(path.string(), 1, "unknown manifest key '" + key + "'");
        }
    }
    return m;
}

void write_manifest(const fs::path& dir, const MultiplexGraph& g) {
    Json j;
    j["n"] = g.n();
    j["layers"] = g.layers();
    j["times"] = g.times();
    j["directed"] = g.directed();
    j["kind"] = kind_name(g.kind());
    write_json(dir / "manifest.json", j);
}

// (k, t) pairs, zero-based, of the block files present in dir.
std::set<std::pair<std::size_t, std::size_t>> scan_block_files(const fs::path& dir) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        unsigned long k = 0, t = 0;
        char tail[8] = {};
        if (std::sscanf(name.c_str(), "layer-%lu_time-%lu.%4s", &k, &t, tail) == 3 && std::strcmp(tail, "csv") == 0 &&
            k >= 1 && t >= 1 && name == block_file_name(k - 1, t - 1))
            out.emplace(k - 1, t - 1);
    }
    return out;
}

Geometry resolve_geometry(const fs::path& dir, const Manifest& m,
                          const std::set<std::pair<std::size_t, std::size_t>>& files) {
    std::size_t max_k = 0, max_t = 0;
    for (const auto& [k, t] : files) {
        max_k = std::max(max_k, k + 1);
        max_t = std::max(max_t, t + 1);
    }
    Geometry g;
    g.layers = m.layers.value_or(max_k);
    g.times = m.times.value_or(max_t);
    if (g.layers == 0 || g.times == 0) throw StructuralError("no block files found in " + dir.string());
    for (const auto& [k, t] : files)
        if (k >= g.layers || t >= g.times)
            throw StructuralError(dir.string() + ": block file (k=" + std::to_string(k + 1) + ", t=" +
                                  std::to_string(t + 1) + ") lies outside the declared K=" +
                                  std::to_string(g.layers) + ", T=" + std::to_string(g.times));
    for (std::size_t k = 0; k < g.layers; ++k)
        for (std::size_t t = 0; t < g.times; ++t)
            if (!files.count({k, t}))
                throw StructuralError(dir.string() + ": missing block (k=" + std::to_string(k + 1) +
                                      ", t=" + std::to_string(t + 1) + "), expected file " +
                                      block_file_name(k, t));
    return g;
}

EntryKind infer_kind(const std::vector<Matrix>& blocks, const std::optional<EntryKind>& declared) {
    if (declared) return *declared;
    for (const Matrix& b : blocks)
        if (((b.array() != 0.0) && (b.array() != 1.0)).any()) return EntryKind::averaged;
    return EntryKind::binary;
}

MultiplexGraph assemble(const Geometry& g, std::vector<Matrix> blocks, const Manifest& m) {
    const EntryKind kind = infer_kind(blocks, m.kind);
    std::vector<Block> out;
    out.reserve(blocks.size());
    for (Matrix& b : blocks) out.emplace_back(std::move(b));
    return MultiplexGraph(g, std::move(out), m.directed, kind).compacted();
}

struct Edge {
    std::size_t source, target;
    double weight;
    std::size_t line;
};

MultiplexGraph ingest_edge_lists(const fs::path& dir) {
    const Manifest m = read_manifest(dir);
    const auto files = scan_block_files(dir);
    Geometry g = resolve_geometry(dir, m, files);

    std::vector<std::vector<Edge>> edges(g.layers * g.times);
    std::size_t max_node = 0;
    for (std::size_t k = 0; k < g.layers; ++k) {
        for (std::size_t t = 0; t < g.times; ++t) {
            const fs::path path = dir / block_file_name(k, t);
            std::ifstream in = open_input(path);
            std::string line;
            std::size_t number = 0;
            std::size_t columns = 0;
            while (std::getline(in, line)) {
                ++number;
                if (trim(line).empty()) continue;
                const auto fields = split_fields(line);
                if (columns == 0) {
                    const bool two = fields.size() == 2 && fields[0] == "source" && fields[1] == "target";
                    const bool three = fields.size() == 3 && fields[0] == "source" && fields[1] == "target" &&
                                       fields[2] == "weight";
                    if (!two && !three)
                        throw ParseError(path.string(), number, "expected header 'source,target[,weight]'");
                    columns = fields.size();
                    continue;
                }
                if (fields.size() != columns)
                    throw ParseError(path.string(), number, "expected " + std::to_string(columns) + " fields, found " +
                                                                std::to_string(fields.size()));
                Edge e{parse_index(fields[0], path, number), parse_index(fields[1], path, number),
                       columns == 3 ? parse_double(fields[2], path, number) : 1.0, number};
                if (e.source == 0 || e.target == 0)
                    throw ParseError(path.string(), number, "node indices are 1-based");
                if (m.n && (e.source > *m.n || e.target > *m.n))
                    throw ParseError(path.string(), number,
                                     "edge (" + std::to_string(e.source) + "," + std::to_string(e.target) +
                                         ") outside node range 1.." + std::to_string(*m.n));
                if (e.weight < 0.0 || e.weight > 1.0)
                    throw ParseError(path.string(), number, "weight " + format_double(e.weight) + " outside [0, 1]");
                max_node = std::max({max_node, e.source, e.target});
                edges[k * g.times + t].push_back(e);
            }
            if (columns == 0) throw ParseError(path.string(), number, "missing header 'source,target[,weight]'");
        }
    }
    g.n = m.n.value_or(max_node);
    if (g.n == 0) throw StructuralError(dir.string() + ": no edges and no manifest node count");

    std::vector<Matrix> blocks;
    blocks.reserve(edges.size());
    for (std::size_t idx = 0; idx < edges.size(); ++idx) {
        const fs::path path = dir / block_file_name(idx / g.times, idx % g.times);
        Matrix b = Matrix::Zero(static_cast<Index>(g.n), static_cast<Index>(g.n));
        Matrix seen = Matrix::Zero(static_cast<Index>(g.n), static_cast<Index>(g.n));
        auto put = [&](std::size_t i, std::size_t j, const Edge& e) {
            const auto r = static_cast<Index>(i - 1), c = static_cast<Index>(j - 1);
            if (seen(r, c) != 0.0 && b(r, c) != e.weight)
                throw ParseError(path.string(), e.line,
                                 "edge (" + std::to_string(i) + "," + std::to_string(j) + ") repeated with another weight");
            b(r, c) = e.weight;
            seen(r, c) = 1.0;
        };
        for (const Edge& e : edges[idx]) {
            put(e.source, e.target, e);
            if (!m.directed) put(e.target, e.source, e);
        }
        blocks.push_back(std::move(b));
    }
    return assemble(g, std::move(blocks), m);
}

MultiplexGraph ingest_dense_csv(const fs::path& dir) {
    const Manifest m = read_manifest(dir);
    const auto files = scan_block_files(dir);
    Geometry g = resolve_geometry(dir, m, files);
    std::vector<Matrix> blocks;
    for (std::size_t k = 0; k < g.layers; ++k) {
        for (std::size_t t = 0; t < g.times; ++t) {
            const fs::path path = dir / block_file_name(k, t);
            std::ifstream in = open_input(path);
            std::vector<std::vector<double>> rows;
            std::string line;
            std::size_t number = 0;
            while (std::getline(in, line)) {
                ++number;
                if (trim(line).empty()) continue;
                std::vector<double> row;
                for (auto f : split_fields(line)) row.push_back(parse_double(f, path, number));
                if (!rows.empty() && row.size() != rows.front().size())
                    throw ParseError(path.string(), number, "row has " + std::to_string(row.size()) +
                                                                " values, expected " +
                                                                std::to_string(rows.front().size()));
                rows.push_back(std::move(row));
            }
            const std::size_t n = rows.size();
            if (n == 0) throw ParseError(path.string(), number, "empty block");
            if (rows.front().size() != n)
                throw StructuralError(path.string() + ": block is " + std::to_string(n) + "x" +
                                      std::to_string(rows.front().size()) + ", not square");
            if (g.n == 0) g.n = m.n.value_or(n);
            if (n != g.n)
                throw StructuralError(path.string() + ": block has " + std::to_string(n) + " nodes, expected " +
                                      std::to_string(g.n));
            Matrix b(static_cast<Index>(n), static_cast<Index>(n));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) b(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
            blocks.push_back(std::move(b));
        }
    }
    return assemble(g, std::move(blocks), m);
}

template <class T>
void put_le(std::ostream& out, T v) {
    std::array<unsigned char, sizeof(T)> bytes;
    std::uint64_t bits = 0;
    if constexpr (std::is_same_v<T, double>)
        bits = std::bit_cast<std::uint64_t>(v);
    else
        bits = static_cast<std::uint64_t>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in, const fs::path& path) {
    std::array<unsigned char, sizeof(T)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
        throw ParseError(path.string(), 0, "truncated container");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    if constexpr (std::is_same_v<T, double>)
        return std::bit_cast<double>(bits);
    else
        return static_cast<T>(bits);
}

void export_container(const MultiplexGraph& g, const fs::path& path) {
    std::ofstream out = open_output(path);
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kContainerVersion);
    put_le<std::uint64_t>(out, g.n());
    put_le<std::uint64_t>(out, g.layers());
    put_le<std::uint64_t>(out, g.times());
    put_le<std::uint8_t>(out, g.directed() ? 1 : 0);
    put_le<std::uint8_t>(out, g.kind() == EntryKind::binary ? 0 : 1);
    for (std::size_t k = 0; k < g.layers(); ++k) {
        for (std::size_t t = 0; t < g.times(); ++t) {
            const Matrix b = g.block(k, t).dense();
            put_le<std::uint64_t>(out, static_cast<std::uint64_t>((b.array() != 0.0).count()));
            for (Index i = 0; i < b.rows(); ++i)
                for (Index j = 0; j < b.cols(); ++j)
                    if (b(i, j) != 0.0) {
                        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(i));
                        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(j));
                        put_le<double>(out, b(i, j));
                    }
        }
    }
    if (!out) throw Error("failed writing " + path.string());
}

MultiplexGraph ingest_container(const fs::path& path) {
    std::ifstream in = open_input(path);
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic)
        throw ParseError(path.string(), 0, "not a graph container (bad magic)");
    const auto version = get_le<std::uint32_t>(in, path);
    if (version != kContainerVersion)
        throw ParseError(path.string(), 0, "unsupported container version " + std::to_string(version));
    Geometry g;
    g.n = get_le<std::uint64_t>(in, path);
    g.layers = get_le<std::uint64_t>(in, path);
    g.times = get_le<std::uint64_t>(in, path);
    const auto directed = get_le<std::uint8_t>(in, path);
    const auto kind = get_le<std::uint8_t>(in, path);
    if (g.n == 0 || g.layers == 0 || g.times == 0 || directed > 1 || kind > 1 ||
        g.n > std::numeric_limits<std::uint32_t>::max())
        throw ParseError(path.string(), 0, "invalid container header");
    std::vector<Block> blocks;
    for (std::size_t idx = 0; idx < g.layers * g.times; ++idx) {
        const auto nnz = get_le<std::uint64_t>(in, path);
        if (nnz > g.n * g.n) throw ParseError(path.string(), 0, "block nonzero count exceeds n^2");
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(nnz);
        for (std::uint64_t e = 0; e < nnz; ++e) {
            const auto i = get_le<std::uint32_t>(in, path);
            const auto j = get_le<std::uint32_t>(in, path);
            const double v = get_le<double>(in, path);
            if (i >= g.n || j >= g.n)
                throw ParseError(path.string(), 0, "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                                       ") outside node range in block (k=" +
                                                       std::to_string(idx / g.times + 1) + ", t=" +
                                                       std::to_string(idx % g.times + 1) + ")");
            triplets.emplace_back(static_cast<Index>(i), static_cast<Index>(j), v);
        }
        SparseBlock s(static_cast<Index>(g.n), static_cast<Index>(g.n));
        s.setFromTriplets(triplets.begin(), triplets.end());
        blocks.emplace_back(std::move(s));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError(path.string(), 0, "trailing bytes after blocks");
    return MultiplexGraph(g, std::move(blocks), directed == 1, kind == 0 ? EntryKind::binary : EntryKind::averaged)
        .compacted();
}

void export_edge_lists(const MultiplexGraph& g, const fs::path& dir) {
    fs::create_directories(dir);
    write_manifest(dir, g);
    const bool weighted = g.kind() != EntryKind::binary;
    for (std::size_t k = 0; k < g.layers(); ++k) {
        for (std::size_t t = 0; t < g.times(); ++t) {
            std::ofstream out = open_output(dir / block_file_name(k, t));
            out << (weighted ? "source,target,weight\n" : "source,target\n");
            const Matrix b = g.block(k, t).dense();
            for (Index i = 0; i < b.rows(); ++i)
                for (Index j = 0; j < b.cols(); ++j) {
                    if (b(i, j) == 0.0 || (!g.directed() && j < i)) continue;
                    out << i + 1 << ',' << j + 1;
                    if (weighted) out << ',' << format_double(b(i, j));
                    out << '\n';
                }
        }
    }
}

void export_dense_csv(const MultiplexGraph& g, const fs::path& dir) {
    fs::create_directories(dir);
    write_manifest(dir, g);
    for (std::size_t k = 0; k < g.layers(); ++k) {
        for (std::size_t t = 0; t < g.times(); ++t) {
            std::ofstream out = open_output(dir / block_file_name(k, t));
            const Matrix b = g.block(k, t).dense();
            for (Index i = 0; i < b.rows(); ++i) {
                for (Index j = 0; j < b.cols(); ++j) {
                    if (j > 0) out << ',';
                    out << format_double(b(i, j));
                }
                out << '\n';
            }
        }
    }
}

void write_matrix_csv(const fs::path& path, const Matrix& m, const char* block_label, std::size_t n,
                      const char* prefix) {
    std::ofstream out = open_output(path);
    out << block_label << ",node";
    for (Index j = 0; j < m.cols(); ++j) out << ',' << prefix << j + 1;
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        out << static_cast<std::size_t>(i) / n + 1 << ',' << static_cast<std::size_t>(i) % n + 1;
        for (Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
        out << '\n';
    }
}

Matrix read_matrix_csv(const fs::path& path, std::size_t rows, Index cols) {
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t number = 0;
    Matrix m(static_cast<Index>(rows), cols);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++number;
        if (number == 1 || trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != static_cast<std::size_t>(cols) + 2)
            throw ParseError(path.string(), number, "expected " + std::to_string(cols + 2) + " fields");
        if (row >= rows) throw ParseError(path.string(), number, "more rows than the sidecar declares");
        for (Index j = 0; j < cols; ++j)
            m(static_cast<Index>(row), j) = parse_double(fields[static_cast<std::size_t>(j) + 2], path, number);
        ++row;
    }
    if (row != rows)
        throw ParseError(path.string(), number, "found " + std::to_string(row) + " rows, expected " + std::to_string(rows));
    return m;
}

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(std::isfinite(m(i, j)) ? Json(m(i, j)) : Json());
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

GraphFormat parse_graph_format(std::string_view name) {
    if (name == "edge-list-dir") return GraphFormat::edge_list_dir;
    if (name == "dense-csv-dir") return GraphFormat::dense_csv_dir;
    if (name == "container") return GraphFormat::container;
    throw ValidationError("unknown graph format '" + std::string(name) +
                          "' (expected edge-list-dir, dense-csv-dir or container)");
}

std::string_view format_name(GraphFormat format) {
    switch (format) {
        case GraphFormat::edge_list_dir: return "edge-list-dir";
        case GraphFormat::dense_csv_dir: return "dense-csv-dir";
        case GraphFormat::container: return "container";
    }
    return "";
}

std::string block_file_name(std::size_t k, std::size_t t) {
    return "layer-" + std::to_string(k + 1) + "_time-" + std::to_string(t + 1) + ".csv";
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

MultiplexGraph ingest(const fs::path& path, GraphFormat format) {
    if (!fs::exists(path)) throw ValidationError("input " + path.string() + " does not exist");
    switch (format) {
        case GraphFormat::edge_list_dir: return ingest_edge_lists(path);
        case GraphFormat::dense_csv_dir: return ingest_dense_csv(path);
        case GraphFormat::container: return ingest_container(path);
    }
    throw ValidationError("unknown graph format");
}

void export_graph(const MultiplexGraph& graph, const fs::path& path, GraphFormat format) {
    switch (format) {
        case GraphFormat::edge_list_dir: return export_edge_lists(graph, path);
        case GraphFormat::dense_csv_dir: return export_dense_csv(graph, path);
        case GraphFormat::container:
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            return export_container(graph, path);
    }
}

void write_embedding(const fs::path& dir, const DuaseEmbedding& e) {
    fs::create_directories(dir);
    write_matrix_csv(dir / "xhat.csv", e.Xhat, "layer", e.geometry.n, "x");
    write_matrix_csv(dir / "yhat.csv", e.Yhat, "time", e.geometry.n, "y");
    Json j;
    j["n"] = e.geometry.n;
    j["layers"] = e.geometry.layers;
    j["times"] = e.geometry.times;
    j["d"] = e.dimension();
    j["singular_values"] = std::vector<double>(e.singular_values.begin(), e.singular_values.end());
    j["xhat"] = "xhat.csv";
    j["yhat"] = "yhat.csv";
    write_json(dir / "embedding.json", j);
}

DuaseEmbedding read_embedding(const fs::path& dir) {
    const fs::path side = dir / "embedding.json";
    const Json j = read_json(side);
    DuaseEmbedding e;
    try {
        e.geometry = {j.at("n").get<std::size_t>(), j.at("layers").get<std::size_t>(), j.at("times").get<std::size_t>()};
        const auto d = j.at("d").get<Index>();
        const auto sv = j.at("singular_values").get<std::vector<double>>();
        if (static_cast<Index>(sv.size()) != d) throw ParseError(side.string(), 1, "singular value count differs from d");
        e.singular_values = Eigen::Map<const Vector>(sv.data(), d);
        e.Xhat = read_matrix_csv(dir / j.at("xhat").get<std::string>(), e.geometry.rows(), d);
        e.Yhat = read_matrix_csv(dir / j.at("yhat").get<std::string>(), e.geometry.cols(), d);
    } catch (const Json::exception& ex) {
        throw ParseError(side.string(), 1, ex.what());
    }
    return e;
}

Json to_json(const TestResult& r) {
    Json j;
    j["psi_obs"] = r.psi_obs;
    j["p_value"] = r.p_value;
    j["d"] = r.d;
    j["n_boot"] = r.n_boot;
    j["variant"] = r.variant == BootstrapVariant::plain ? "plain" : "averaged";
    j["n_rep"] = r.n_rep;
    j["seed"] = r.seed_fingerprint;
    Json layers = Json::array();
    for (std::size_t k : r.layers) layers.push_back(k + 1);
    j["layers"] = layers;
    j["clamped_entries"] = r.clamped_entries;
    j["bootstrap_samples"] = r.bootstrap_samples;
    return j;
}

TestResult test_result_from_json(const Json& j) {
    TestResult r;
    try {
        r.psi_obs = j.at("psi_obs").get<double>();
        r.p_value = j.at("p_value").get<double>();
        r.d = j.at("d").get<Index>();
        r.n_boot = j.at("n_boot").get<std::size_t>();
        const std::string variant = j.at("variant").get<std::string>();
        if (variant != "plain" && variant != "averaged") throw ValidationError("unknown variant '" + variant + "'");
        r.variant = variant == "plain" ? BootstrapVariant::plain : BootstrapVariant::averaged;
        r.n_rep = j.at("n_rep").get<int>();
        r.seed_fingerprint = j.at("seed").get<std::string>();
        for (std::size_t k : j.at("layers").get<std::vector<std::size_t>>()) r.layers.push_back(k - 1);
        r.clamped_entries = j.at("clamped_entries").get<std::size_t>();
        r.bootstrap_samples = j.at("bootstrap_samples").get<std::vector<double>>();
    } catch (const Json::exception& ex) {
        throw ValidationError(std::string("malformed test result: ") + ex.what());
    }
    return r;
}

Json to_json(const PairwiseResult& r) {
    Json j;
    j["layers"] = r.layers;
    j["alpha"] = r.alpha;
    j["p_values"] = matrix_json(r.p_values);
    j["rejections"] = r.rejections;
    Json tests = Json::array();
    for (std::size_t k = 0; k < r.layers; ++k)
        for (std::size_t l = k + 1; l < r.layers; ++l)
            if (const auto& t = r.at(k, l)) tests.push_back(to_json(*t));
    j["tests"] = std::move(tests);
    return j;
}

Json to_json(const WorkflowReport& r) {
    Json j;
    j["conditions"] = r.conditions;
    j["replicates"] = r.replicates;
    Json within = Json::array();
    for (const auto& t : r.within) within.push_back(to_json(t));
    j["within_condition"] = std::move(within);
    j["global_status"] = r.global_status;
    j["global"] = r.global ? to_json(*r.global) : Json();
    j["pairwise_status"] = r.pairwise_status;
    j["pairwise"] = r.pairwise ? to_json(*r.pairwise) : Json();
    j["rejection_counts"] = r.rejection_counts();
    return j;
}

Json to_json(const PowerTable& t) {
    Json cells = Json::array();
    for (const auto& c : t.cells) {
        if (!c) continue;
        Json j;
        j["n"] = c->n;
        j["epsilon"] = c->epsilon;
        j["replicates"] = c->replicates;
        j["rejections"] = c->rejections;
        j["fraction"] = c->fraction;
        j["std_error"] = c->std_error;
        cells.push_back(std::move(j));
    }
    Json j;
    j["n_list"] = t.n_list;
    j["epsilon_list"] = t.epsilon_list;
    j["cells"] = std::move(cells);
    return j;
}

Json to_json(const ConsistencyCurve& curve) {
    Json points = Json::array();
    for (const auto& p : curve.points) {
        Json j;
        j["n"] = p.n;
        j["seeds"] = p.seeds;
        j["median"] = p.median;
        j["q05"] = p.q05;
        j["q25"] = p.q25;
        j["q75"] = p.q75;
        j["q95"] = p.q95;
        j["frobenius_median"] = p.frobenius_median;
        j["gram"] = std::vector<double>(p.gram.begin(), p.gram.end());
        j["errors"] = p.errors;
        points.push_back(std::move(j));
    }
    return Json{{"points", std::move(points)}};
}

Json read_json(const fs::path& path) {
    std::ifstream in = open_input(path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& ex) {
        throw ParseError(path.string(), 0, ex.what());
    }
}

void write_json(const fs::path& path, const Json& j) {
    std::ofstream out = open_output(path);
    out << j.dump(2) << '\n';
}

}  // namespace mplex
