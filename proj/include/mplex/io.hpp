#ifndef MPLEX_IO_HPP
#define MPLEX_IO_HPP

#include "mplex/embedding.hpp"
#include "mplex/diagnostics.hpp"
#include "mplex/experiments.hpp"
#include "mplex/inference.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace mplex {

using Json = nlohmann::ordered_json;

// On-disk graph layouts.
//   edge_list_dir: layer-<k>_time-<t>.csv with header source,target[,weight],
//                  1-based nodes, plus an optional manifest.json
//                  {"n", "layers", "times", "directed", "kind"}.
//   dense_csv_dir: layer-<k>_time-<t>.csv holding the n x n block, no header;
//                  manifest.json optional as above.
//   container:     one binary file: magic, geometry header, then each block
//                  as a list of (row, col, value) nonzeros.
enum class GraphFormat { edge_list_dir, dense_csv_dir, container };

GraphFormat parse_graph_format(std::string_view name);
std::string_view format_name(GraphFormat format);

// File name of block (k, t), zero-based arguments, one-based in the name.
std::string block_file_name(std::size_t k, std::size_t t);

MultiplexGraph ingest(const std::filesystem::path& path, GraphFormat format);
void export_graph(const MultiplexGraph& graph, const std::filesystem::path& path, GraphFormat format);

// xhat.csv, yhat.csv (17 significant digits) and the embedding.json sidecar.
void write_embedding(const std::filesystem::path& dir, const DuaseEmbedding& embedding);
DuaseEmbedding read_embedding(const std::filesystem::path& dir);

std::string format_double(double v);

Json to_json(const TestResult& result);
TestResult test_result_from_json(const Json& j);
Json to_json(const PairwiseResult& result);
Json to_json(const WorkflowReport& report);
Json to_json(const PowerTable& table);
Json to_json(const ConsistencyCurve& curve);

// Reads a whole JSON document; parse failures become ParseError.
Json read_json(const std::filesystem::path& path);
// Writes `j` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace mplex

#endif  // MPLEX_IO_HPP
