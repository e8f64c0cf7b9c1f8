#pragma once

// Benchmark items and model outputs in, evaluation items out.
//
// Bench file: a JSON array of {"id", "prompt", "expression", "graph"}
// objects, or a synthetic dataset file (one pair per line, phi as gold).
// Outputs file: one JSON object per line keyed by "id", carrying either the
// raw model text ("output"), a structured "expression" (+ optional "graph"),
// or a synthetic pair whose psi is the prediction.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dover/expr.hpp"
#include "dover/graph.hpp"
#include "dover/metrics.hpp"

namespace dover {

struct BenchItem {
  std::string id;
  std::string prompt;
  std::string expression_text;
  std::string graph_text;
  // Expectations already rewritten to probabilities.
  std::optional<Compound> gold;
  std::optional<Dag> graph;
  // Set exactly when the gold fields cannot be used.
  std::optional<std::string> skip_reason;
};

// Throws IoError, SchemaError (with the item index).
std::vector<BenchItem> load_bench_file(const std::string& path);
std::vector<BenchItem> parse_bench(std::string_view text);

struct ModelOutput {
  std::string raw;
  std::string expression_text;
  std::optional<Compound> expression;
  std::string graph_text;
  std::optional<Dag> graph;
  std::vector<std::string> notes;
};

// Reads the "Expression:" and "Graphical Representation:" lines, preferring
// the text after the last "Solution:". Never throws.
ModelOutput extract_model_output(std::string_view raw);

struct OutputRecord {
  std::string id;
  ModelOutput output;
};

// Throws IoError, SchemaError.
std::vector<OutputRecord> load_outputs_file(const std::string& path);
std::vector<OutputRecord> parse_outputs(std::istream& in);

// {"id", "expression", "graph", "notes"}
std::string output_record(const OutputRecord& r);

struct Joined {
  std::vector<EvalItem> items;
  Exclusions excluded;
};

// Matches outputs to items by id. The model's own graph is used when it
// gave one, unless use_gold_graph.
Joined join_outputs(const std::vector<BenchItem>& bench, const std::vector<OutputRecord>& outputs,
                    bool use_gold_graph = false);

}  // namespace dover
