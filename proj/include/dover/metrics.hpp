#pragma once

// Surface metrics (normalized exact match, token F1, BLEU) next to the
// verifier verdict, per item and aggregated.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dover/expr.hpp"
#include "dover/graph.hpp"
#include "dover/search.hpp"

namespace dover {

// Identifiers (so "do" is one token), digit runs, and every other
// non-space character on its own.
std::vector<std::string> tokenize(std::string_view text);

// 1 iff the canonical keys agree with values erased.
int exact_match(const CausalExpr& a, const CausalExpr& b);
// Component-wise after sign-aligned pairing; 0 on an arity mismatch.
int exact_match(const Compound& a, const Compound& b);

// F1 of the token multisets. Symmetric.
double token_f1(std::string_view a, std::string_view b);

// Sentence BLEU of candidate against reference: clipped n-gram precisions
// for n = 1..max_n, add-one smoothed for n >= 2, geometric mean, brevity
// penalty. Empty candidate scores 0.
double bleu(std::string_view candidate, std::string_view reference, int max_n = 4);

// Pairs the k-th positive component of a with the k-th positive of b, and
// likewise for negatives. nullopt when the sign counts differ.
std::optional<std::vector<std::pair<CausalExpr, CausalExpr>>> align_components(const Compound& a,
                                                                               const Compound& b);

struct EvalItem {
  std::string id;
  std::string gold_text;
  std::string pred_text;
  std::optional<Compound> gold;
  std::optional<Compound> pred;
  std::optional<Dag> graph;
  std::vector<std::string> notes;
};

struct MetricReport {
  std::string id;
  int exact_match = 0;
  double token_f1 = 0.0;
  double bleu = 0.0;
  // Prediction derivable from the gold expression, every component.
  bool verified = false;
  // outcome_name of the search, or "arity-mismatch" / "error".
  std::string verdict;
  std::size_t proof_steps = 0;
  std::vector<std::string> notes;
};

struct Aggregate {
  std::size_t items = 0;
  double exact_match = 0.0;
  double token_f1 = 0.0;
  double bleu = 0.0;
  double verifier = 0.0;
};

// Benchmark items left out of scoring, filled by the caller.
struct Exclusions {
  std::vector<std::pair<std::string, std::string>> skipped;  // id, reason
  std::vector<std::string> unmatched;                       // no prediction
  std::vector<std::string> extra;                           // prediction without item
};

struct BatchReport {
  std::vector<MetricReport> items;
  Aggregate aggregate;
  Exclusions excluded;
};

// Never throws on item content: failures become zero scores plus a note.
MetricReport evaluate_item(const EvalItem& item, int max_depth, const SearchConfig& cfg = {});
BatchReport evaluate_batch(const std::vector<EvalItem>& items, int max_depth = 20, const SearchConfig& cfg = {});

// Tab separated header and one row of accuracies.
std::string aggregate_table(const Aggregate& a);
// Aggregate accuracies plus exclusions.
std::string report_json(const BatchReport& r);
// One JSON object per line per item.
std::string item_records(const BatchReport& r);

}  // namespace dover
