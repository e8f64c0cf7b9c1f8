#pragma once

// Synthetic derivation pairs: random ordered DAGs, random base expressions
// and random walks of valid rule applications.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dover/expr.hpp"
#include "dover/graph.hpp"
#include "dover/rules.hpp"
#include "dover/search.hpp"

namespace dover {

// mt19937_64 with reductions written out, so a seed gives the same stream
// on every platform (the std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  // Uniform in [0, n). n > 0.
  std::uint64_t below(std::uint64_t n);
  // Uniform in [lo, hi].
  int uniform(int lo, int hi);
  bool bernoulli(double p);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 eng_;
};

// Seed of the index-th pair of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct IntRange {
  int lo;
  int hi;
};

struct SynthConfig {
  IntRange vars{3, 10};
  double edge_prob = 0.5;
  IntRange rule_apps{1, 4};
  std::uint64_t seed = 0;
  // Rules the random walk may use.
  RuleConfig rules;
  // Share of pairs turned into negatives.
  double negative_fraction = 0.0;
  int max_attempts = 10'000;

  // Throws ConfigError.
  void validate() const;
};

enum class PairLabel { Derivable, Negative, UnverifiedNegative };

std::string_view to_string(PairLabel l);
// Throws ConfigError.
PairLabel label_from_string(std::string_view s);

struct SynthPair {
  std::string id;
  Dag dag;
  CausalExpr phi;
  CausalExpr psi;
  Derivation ground_truth;
  PairLabel label = PairLabel::Derivable;
  std::uint64_t seed = 0;

  friend bool operator==(const SynthPair&, const SynthPair&) = default;
};

// Nodes v1..vn, edge vi->vj (i < j) with probability p each.
Dag sample_dag(int n, double p, Rng& rng);
Dag sample_dag(const SynthConfig& cfg, Rng& rng);

// Outcome uniform over the nodes; the rest split at random into
// interventions, observations and unused.
CausalExpr sample_base_expression(const Dag& g, Rng& rng);

struct GenerationFailed {
  int step;
};

struct SampledDerivation {
  CausalExpr psi;
  Derivation proof;
};

// `len` uniformly chosen valid applications, never revisiting an
// expression, so psi differs from phi.
std::variant<SampledDerivation, GenerationFailed> sample_derivation(const Dag& g, const CausalExpr& phi, int len,
                                                                    Rng& rng, const RuleConfig& rules);

struct DatasetStats {
  std::size_t pairs = 0;
  std::size_t derivable = 0;
  std::size_t negative = 0;
  std::size_t unverified_negative = 0;
  std::size_t resamples = 0;
  std::size_t edges_min = 0;
  std::size_t edges_max = 0;
  double edges_mean = 0.0;
  std::size_t nodes_min = 0;
  std::size_t nodes_max = 0;
  double nodes_mean = 0.0;
  std::size_t total_steps = 0;
  std::array<std::size_t, kAllRules.size()> rule_counts{};
};

struct Dataset {
  std::vector<SynthPair> pairs;
  DatasetStats stats;
};

// Pair i is drawn from derive_seed(cfg.seed, i) alone.
// Throws ConfigError, BudgetExceeded (max_attempts resamples for one pair).
Dataset generate_dataset(const SynthConfig& cfg, std::size_t n_pairs);

std::string stats_to_json(const DatasetStats& s);

// One JSON record per line. Throws IoError.
std::size_t emit_dataset(const std::vector<SynthPair>& pairs, const std::string& path);
void write_dataset(const std::vector<SynthPair>& pairs, std::ostream& out);
std::string dataset_record(const SynthPair& p);

// Rebuilds each pair, replaying its trace. Throws IoError, SchemaError.
std::vector<SynthPair> read_dataset(const std::string& path);
std::vector<SynthPair> parse_dataset(std::istream& in);
SynthPair parse_dataset_record(std::string_view line, std::size_t index);

}  // namespace dover
