#pragma once

// Breadth-first proof search over the derivation graph: nodes are canonical
// expressions, edges are single valid rule applications.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dover/expr.hpp"
#include "dover/graph.hpp"
#include "dover/rules.hpp"

namespace dover {

struct ProofStep {
  RuleId rule;
  VariableSet moved;
  CausalExpr from;
  CausalExpr to;

  friend bool operator==(const ProofStep&, const ProofStep&) = default;
};

struct Derivation {
  std::vector<ProofStep> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }

  friend bool operator==(const Derivation&, const Derivation&) = default;
};

struct Derivable {
  Derivation proof;
};

struct NotDerivableWithinDepth {
  int depth;
};

// The reachable set closed before the depth bound: the target is not
// derivable at any depth.
struct Exhausted {};

using VerificationOutcome = std::variant<Derivable, NotDerivableWithinDepth, Exhausted>;

inline bool is_derivable(const VerificationOutcome& o) { return std::holds_alternative<Derivable>(o); }
std::string_view outcome_name(const VerificationOutcome& o);

struct SearchStats {
  std::uint64_t expanded_nodes = 0;
  std::uint64_t guard_evaluations = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t max_frontier = 0;
  std::uint64_t visited = 0;
  std::chrono::nanoseconds wall_time{0};
  bool budget_exhausted = false;
};

struct SearchConfig {
  RuleConfig rules;
  // Visited-set and target equality ignore value annotations when set.
  bool erase_values = true;
  // Expansion budget; running out yields NotDerivableWithinDepth with
  // stats.budget_exhausted set.
  std::uint64_t max_expansions = 2'000'000;
  // Optional cache shared across calls on the same graph (keys do not
  // identify the graph); per-call cache when null.
  GuardCache* shared_cache = nullptr;
};

struct VerifyResult {
  VerificationOutcome outcome;
  SearchStats stats;
};

// Throws UnknownVariable, ConfigError (negative depth).
VerifyResult verify(const Dag& g, const CausalExpr& phi, const CausalExpr& psi, int max_depth,
                    const SearchConfig& cfg = {});

struct ReplayResult {
  bool ok = true;
  std::optional<std::size_t> failed_step;
  std::string reason;

  explicit operator bool() const { return ok; }
};

// Re-checks chaining, each step's syntactic precondition and guard, and that
// the rewrite reproduces `to`.
ReplayResult replay(const Dag& g, const Derivation& d);

// Also checks the proof starts at phi and ends at psi (canonically).
ReplayResult replay(const Dag& g, const Derivation& d, const CausalExpr& phi, const CausalExpr& psi,
                    bool erase_values = true);

// Canonical keys reachable from phi within max_depth, with BFS distance.
class Closure {
 public:
  bool contains(const CanonicalKey& k) const { return dist_.count(k.key) != 0; }
  std::optional<int> distance(const CanonicalKey& k) const;
  std::size_t size() const { return dist_.size(); }
  const std::map<std::string, int>& distances() const { return dist_; }
  // Exprs in discovery order.
  const std::vector<CausalExpr>& members() const { return members_; }

 private:
  friend Closure reachable_closure(const Dag&, const CausalExpr&, int, const SearchConfig&, std::size_t);
  std::map<std::string, int> dist_;
  std::vector<CausalExpr> members_;
};

// Throws BudgetExceeded when more than node_cap expressions are reached.
Closure reachable_closure(const Dag& g, const CausalExpr& phi, int max_depth, const SearchConfig& cfg = {},
                          std::size_t node_cap = 200'000);

}  // namespace dover
