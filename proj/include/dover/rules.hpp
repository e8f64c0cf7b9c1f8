#pragma once

// The three do-calculus rules as guarded rewrites, each direction a distinct
// rule id, plus the expectation-to-probability rewrite.
//
// For an expression P(Y | do(X), W) and a moved set Z the guards are
//   Rule 1: (Y _||_ Z | X, W) in G with edges into X removed
//   Rule 2: (Y _||_ Z | X, W) in G with edges into X and out of Z removed
//   Rule 3: (Y _||_ Z | X, W) in G with edges into X and into Z(W) removed
// where X and W never contain Z; for a deletion they are taken from the
// expression after Z is removed, for an insertion from the expression as is.
// Value annotations never reach a guard.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dover/expr.hpp"
#include "dover/graph.hpp"

namespace dover {

enum class RuleId : std::uint8_t {
  R1_InsertObs,
  R1_DeleteObs,
  R2_ActionToObs,
  R2_ObsToAction,
  R3_InsertAction,
  R3_DeleteAction,
  ExpectationRewrite,
};

inline constexpr std::array<RuleId, 7> kAllRules = {
    RuleId::R1_InsertObs,    RuleId::R1_DeleteObs,    RuleId::R2_ActionToObs,
    RuleId::R2_ObsToAction,  RuleId::R3_InsertAction, RuleId::R3_DeleteAction,
    RuleId::ExpectationRewrite,
};

std::string_view to_string(RuleId r);
std::optional<RuleId> rule_from_string(std::string_view s);
bool is_insertion(RuleId r);

struct RuleConfig {
  bool insertions = true;
  // Largest moved set tried; values >= |V| give the full power set.
  int k_max = 2;
  // Bit i enables RuleId(i).
  std::uint8_t enabled = 0x7f;

  bool allows(RuleId r) const;
  RuleConfig& only(std::initializer_list<RuleId> rules);
  // Throws ConfigError.
  void validate() const;
};

struct RuleApplication {
  RuleId rule;
  VariableSet moved;
  CausalExpr result;
};

// Memo of d-separation answers keyed by (cut, a, b, cond).
class GuardCache {
 public:
  struct Key {
    std::uint64_t into, out_of, a, b, cond;
    friend bool operator==(const Key&, const Key&) = default;
  };

  std::optional<bool> find(const Key& k) const;
  void insert(const Key& k, bool value);
  std::size_t size() const { return table_.size(); }

 private:
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  std::unordered_map<Key, bool, KeyHash> table_;
};

// Mask-level rule machinery bound to one graph. This is what the search
// runs; the free functions below are thin wrappers.
class RuleEngine {
 public:
  struct Shape {
    NodeSet outcome;
    NodeSet actions;
    NodeSet observed;
    Form form = Form::Probability;

    friend bool operator==(const Shape&, const Shape&) = default;
  };

  struct Move {
    RuleId rule;
    NodeSet moved;
    Shape result;
  };

  RuleEngine(const Dag& g, RuleConfig cfg, GuardCache* cache = nullptr);

  const Dag& graph() const { return *g_; }
  const RuleConfig& config() const { return cfg_; }

  // Throws UnknownVariable.
  Shape shape_of(const CausalExpr& e) const;

  // Every valid move, ordered by rule id then lexicographic moved set.
  void moves(const Shape& s, std::vector<Move>& out);

  // Guard of `rule` for moving z out of / into s. Only meaningful when the
  // syntactic precondition holds (see syntactically_applicable).
  bool guard(RuleId rule, const Shape& s, NodeSet z);
  bool syntactically_applicable(RuleId rule, const Shape& s, NodeSet z) const;
  static Shape rewrite(RuleId rule, const Shape& s, NodeSet z);

  // Applies a move to a full expression, carrying value annotations.
  CausalExpr materialize(const CausalExpr& from, RuleId rule, NodeSet moved) const;

  std::uint64_t guard_evaluations() const { return guard_evals_; }
  std::uint64_t cache_hits() const { return cache_hits_; }

 private:
  bool rule1(NodeSet y, NodeSet x, NodeSet w, NodeSet z);
  bool rule2(NodeSet y, NodeSet x, NodeSet w, NodeSet z);
  bool rule3(NodeSet y, NodeSet x, NodeSet w, NodeSet z);
  bool dsep(NodeSet a, NodeSet b, NodeSet cond, Cut cut);
  const std::vector<NodeSet>& subsets(NodeSet candidates);

  const Dag* g_;
  RuleConfig cfg_;
  GuardCache* cache_;
  std::uint64_t guard_evals_ = 0;
  std::uint64_t cache_hits_ = 0;
  std::unordered_map<std::uint64_t, std::vector<NodeSet>> subset_memo_;
};

// Direction is inferred from z: a subset of the observations (rule 1) or of
// the interventions (rules 2, 3) means deletion / exchange out, variables new
// to e mean insertion (rules 1, 3); for rule 2 a subset of the observations
// means observation-to-action. Anything else throws DisjointnessError.
bool guard_rule1(const Dag& g, const CausalExpr& e, const VariableSet& z);
bool guard_rule2(const Dag& g, const CausalExpr& e, const VariableSet& z);
bool guard_rule3(const Dag& g, const CausalExpr& e, const VariableSet& z);

// The rewrite if `rule` with `moved` is applicable to e under g (syntactic
// precondition and guard), otherwise nullopt.
std::optional<CausalExpr> apply_rule(const Dag& g, const CausalExpr& e, RuleId rule,
                                     const VariableSet& moved);

std::vector<RuleApplication> successors(const Dag& g, const CausalExpr& e, const RuleConfig& cfg = {});

}  // namespace dover
