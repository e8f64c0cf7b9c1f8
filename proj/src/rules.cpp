#include "dover/rules.hpp"

#include <algorithm>

#include "dover/error.hpp"

namespace dover {

namespace {

constexpr std::array<std::string_view, 7> kRuleNames = {
    "R1_InsertObs",    "R1_DeleteObs",    "R2_ActionToObs",    "R2_ObsToAction",
    "R3_InsertAction", "R3_DeleteAction", "ExpectationRewrite",
};

std::uint8_t bit(RuleId r) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(r)); }

// Preorder DFS over increasing indices yields subsets in lexicographic order
// of their sorted index lists.
void enumerate(const std::vector<std::size_t>& idx, std::size_t from, NodeSet cur, int left,
               std::vector<NodeSet>& out) {
  for (std::size_t i = from; i < idx.size(); ++i) {
    NodeSet next = cur | NodeSet::single(idx[i]);
    out.push_back(next);
    if (left > 1) enumerate(idx, i + 1, next, left - 1, out);
  }
}

}  // namespace

std::string_view to_string(RuleId r) { return kRuleNames[static_cast<std::size_t>(r)]; }

std::optional<RuleId> rule_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kRuleNames.size(); ++i) {
    if (kRuleNames[i] == s) return static_cast<RuleId>(i);
  }
  return std::nullopt;
}

bool is_insertion(RuleId r) { return r == RuleId::R1_InsertObs || r == RuleId::R3_InsertAction; }

bool RuleConfig::allows(RuleId r) const {
  if (!insertions && is_insertion(r)) return false;
  return (enabled & bit(r)) != 0;
}

RuleConfig& RuleConfig::only(std::initializer_list<RuleId> rules) {
  enabled = 0;
  for (RuleId r : rules) enabled |= bit(r);
  return *this;
}

void RuleConfig::validate() const {
  if (k_max < 1) throw ConfigError("k_max must be at least 1");
}

std::optional<bool> GuardCache::find(const Key& k) const {
  auto it = table_.find(k);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

void GuardCache::insert(const Key& k, bool value) { table_.emplace(k, value); }

std::size_t GuardCache::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ull;
  for (std::uint64_t v : {k.into, k.out_of, k.a, k.b, k.cond}) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdull;
  }
  return static_cast<std::size_t>(h ^ (h >> 33));
}

RuleEngine::RuleEngine(const Dag& g, RuleConfig cfg, GuardCache* cache)
    : g_(&g), cfg_(cfg), cache_(cache) {
  cfg_.validate();
}

RuleEngine::Shape RuleEngine::shape_of(const CausalExpr& e) const {
  Shape s;
  for (const auto& o : e.outcome()) s.outcome |= NodeSet::single(g_->require(o.var.name()));
  for (const auto& t : e.conditioning()) {
    NodeSet m = NodeSet::single(g_->require(t.var.name()));
    (t.kind == TermKind::Intervened ? s.actions : s.observed) |= m;
  }
  s.form = e.form();
  return s;
}

bool RuleEngine::dsep(NodeSet a, NodeSet b, NodeSet cond, Cut cut) {
  ++guard_evals_;
  GuardCache::Key key{cut.into.bits(), cut.out_of.bits(), a.bits(), b.bits(), cond.bits()};
  if (cache_) {
    if (auto hit = cache_->find(key)) {
      ++cache_hits_;
      return *hit;
    }
  }
  bool r = g_->topology().d_separated(a, b, cond, cut);
  if (cache_) cache_->insert(key, r);
  return r;
}

bool RuleEngine::rule1(NodeSet y, NodeSet x, NodeSet w, NodeSet z) {
  return dsep(y, z, x | w, Cut{x, {}});
}

bool RuleEngine::rule2(NodeSet y, NodeSet x, NodeSet w, NodeSet z) {
  return dsep(y, z, x | w, Cut{x, z});
}

bool RuleEngine::rule3(NodeSet y, NodeSet x, NodeSet w, NodeSet z) {
  NodeSet zw = z - g_->topology().ancestors(w, Cut{x, {}});
  return dsep(y, z, x | w, Cut{x | zw, {}});
}

bool RuleEngine::syntactically_applicable(RuleId rule, const Shape& s, NodeSet z) const {
  if (rule == RuleId::ExpectationRewrite) return z.empty() && s.form == Form::Expectation;
  if (z.empty() || !z.subset_of(g_->all())) return false;
  switch (rule) {
    case RuleId::R1_InsertObs:
    case RuleId::R3_InsertAction:
      return !z.intersects(s.outcome | s.actions | s.observed);
    case RuleId::R1_DeleteObs:
    case RuleId::R2_ObsToAction:
      return z.subset_of(s.observed);
    case RuleId::R2_ActionToObs:
    case RuleId::R3_DeleteAction:
      return z.subset_of(s.actions);
    case RuleId::ExpectationRewrite:
      break;
  }
  return false;
}

bool RuleEngine::guard(RuleId rule, const Shape& s, NodeSet z) {
  const NodeSet y = s.outcome, x = s.actions, w = s.observed;
  switch (rule) {
    case RuleId::R1_InsertObs: return rule1(y, x, w, z);
    case RuleId::R1_DeleteObs: return rule1(y, x, w - z, z);
    case RuleId::R2_ActionToObs: return rule2(y, x - z, w, z);
    case RuleId::R2_ObsToAction: return rule2(y, x, w - z, z);
    case RuleId::R3_InsertAction: return rule3(y, x, w, z);
    case RuleId::R3_DeleteAction: return rule3(y, x - z, w, z);
    case RuleId::ExpectationRewrite: return true;
  }
  return false;
}

RuleEngine::Shape RuleEngine::rewrite(RuleId rule, const Shape& s, NodeSet z) {
  Shape r = s;
  switch (rule) {
    case RuleId::R1_InsertObs: r.observed |= z; break;
    case RuleId::R1_DeleteObs: r.observed -= z; break;
    case RuleId::R2_ActionToObs: r.actions -= z; r.observed |= z; break;
    case RuleId::R2_ObsToAction: r.observed -= z; r.actions |= z; break;
    case RuleId::R3_InsertAction: r.actions |= z; break;
    case RuleId::R3_DeleteAction: r.actions -= z; break;
    case RuleId::ExpectationRewrite: r.form = Form::Probability; break;
  }
  return r;
}

const std::vector<NodeSet>& RuleEngine::subsets(NodeSet candidates) {
  auto [it, fresh] = subset_memo_.try_emplace(candidates.bits());
  if (fresh) enumerate(candidates.indices(), 0, NodeSet{}, cfg_.k_max, it->second);
  return it->second;
}

void RuleEngine::moves(const Shape& s, std::vector<Move>& out) {
  const NodeSet fresh = g_->all() - (s.outcome | s.actions | s.observed);
  for (RuleId rule : kAllRules) {
    if (!cfg_.allows(rule)) continue;
    if (rule == RuleId::ExpectationRewrite) {
      if (s.form == Form::Expectation) out.push_back({rule, {}, rewrite(rule, s, {})});
      continue;
    }
    NodeSet pool;
    switch (rule) {
      case RuleId::R1_InsertObs:
      case RuleId::R3_InsertAction: pool = fresh; break;
      case RuleId::R1_DeleteObs:
      case RuleId::R2_ObsToAction: pool = s.observed; break;
      default: pool = s.actions; break;
    }
    if (pool.empty()) continue;
    for (NodeSet z : subsets(pool)) {
      if (guard(rule, s, z)) out.push_back({rule, z, rewrite(rule, s, z)});
    }
  }
}

CausalExpr RuleEngine::materialize(const CausalExpr& from, RuleId rule, NodeSet moved) const {
  if (rule == RuleId::ExpectationRewrite) return rewrite_expectation(from);
  std::vector<Term> cond;
  cond.reserve(from.conditioning().size() + static_cast<std::size_t>(moved.size()));
  for (const auto& t : from.conditioning()) {
    if (!moved.contains(g_->require(t.var.name()))) {
      cond.push_back(t);
      continue;
    }
    switch (rule) {
      case RuleId::R1_DeleteObs:
      case RuleId::R3_DeleteAction:
        break;
      case RuleId::R2_ActionToObs:
        cond.push_back({TermKind::Observed, t.var, t.value});
        break;
      case RuleId::R2_ObsToAction:
        cond.push_back({TermKind::Intervened, t.var, t.value});
        break;
      default:
        cond.push_back(t);
        break;
    }
  }
  if (is_insertion(rule)) {
    TermKind kind = rule == RuleId::R1_InsertObs ? TermKind::Observed : TermKind::Intervened;
    moved.for_each([&](std::size_t i) { cond.push_back({kind, Variable(g_->nodes()[i]), std::nullopt}); });
  }
  if (from.form() == Form::Expectation) return CausalExpr::expectation(from.outcome().front(), std::move(cond));
  return CausalExpr::probability(from.outcome(), std::move(cond));
}

namespace {

// Picks the direction whose syntactic precondition z satisfies.
bool guard_inferred(const Dag& g, const CausalExpr& e, const VariableSet& z,
                    std::initializer_list<RuleId> directions) {
  if (z.empty()) throw DisjointnessError("moved set must be non-empty");
  RuleEngine engine(g, RuleConfig{});
  RuleEngine::Shape s = engine.shape_of(e);
  NodeSet zm = g.mask(z);
  if (zm.intersects(s.outcome)) throw DisjointnessError("moved set overlaps the outcome");
  for (RuleId r : directions) {
    if (engine.syntactically_applicable(r, s, zm)) return engine.guard(r, s, zm);
  }
  throw DisjointnessError("moved set does not fit any direction of the rule");
}

}  // namespace

bool guard_rule1(const Dag& g, const CausalExpr& e, const VariableSet& z) {
  return guard_inferred(g, e, z, {RuleId::R1_DeleteObs, RuleId::R1_InsertObs});
}

bool guard_rule2(const Dag& g, const CausalExpr& e, const VariableSet& z) {
  return guard_inferred(g, e, z, {RuleId::R2_ActionToObs, RuleId::R2_ObsToAction});
}

bool guard_rule3(const Dag& g, const CausalExpr& e, const VariableSet& z) {
  return guard_inferred(g, e, z, {RuleId::R3_DeleteAction, RuleId::R3_InsertAction});
}

std::optional<CausalExpr> apply_rule(const Dag& g, const CausalExpr& e, RuleId rule, const VariableSet& moved) {
  RuleEngine engine(g, RuleConfig{});
  RuleEngine::Shape s = engine.shape_of(e);
  NodeSet zm = g.mask(moved);
  if (!engine.syntactically_applicable(rule, s, zm)) return std::nullopt;
  if (!engine.guard(rule, s, zm)) return std::nullopt;
  return engine.materialize(e, rule, zm);
}

std::vector<RuleApplication> successors(const Dag& g, const CausalExpr& e, const RuleConfig& cfg) {
  GuardCache cache;
  RuleEngine engine(g, cfg, &cache);
  std::vector<RuleEngine::Move> moves;
  engine.moves(engine.shape_of(e), moves);
  std::vector<RuleApplication> out;
  out.reserve(moves.size());
  for (const auto& m : moves) {
    out.push_back({m.rule, g.variables(m.moved), engine.materialize(e, m.rule, m.moved)});
  }
  return out;
}

}  // namespace dover
