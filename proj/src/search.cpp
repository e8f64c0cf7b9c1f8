#include "dover/search.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "dover/error.hpp"

namespace dover {

namespace {

using Shape = RuleEngine::Shape;
using Clock = std::chrono::steady_clock;

struct ShapeHash {
  std::size_t operator()(const Shape& s) const {
    std::uint64_t h = s.outcome.bits() * 0x9e3779b97f4a7c15ull;
    h ^= (s.actions.bits() + 0x632be59bd9b4e019ull) * 0xbf58476d1ce4e5b9ull + (h >> 29);
    h ^= (s.observed.bits() + 0x8cb92ba72f3d8dd7ull) * 0x94d049bb133111ebull + (h >> 31);
    h ^= static_cast<std::uint64_t>(s.form);
    return static_cast<std::size_t>(h ^ (h >> 32));
  }
};

struct Node {
  Shape shape;
  std::int64_t parent;
  RuleId rule;
  NodeSet moved;
  int depth;
};

// Visited set keyed by shape when values are erased, by the full canonical
// string otherwise. Nodes keep expressions only in the latter mode.
class Visited {
 public:
  explicit Visited(bool erase) : erase_(erase) {}

  bool insert(const Shape& s, const CausalExpr* e) {
    if (erase_) return shapes_.insert(s).second;
    return keys_.insert(canonicalize(*e, false).key).second;
  }

 private:
  bool erase_;
  std::unordered_set<Shape, ShapeHash> shapes_;
  std::unordered_set<std::string> keys_;
};

void require_vars(const Dag& g, const CausalExpr& e) {
  for (const auto& v : e.variables()) g.require(v.name());
}

Derivation rebuild(const std::vector<Node>& nodes, std::int64_t last, const CausalExpr& phi,
                   const RuleEngine& engine) {
  std::vector<std::int64_t> path;
  for (std::int64_t i = last; i > 0; i = nodes[static_cast<std::size_t>(i)].parent) path.push_back(i);
  std::reverse(path.begin(), path.end());
  Derivation d;
  CausalExpr cur = phi;
  for (std::int64_t i : path) {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    CausalExpr next = engine.materialize(cur, n.rule, n.moved);
    d.steps.push_back({n.rule, engine.graph().variables(n.moved), cur, next});
    cur = std::move(next);
  }
  return d;
}

}  // namespace

std::string_view outcome_name(const VerificationOutcome& o) {
  if (std::holds_alternative<Derivable>(o)) return "derivable";
  if (std::holds_alternative<Exhausted>(o)) return "exhausted";
  return "not-derivable-within-depth";
}

VerifyResult verify(const Dag& g, const CausalExpr& phi, const CausalExpr& psi, int max_depth,
                    const SearchConfig& cfg) {
  if (max_depth < 0) throw ConfigError("max_depth must be non-negative");
  require_vars(g, phi);
  require_vars(g, psi);

  const auto t0 = Clock::now();
  GuardCache local;
  RuleEngine engine(g, cfg.rules, cfg.shared_cache ? cfg.shared_cache : &local);
  VerifyResult result{NotDerivableWithinDepth{max_depth}, {}};
  auto finish = [&](VerificationOutcome o) {
    result.outcome = std::move(o);
    result.stats.guard_evaluations = engine.guard_evaluations();
    result.stats.cache_hits = engine.cache_hits();
    result.stats.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0);
    return result;
  };

  const bool erase = cfg.erase_values;
  const Shape target_shape = engine.shape_of(psi);
  const std::string target_key = canonicalize(psi, erase).key;

  std::vector<Node> nodes;
  std::vector<CausalExpr> exprs;  // parallel to nodes when values are kept
  Visited visited(erase);

  nodes.push_back({engine.shape_of(phi), -1, RuleId::ExpectationRewrite, {}, 0});
  if (!erase) exprs.push_back(phi);
  visited.insert(nodes[0].shape, &phi);
  result.stats.visited = 1;
  if (canonicalize(phi, erase).key == target_key) return finish(Derivable{});

  bool cut_off = false;
  std::vector<RuleEngine::Move> moves;
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    const Node cur = nodes[head];
    if (cur.depth >= max_depth) {
      cut_off = true;
      continue;
    }
    if (result.stats.expanded_nodes >= cfg.max_expansions) {
      result.stats.budget_exhausted = true;
      return finish(NotDerivableWithinDepth{max_depth});
    }
    ++result.stats.expanded_nodes;
    moves.clear();
    engine.moves(cur.shape, moves);
    for (const auto& m : moves) {
      Node next{m.result, static_cast<std::int64_t>(head), m.rule, m.moved, cur.depth + 1};
      bool hit;
      if (erase) {
        if (!visited.insert(m.result, nullptr)) continue;
        hit = m.result == target_shape;
      } else {
        CausalExpr e = engine.materialize(exprs[head], m.rule, m.moved);
        if (!visited.insert(m.result, &e)) continue;
        hit = canonicalize(e, false).key == target_key;
        exprs.push_back(std::move(e));
      }
      nodes.push_back(next);
      ++result.stats.visited;
      if (hit) {
        return finish(Derivable{rebuild(nodes, static_cast<std::int64_t>(nodes.size() - 1), phi, engine)});
      }
    }
    result.stats.max_frontier = std::max<std::uint64_t>(result.stats.max_frontier, nodes.size() - head - 1);
  }
  if (cut_off) return finish(NotDerivableWithinDepth{max_depth});
  return finish(Exhausted{});
}

ReplayResult replay(const Dag& g, const Derivation& d) {
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    const ProofStep& step = d.steps[i];
    auto fail = [&](std::string why) { return ReplayResult{false, i, std::move(why)}; };
    if (i > 0 && !(d.steps[i - 1].to == step.from)) return fail("step does not start where the previous one ended");
    std::optional<CausalExpr> got;
    try {
      got = apply_rule(g, step.from, step.rule, step.moved);
    } catch (const Error& err) {
      return fail(err.what());
    }
    if (!got) return fail(std::string(to_string(step.rule)) + " is not applicable with this moved set");
    if (!(*got == step.to)) return fail("rewrite yields " + render(*got) + ", step claims " + render(step.to));
  }
  return {};
}

ReplayResult replay(const Dag& g, const Derivation& d, const CausalExpr& phi, const CausalExpr& psi,
                    bool erase_values) {
  if (d.empty()) {
    if (canonicalize(phi, erase_values) == canonicalize(psi, erase_values)) return {};
    return {false, std::nullopt, "empty derivation but endpoints differ"};
  }
  if (!(d.steps.front().from == phi)) return {false, 0, "derivation does not start at phi"};
  ReplayResult r = replay(g, d);
  if (!r) return r;
  if (canonicalize(d.steps.back().to, erase_values) != canonicalize(psi, erase_values)) {
    return {false, d.size() - 1, "derivation does not end at psi"};
  }
  return r;
}

std::optional<int> Closure::distance(const CanonicalKey& k) const {
  auto it = dist_.find(k.key);
  if (it == dist_.end()) return std::nullopt;
  return it->second;
}

Closure reachable_closure(const Dag& g, const CausalExpr& phi, int max_depth, const SearchConfig& cfg,
                          std::size_t node_cap) {
  if (max_depth < 0) throw ConfigError("max_depth must be non-negative");
  require_vars(g, phi);
  GuardCache cache;
  RuleEngine engine(g, cfg.rules, &cache);

  Closure c;
  std::vector<CausalExpr> layer{phi};
  c.dist_.emplace(canonicalize(phi, cfg.erase_values).key, 0);
  c.members_.push_back(phi);
  std::vector<RuleEngine::Move> moves;
  for (int depth = 1; depth <= max_depth && !layer.empty(); ++depth) {
    std::vector<CausalExpr> next;
    for (const auto& e : layer) {
      moves.clear();
      engine.moves(engine.shape_of(e), moves);
      for (const auto& m : moves) {
        CausalExpr r = engine.materialize(e, m.rule, m.moved);
        if (!c.dist_.emplace(canonicalize(r, cfg.erase_values).key, depth).second) continue;
        if (c.dist_.size() > node_cap) {
          throw BudgetExceeded("closure exceeds " + std::to_string(node_cap) + " expressions");
        }
        c.members_.push_back(r);
        next.push_back(std::move(r));
      }
    }
    layer = std::move(next);
  }
  return c;
}

}  // namespace dover
