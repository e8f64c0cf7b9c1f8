#include "dover/synth.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dover/error.hpp"

namespace dover {

using json = nlohmann::ordered_json;

namespace {

// Closure depth used to certify small negatives; far beyond the diameter of
// any derivation graph on four variables.
constexpr int kCertifyDepth = 64;
constexpr std::size_t kCertifyMaxNodes = 4;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string pair_id(std::size_t i) {
  std::string digits = std::to_string(i);
  return "pair-" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}

// Same expression with var moved to a different role (absent, observed or
// intervened).
CausalExpr with_role(const CausalExpr& e, const Variable& var, int role) {
  std::vector<Term> cond;
  for (const auto& t : e.conditioning())
    if (t.var != var) cond.push_back(t);
  if (role == 1) cond.push_back(Term{TermKind::Observed, var, std::nullopt});
  if (role == 2) cond.push_back(Term{TermKind::Intervened, var, std::nullopt});
  if (e.form() == Form::Expectation) return CausalExpr::expectation(e.outcome().front(), cond);
  return CausalExpr::probability(e.outcome(), cond);
}

int role_of(const CausalExpr& e, const Variable& var) {
  const Term* t = e.find(var);
  if (!t) return 0;
  return t->kind == TermKind::Observed ? 1 : 2;
}

// Perturbs one conditioning role of psi. Small graphs must be certified
// outside phi's full closure; returns false when no perturbation survives.
bool make_negative(SynthPair& p, Rng& rng) {
  std::vector<std::pair<Variable, int>> options;
  VariableSet outcome = p.psi.outcome_vars();
  for (const auto& name : p.dag.nodes()) {
    Variable v(name);
    if (outcome.count(v)) continue;
    int cur = role_of(p.psi, v);
    for (int r = 0; r < 3; ++r)
      if (r != cur) options.emplace_back(v, r);
  }
  rng.shuffle(options);
  if (options.empty()) return false;

  if (p.dag.size() > kCertifyMaxNodes) {
    p.psi = with_role(p.psi, options.front().first, options.front().second);
    p.label = PairLabel::UnverifiedNegative;
    p.ground_truth = {};
    return true;
  }
  SearchConfig full;
  Closure c = reachable_closure(p.dag, p.phi, kCertifyDepth, full);
  for (const auto& [v, r] : options) {
    CausalExpr cand = with_role(p.psi, v, r);
    if (c.contains(canonicalize(cand))) continue;
    p.psi = cand;
    p.label = PairLabel::Negative;
    p.ground_truth = {};
    return true;
  }
  return false;
}

json trace_json(const Derivation& d) {
  json out = json::array();
  for (const auto& s : d.steps) {
    json moved = json::array();
    for (const auto& v : s.moved) moved.push_back(v.name());
    out.push_back({{"rule", std::string(to_string(s.rule))}, {"moved", moved}});
  }
  return out;
}

}  // namespace

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    std::uint64_t x = eng_();
    if (x >= threshold) return x % n;
  }
}

int Rng::uniform(int lo, int hi) {
  return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

bool Rng::bernoulli(double p) {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53 < p;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index));
}

void SynthConfig::validate() const {
  if (vars.lo < 2 || vars.hi < vars.lo) throw ConfigError("variable range must satisfy 2 <= lo <= hi");
  if (static_cast<std::size_t>(vars.hi) > kMaxNodes) throw ConfigError("too many variables");
  if (!(edge_prob > 0.0 && edge_prob < 1.0)) throw ConfigError("edge probability must lie in (0, 1)");
  if (rule_apps.lo < 1 || rule_apps.hi < rule_apps.lo)
    throw ConfigError("rule application range must satisfy 1 <= lo <= hi");
  if (!(negative_fraction >= 0.0 && negative_fraction <= 1.0))
    throw ConfigError("negative fraction must lie in [0, 1]");
  if (max_attempts < 1) throw ConfigError("max_attempts must be positive");
  rules.validate();
}

std::string_view to_string(PairLabel l) {
  switch (l) {
    case PairLabel::Derivable: return "derivable";
    case PairLabel::Negative: return "negative";
    case PairLabel::UnverifiedNegative: return "unverified-negative";
  }
  return "";
}

PairLabel label_from_string(std::string_view s) {
  if (s == "derivable") return PairLabel::Derivable;
  if (s == "negative") return PairLabel::Negative;
  if (s == "unverified-negative") return PairLabel::UnverifiedNegative;
  throw ConfigError("unknown label '" + std::string(s) + "'");
}

Dag sample_dag(int n, double p, Rng& rng) {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  for (int i = 1; i <= n; ++i) nodes.push_back("v" + std::to_string(i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) edges.emplace_back(nodes[i], nodes[j]);
  return Dag(std::move(nodes), std::move(edges));
}

Dag sample_dag(const SynthConfig& cfg, Rng& rng) {
  int n = rng.uniform(cfg.vars.lo, cfg.vars.hi);
  return sample_dag(n, cfg.edge_prob, rng);
}

CausalExpr sample_base_expression(const Dag& g, Rng& rng) {
  const auto& nodes = g.nodes();
  std::size_t y = rng.below(nodes.size());
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (i != y) rest.push_back(nodes[i]);
  rng.shuffle(rest);
  int n_rest = static_cast<int>(rest.size());
  int k = rng.uniform(0, n_rest);
  int m = rng.uniform(0, n_rest - k);
  std::vector<Term> cond;
  for (int i = 0; i < k + m; ++i) {
    auto& name = rest[static_cast<std::size_t>(i)];
    cond.push_back(i < k ? Term::intervened(name) : Term::observed(name));
  }
  return CausalExpr::probability({{Variable(nodes[y]), std::nullopt}}, std::move(cond));
}

std::variant<SampledDerivation, GenerationFailed> sample_derivation(const Dag& g, const CausalExpr& phi, int len,
                                                                    Rng& rng, const RuleConfig& rules) {
  SampledDerivation out{phi, {}};
  std::vector<std::string> seen{canonicalize(phi).key};
  for (int step = 0; step < len; ++step) {
    std::vector<RuleApplication> fresh;
    for (auto& a : successors(g, out.psi, rules)) {
      if (std::find(seen.begin(), seen.end(), canonicalize(a.result).key) == seen.end())
        fresh.push_back(std::move(a));
    }
    if (fresh.empty()) return GenerationFailed{step};
    auto& pick = fresh[rng.below(fresh.size())];
    seen.push_back(canonicalize(pick.result).key);
    out.proof.steps.push_back({pick.rule, pick.moved, out.psi, pick.result});
    out.psi = pick.result;
  }
  return out;
}

Dataset generate_dataset(const SynthConfig& cfg, std::size_t n_pairs) {
  cfg.validate();
  Dataset ds;
  auto& st = ds.stats;
  double edge_sum = 0.0, node_sum = 0.0;
  st.edges_min = std::numeric_limits<std::size_t>::max();
  st.nodes_min = std::numeric_limits<std::size_t>::max();

  for (std::size_t i = 0; i < n_pairs; ++i) {
    std::uint64_t seed = derive_seed(cfg.seed, i);
    Rng rng(seed);
    bool negative = rng.bernoulli(cfg.negative_fraction);
    std::optional<SynthPair> made;
    for (int attempt = 0; attempt < cfg.max_attempts && !made; ++attempt) {
      Dag g = sample_dag(cfg, rng);
      CausalExpr phi = sample_base_expression(g, rng);
      int len = rng.uniform(cfg.rule_apps.lo, cfg.rule_apps.hi);
      auto r = sample_derivation(g, phi, len, rng, cfg.rules);
      if (auto* ok = std::get_if<SampledDerivation>(&r)) {
        SynthPair p{pair_id(i), std::move(g), phi, ok->psi, std::move(ok->proof), PairLabel::Derivable, seed};
        if (!negative || make_negative(p, rng)) {
          made = std::move(p);
          break;
        }
      }
      ++st.resamples;
    }
    if (!made) throw BudgetExceeded("pair " + std::to_string(i) + ": no valid sample within max_attempts");

    const SynthPair& p = *made;
    std::size_t e = p.dag.edge_count(), n = p.dag.size();
    edge_sum += static_cast<double>(e);
    node_sum += static_cast<double>(n);
    st.edges_min = std::min(st.edges_min, e);
    st.edges_max = std::max(st.edges_max, e);
    st.nodes_min = std::min(st.nodes_min, n);
    st.nodes_max = std::max(st.nodes_max, n);
    switch (p.label) {
      case PairLabel::Derivable: ++st.derivable; break;
      case PairLabel::Negative: ++st.negative; break;
      case PairLabel::UnverifiedNegative: ++st.unverified_negative; break;
    }
    for (const auto& s : p.ground_truth.steps) ++st.rule_counts[static_cast<std::size_t>(s.rule)];
    st.total_steps += p.ground_truth.size();
    ds.pairs.push_back(std::move(*made));
  }
  st.pairs = ds.pairs.size();
  if (st.pairs == 0) {
    st.edges_min = st.nodes_min = 0;
  } else {
    st.edges_mean = edge_sum / static_cast<double>(st.pairs);
    st.nodes_mean = node_sum / static_cast<double>(st.pairs);
  }
  return ds;
}

std::string stats_to_json(const DatasetStats& s) {
  json rules = json::object();
  for (RuleId r : kAllRules) rules[std::string(to_string(r))] = s.rule_counts[static_cast<std::size_t>(r)];
  json j = {
      {"pairs", s.pairs},
      {"derivable", s.derivable},
      {"negative", s.negative},
      {"unverified_negative", s.unverified_negative},
      {"resamples", s.resamples},
      {"edges", {{"mean", s.edges_mean}, {"min", s.edges_min}, {"max", s.edges_max}}},
      {"nodes", {{"mean", s.nodes_mean}, {"min", s.nodes_min}, {"max", s.nodes_max}}},
      {"total_steps", s.total_steps},
      {"rule_counts", rules},
  };
  return j.dump(2) + "\n";
}

std::string dataset_record(const SynthPair& p) {
  json j = {
      {"id", p.id},
      {"graph", p.dag.to_edge_list()},
      {"nodes", p.dag.nodes()},
      {"phi", render(p.phi)},
      {"psi", render(p.psi)},
      {"trace", trace_json(p.ground_truth)},
      {"label", std::string(to_string(p.label))},
      {"seed", p.seed},
  };
  return j.dump();
}

void write_dataset(const std::vector<SynthPair>& pairs, std::ostream& out) {
  for (const auto& p : pairs) out << dataset_record(p) << '\n';
}

std::size_t emit_dataset(const std::vector<SynthPair>& pairs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  write_dataset(pairs, out);
  out.flush();
  if (!out) throw IoError(path, "write failed");
  return pairs.size();
}

SynthPair parse_dataset_record(std::string_view line, std::size_t index) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw SchemaError(index, "not a JSON object");
  auto field = [&](const char* name) -> const json& {
    auto it = j.find(name);
    if (it == j.end()) throw SchemaError(index, std::string("missing field '") + name + "'");
    return *it;
  };
  try {
    SynthPair p{
        j.contains("id") ? j["id"].get<std::string>() : pair_id(index),
        from_edge_list(field("graph").get<std::string>(), field("nodes").get<std::vector<std::string>>()),
        parse_expression(field("phi").get<std::string>()),
        parse_expression(field("psi").get<std::string>()),
        {},
        label_from_string(field("label").get<std::string>()),
        field("seed").get<std::uint64_t>(),
    };
    CausalExpr cur = p.phi;
    for (const auto& step : field("trace")) {
      auto rule = rule_from_string(step.at("rule").get<std::string>());
      if (!rule) throw SchemaError(index, "unknown rule '" + step.at("rule").get<std::string>() + "'");
      VariableSet moved;
      for (const auto& v : step.at("moved")) moved.insert(Variable(v.get<std::string>()));
      auto next = apply_rule(p.dag, cur, *rule, moved);
      if (!next) throw SchemaError(index, "trace step " + std::to_string(p.ground_truth.size()) + " does not apply");
      p.ground_truth.steps.push_back({*rule, moved, cur, *next});
      cur = *next;
    }
    if (p.label == PairLabel::Derivable && canonicalize(cur, false) != canonicalize(p.psi, false))
      throw SchemaError(index, "trace does not end at psi");
    return p;
  } catch (const json::exception& e) {
    throw SchemaError(index, e.what());
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(index, e.what());
  }
}

std::vector<SynthPair> parse_dataset(std::istream& in) {
  std::vector<SynthPair> out;
  std::string line;
  for (std::size_t i = 0; std::getline(in, line); ++i) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_dataset_record(line, i));
  }
  return out;
}

std::vector<SynthPair> read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return parse_dataset(in);
}

}  // namespace dover
