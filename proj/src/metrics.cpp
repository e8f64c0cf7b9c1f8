#include "dover/metrics.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "dover/error.hpp"

namespace dover {

using json = nlohmann::ordered_json;

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

std::map<std::vector<std::string>, int> ngrams(const std::vector<std::string>& t, std::size_t n) {
  std::map<std::vector<std::string>, int> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) out[{t.begin() + i, t.begin() + i + n}]++;
  return out;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    std::size_t j = i + 1;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (ident_start(c)) {
      while (j < text.size() && ident_char(text[j])) ++j;
    } else if (digit(c)) {
      while (j < text.size() && digit(text[j])) ++j;
    }
    out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

int exact_match(const CausalExpr& a, const CausalExpr& b) { return canonicalize(a) == canonicalize(b) ? 1 : 0; }

int exact_match(const Compound& a, const Compound& b) {
  auto pairs = align_components(a, b);
  if (!pairs) return 0;
  for (const auto& [x, y] : *pairs)
    if (!exact_match(x, y)) return 0;
  return 1;
}

double token_f1(std::string_view a, std::string_view b) {
  auto ta = tokenize(a), tb = tokenize(b);
  if (ta.empty() && tb.empty()) return 1.0;
  if (ta.empty() || tb.empty()) return 0.0;
  std::map<std::string, int> ca, cb;
  for (auto& t : ta) ca[t]++;
  for (auto& t : tb) cb[t]++;
  int common = 0;
  for (const auto& [tok, n] : ca) {
    auto it = cb.find(tok);
    if (it != cb.end()) common += std::min(n, it->second);
  }
  if (common == 0) return 0.0;
  double p = static_cast<double>(common) / static_cast<double>(ta.size());
  double r = static_cast<double>(common) / static_cast<double>(tb.size());
  return 2 * p * r / (p + r);
}

double bleu(std::string_view candidate, std::string_view reference, int max_n) {
  if (max_n < 1) throw ConfigError("bleu max_n must be at least 1");
  auto c = tokenize(candidate), r = tokenize(reference);
  if (c.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    auto cn = ngrams(c, static_cast<std::size_t>(n));
    auto rn = ngrams(r, static_cast<std::size_t>(n));
    double total = c.size() >= static_cast<std::size_t>(n) ? static_cast<double>(c.size() - n + 1) : 0.0;
    double matched = 0.0;
    for (const auto& [g, k] : cn) {
      auto it = rn.find(g);
      if (it != rn.end()) matched += std::min(k, it->second);
    }
    double p = n == 1 ? matched / total : (matched + 1.0) / (total + 1.0);
    if (p == 0.0) return 0.0;
    log_sum += std::log(p);
  }
  double bp = c.size() >= r.size() ? 1.0 : std::exp(1.0 - static_cast<double>(r.size()) / static_cast<double>(c.size()));
  return bp * std::exp(log_sum / max_n);
}

std::optional<std::vector<std::pair<CausalExpr, CausalExpr>>> align_components(const Compound& a,
                                                                               const Compound& b) {
  std::vector<std::pair<CausalExpr, CausalExpr>> out;
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    std::vector<const CausalExpr*> xa, xb;
    for (const auto& c : a)
      if (c.sign == s) xa.push_back(&c.expr);
    for (const auto& c : b)
      if (c.sign == s) xb.push_back(&c.expr);
    if (xa.size() != xb.size()) return std::nullopt;
    for (std::size_t i = 0; i < xa.size(); ++i) out.emplace_back(*xa[i], *xb[i]);
  }
  return out;
}

MetricReport evaluate_item(const EvalItem& item, int max_depth, const SearchConfig& cfg) {
  MetricReport r;
  r.id = item.id;
  r.notes = item.notes;
  if (!item.gold || !item.pred) {
    r.verdict = "error";
    r.notes.push_back(!item.gold ? "gold expression unavailable" : "prediction unavailable");
    return r;
  }
  r.exact_match = exact_match(*item.gold, *item.pred);
  r.token_f1 = token_f1(item.pred_text, item.gold_text);
  r.bleu = bleu(item.pred_text, item.gold_text);

  auto pairs = align_components(*item.gold, *item.pred);
  if (!pairs) {
    r.verdict = "arity-mismatch";
    r.notes.push_back("prediction and gold differ in their signed components");
    return r;
  }
  if (!item.graph) {
    r.verdict = "error";
    r.notes.push_back("no graph to verify against");
    return r;
  }
  r.verified = true;
  r.verdict = "derivable";
  for (const auto& [gold, pred] : *pairs) {
    try {
      auto v = verify(*item.graph, gold, pred, max_depth, cfg);
      if (auto* d = std::get_if<Derivable>(&v.outcome)) {
        r.proof_steps += d->proof.size();
        continue;
      }
      r.verified = false;
      r.verdict = std::string(outcome_name(v.outcome));
    } catch (const Error& e) {
      r.verified = false;
      r.verdict = "error";
      r.notes.push_back(e.what());
    }
    break;
  }
  if (!r.verified) r.proof_steps = 0;
  return r;
}

BatchReport evaluate_batch(const std::vector<EvalItem>& items, int max_depth, const SearchConfig& cfg) {
  BatchReport out;
  for (const auto& item : items) out.items.push_back(evaluate_item(item, max_depth, cfg));
  auto& a = out.aggregate;
  a.items = out.items.size();
  if (a.items == 0) return out;
  for (const auto& r : out.items) {
    a.exact_match += r.exact_match;
    a.token_f1 += r.token_f1;
    a.bleu += r.bleu;
    a.verifier += r.verified ? 1.0 : 0.0;
  }
  double n = static_cast<double>(a.items);
  a.exact_match /= n;
  a.token_f1 /= n;
  a.bleu /= n;
  a.verifier /= n;
  return out;
}

std::string aggregate_table(const Aggregate& a) {
  return "items\texact_match\ttoken_f1\tbleu\tverifier\n" + std::to_string(a.items) + "\t" +
         fixed(a.exact_match) + "\t" + fixed(a.token_f1) + "\t" + fixed(a.bleu) + "\t" + fixed(a.verifier) + "\n";
}

std::string report_json(const BatchReport& r) {
  json skipped = json::array();
  for (const auto& [id, reason] : r.excluded.skipped) skipped.push_back({{"id", id}, {"reason", reason}});
  const auto& a = r.aggregate;
  json j = {
      {"items", a.items},
      {"accuracy",
       {{"exact_match", a.exact_match}, {"token_f1", a.token_f1}, {"bleu", a.bleu}, {"verifier", a.verifier}}},
      {"skipped", skipped},
      {"unmatched", r.excluded.unmatched},
      {"extra", r.excluded.extra},
  };
  return j.dump(2) + "\n";
}

std::string item_records(const BatchReport& r) {
  std::string out;
  for (const auto& m : r.items) {
    json j = {
        {"id", m.id},           {"exact_match", m.exact_match}, {"token_f1", m.token_f1},
        {"bleu", m.bleu},       {"verifier", m.verified ? 1 : 0}, {"verdict", m.verdict},
        {"proof_steps", m.proof_steps}, {"notes", m.notes},
    };
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace dover
