#include "dover/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dover/error.hpp"
#include "dover/synth.hpp"

namespace dover {

using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Python's json module writes NaN / Infinity bare; JSON has no such
// literals. Outside strings they become null.
std::string nan_to_null(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      out += c;
      if (c == '\\' && i + 1 < text.size()) out += text[++i];
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
      out += c;
      continue;
    }
    std::size_t j = i + (c == '-' ? 1 : 0);
    for (std::string_view word : {"NaN", "Infinity"}) {
      if (text.substr(j, word.size()) == word) {
        out += "null";
        i = j + word.size() - 1;
        c = 0;
        break;
      }
    }
    if (c) out += c;
  }
  return out;
}

bool has_nan_token(std::string_view s) {
  for (const auto& t : tokenize(s))
    if (lower(t) == "nan") return true;
  return false;
}

std::string id_of(const json& j, std::size_t index) {
  auto it = j.find("id");
  if (it == j.end()) throw SchemaError(index, "missing field 'id'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw SchemaError(index, "'id' must be a string or an integer");
}

std::optional<std::string> optional_string(const json& j, const char* name, std::size_t index) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(index, std::string("'") + name + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> node_list(const json& j, std::size_t index) {
  auto it = j.find("nodes");
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_array()) throw SchemaError(index, "'nodes' must be an array of names");
  std::vector<std::string> out;
  for (const auto& n : *it) {
    if (!n.is_string()) throw SchemaError(index, "'nodes' must be an array of names");
    out.push_back(n.get<std::string>());
  }
  return out;
}

bool uses_expectation(const Compound& c) {
  return std::any_of(c.begin(), c.end(), [](const SignedExpr& s) { return s.expr.form() == Form::Expectation; });
}

BenchItem bench_item(const json& j, std::size_t index) {
  if (!j.is_object()) throw SchemaError(index, "item is not an object");
  BenchItem b;
  b.id = id_of(j, index);
  b.prompt = optional_string(j, "prompt", index).value_or("");
  if (!j.contains("expression")) throw SchemaError(index, "missing field 'expression'");
  if (!j.contains("graph")) throw SchemaError(index, "missing field 'graph'");
  auto expr = optional_string(j, "expression", index);
  auto graph = optional_string(j, "graph", index);
  b.expression_text = expr.value_or("");
  b.graph_text = graph.value_or("");

  if (!expr || trim(*expr).empty() || has_nan_token(*expr)) {
    b.skip_reason = "gold expression missing or NaN";
    return b;
  }
  if (!graph || has_nan_token(*graph)) {
    b.skip_reason = "gold graph missing or NaN";
    return b;
  }
  try {
    b.graph = from_edge_list(*graph, node_list(j, index));
  } catch (const Error& e) {
    b.skip_reason = std::string("gold graph: ") + e.what();
    return b;
  }
  try {
    b.gold = rewrite_expectations(parse_compound(*expr));
  } catch (const Error& e) {
    b.skip_reason = std::string("gold expression: ") + e.what();
    return b;
  }
  for (const auto& c : *b.gold) {
    for (const auto& v : c.expr.variables()) {
      if (!b.graph->index_of(v.name())) {
        b.skip_reason = "gold expression uses '" + v.name() + "', which is not in the gold graph";
        return b;
      }
    }
  }
  return b;
}

struct LabeledLine {
  std::string text;
  std::size_t count = 0;
};

// Text after `label` on the first line that starts with it (ignoring case,
// leading space and markdown emphasis).
LabeledLine find_labeled(std::string_view text, std::string_view label) {
  LabeledLine out;
  std::string want = lower(label);
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::size_t b = 0;
    while (b < line.size() && (std::isspace(static_cast<unsigned char>(line[b])) || line[b] == '*')) ++b;
    if (lower(std::string_view(line).substr(b, want.size())) != want) continue;
    if (out.count++ == 0) out.text = line.substr(b + want.size());
  }
  return out;
}

// Trailing punctuation and wrapping emphasis or code quotes around a value.
std::string clean_value(std::string s, std::string_view what, std::vector<std::string>& notes) {
  std::string t = trim(s);
  std::string before = t;
  bool changed = true;
  while (changed && !t.empty()) {
    changed = false;
    for (std::string_view wrap : {"**", "`", "$"}) {
      if (t.size() >= wrap.size() && t.compare(0, wrap.size(), wrap) == 0) {
        t = trim(t.substr(wrap.size()));
        changed = true;
      }
      if (t.size() >= wrap.size() && t.compare(t.size() - wrap.size(), wrap.size(), wrap) == 0) {
        t = trim(t.substr(0, t.size() - wrap.size()));
        changed = true;
      }
    }
    if (!t.empty() && (t.back() == '.' || t.back() == ';')) {
      t.pop_back();
      t = trim(t);
      changed = true;
    }
  }
  if (t != before) notes.push_back(std::string(what) + ": stripped surrounding punctuation");
  return t;
}

void parse_expression_into(ModelOutput& m, const std::string& text) {
  m.expression_text = text;
  try {
    Compound c = parse_compound(text);
    if (uses_expectation(c)) m.notes.push_back("expression: rewrote expectation as probability");
    m.expression = rewrite_expectations(c);
  } catch (const Error& e) {
    m.notes.push_back(std::string("expression: ") + e.what());
  }
}

void parse_graph_into(ModelOutput& m, const std::string& text, const std::vector<std::string>& nodes = {}) {
  m.graph_text = text;
  try {
    m.graph = from_edge_list(text, nodes);
  } catch (const Error& e) {
    m.notes.push_back(std::string("graph: ") + e.what());
  }
}

}  // namespace

std::vector<BenchItem> parse_bench(std::string_view text) {
  std::string body = trim(text);
  std::vector<BenchItem> out;
  if (!body.empty() && body.front() == '{') {
    std::istringstream in(body);
    for (const auto& p : parse_dataset(in)) {
      BenchItem b;
      b.id = p.id;
      b.expression_text = render(p.phi);
      b.graph_text = p.dag.to_edge_list();
      b.gold = Compound{{Sign::Plus, p.phi}};
      b.graph = p.dag;
      out.push_back(std::move(b));
    }
    return out;
  }
  json j = json::parse(nan_to_null(body), nullptr, false);
  if (j.is_discarded()) throw SchemaError(0, "not valid JSON");
  if (!j.is_array()) throw SchemaError(0, "bench file must hold a JSON array");
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(bench_item(j[i], i));
  return out;
}

std::vector<BenchItem> load_bench_file(const std::string& path) { return parse_bench(read_file(path)); }

ModelOutput extract_model_output(std::string_view raw) {
  ModelOutput m;
  m.raw = std::string(raw);
  std::string_view region = raw;
  std::size_t sol = raw.rfind("Solution:");
  if (sol != std::string_view::npos) region = raw.substr(sol + 9);

  auto locate = [&](std::string_view label) {
    LabeledLine l = find_labeled(region, label);
    if (l.count == 0 && region.size() != raw.size()) {
      l = find_labeled(raw, label);
      if (l.count) m.notes.push_back(std::string(label) + " found only before 'Solution:'");
    }
    if (l.count > 1) m.notes.push_back(std::string(label) + " appears " + std::to_string(l.count) + " times; used the first");
    return l;
  };

  LabeledLine expr = locate("Expression:");
  if (expr.count == 0) {
    m.notes.push_back("no 'Expression:' line");
  } else {
    parse_expression_into(m, clean_value(expr.text, "expression", m.notes));
  }
  LabeledLine graph = locate("Graphical Representation:");
  if (graph.count == 0) {
    m.notes.push_back("no 'Graphical Representation:' line");
  } else {
    parse_graph_into(m, clean_value(graph.text, "graph", m.notes));
  }
  return m;
}

std::vector<OutputRecord> parse_outputs(std::istream& in) {
  std::vector<OutputRecord> out;
  std::string line;
  for (std::size_t i = 0; std::getline(in, line); ++i) {
    if (trim(line).empty()) continue;
    json j = json::parse(nan_to_null(line), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw SchemaError(i, "not a JSON object");
    OutputRecord r;
    r.id = id_of(j, i);
    if (auto raw = optional_string(j, "output", i)) {
      r.output = extract_model_output(*raw);
    } else if (j.contains("psi")) {
      auto psi = optional_string(j, "psi", i);
      if (psi) parse_expression_into(r.output, *psi);
      if (auto g = optional_string(j, "graph", i)) parse_graph_into(r.output, *g, node_list(j, i));
    } else if (j.contains("expression")) {
      if (auto e = optional_string(j, "expression", i)) parse_expression_into(r.output, *e);
      else r.output.notes.push_back("expression missing");
      if (auto g = optional_string(j, "graph", i)) parse_graph_into(r.output, *g, node_list(j, i));
    } else {
      throw SchemaError(i, "record needs 'output', 'expression' or 'psi'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<OutputRecord> load_outputs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return parse_outputs(in);
}

std::string output_record(const OutputRecord& r) {
  nlohmann::ordered_json j = {
      {"id", r.id},
      {"expression", r.output.expression ? nlohmann::ordered_json(render(*r.output.expression))
                                         : nlohmann::ordered_json(nullptr)},
      {"graph", r.output.graph ? nlohmann::ordered_json(r.output.graph->to_edge_list())
                               : nlohmann::ordered_json(nullptr)},
      {"notes", r.output.notes},
  };
  return j.dump();
}

Joined join_outputs(const std::vector<BenchItem>& bench, const std::vector<OutputRecord>& outputs,
                    bool use_gold_graph) {
  Joined out;
  std::map<std::string, const OutputRecord*> by_id;
  std::map<std::string, bool> known;
  for (const auto& b : bench) known[b.id] = true;
  for (const auto& o : outputs) {
    if (!known.count(o.id)) {
      out.excluded.extra.push_back(o.id);
      continue;
    }
    if (!by_id.emplace(o.id, &o).second) out.excluded.extra.push_back(o.id);
  }
  for (const auto& b : bench) {
    if (b.skip_reason) {
      out.excluded.skipped.emplace_back(b.id, *b.skip_reason);
      continue;
    }
    auto it = by_id.find(b.id);
    if (it == by_id.end()) {
      out.excluded.unmatched.push_back(b.id);
      continue;
    }
    const ModelOutput& m = it->second->output;
    EvalItem e;
    e.id = b.id;
    e.gold_text = b.expression_text;
    e.pred_text = m.expression_text;
    e.gold = b.gold;
    e.pred = m.expression;
    e.notes = m.notes;
    if (!use_gold_graph && m.graph) {
      e.graph = m.graph;
    } else {
      e.graph = b.graph;
      if (!use_gold_graph) e.notes.push_back("no model graph; verified against the gold graph");
    }
    out.items.push_back(std::move(e));
  }
  return out;
}

}  // namespace dover
