#include "dover/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dover/error.hpp"
#include "dover/feedback.hpp"
#include "dover/ingest.hpp"
#include "dover/metrics.hpp"
#include "dover/search.hpp"
#include "dover/synth.hpp"

namespace dover {

using json = nlohmann::ordered_json;

namespace {

struct RuleFlags {
  bool no_insertions = false;
  int k_max = 2;
  bool keep_values = false;
  std::uint64_t max_expansions = SearchConfig{}.max_expansions;

  SearchConfig search() const {
    SearchConfig c;
    c.rules.insertions = !no_insertions;
    c.rules.k_max = k_max;
    c.erase_values = !keep_values;
    c.max_expansions = max_expansions;
    return c;
  }
};

struct Options {
  std::string graph;
  std::vector<std::string> nodes;
  std::string phi;
  std::string psi;
  int max_depth = 5;
  int eval_depth = 20;
  RuleFlags rules;
  bool json_lines = false;
  bool verbose = false;

  // generate
  std::size_t n_pairs = 1000;
  std::uint64_t seed = 0;
  int min_vars = 3, max_vars = 10;
  double edge_prob = 0.5;
  int min_steps = 1, max_steps = 4;
  double negative_fraction = 0.0;
  std::string out;
  std::string stats;

  // evaluate
  std::string bench;
  std::string outputs;
  bool use_gold_graph = false;

  // feedback
  bool first_only = false;
  std::string prompt;

  // closure
  std::size_t node_cap = 200'000;
};

void add_rule_flags(CLI::App* cmd, RuleFlags& r) {
  cmd->add_flag("--no-insertions", r.no_insertions, "Disable the insertion rules");
  cmd->add_option("--k-max", r.k_max, "Largest moved set per rule application")->capture_default_str();
  cmd->add_flag("--keep-values", r.keep_values, "Compare value annotations instead of erasing them");
  cmd->add_option("--max-expansions", r.max_expansions, "Search expansion budget")->capture_default_str();
}

void add_graph(CLI::App* cmd, Options& o) {
  cmd->add_option("--graph", o.graph, "Edge list, e.g. \"A->B,B->C\"")->required();
  cmd->add_option("--nodes", o.nodes, "Extra isolated nodes")->delimiter(',');
}

Dag parse_graph_flag(const Options& o) {
  try {
    return from_edge_list(o.graph, o.nodes);
  } catch (const Error& e) {
    throw Error(std::string("--graph: ") + e.what());
  }
}

CausalExpr parse_expr_flag(const char* flag, const std::string& text) {
  try {
    return parse_expression(text);
  } catch (const ParseError& e) {
    std::string caret(e.position(), ' ');
    throw Error(std::string(flag) + ": " + e.what() + "\n  " + text + "\n  " + caret + "^");
  } catch (const Error& e) {
    throw Error(std::string(flag) + ": " + e.what());
  }
}

json stats_json(const SearchStats& s, bool with_time) {
  json j = {
      {"expanded_nodes", s.expanded_nodes}, {"guard_evaluations", s.guard_evaluations},
      {"cache_hits", s.cache_hits},         {"max_frontier", s.max_frontier},
      {"visited", s.visited},               {"budget_exhausted", s.budget_exhausted},
  };
  if (with_time) j["wall_time_ms"] = std::chrono::duration<double, std::milli>(s.wall_time).count();
  return j;
}

std::string braces(const VariableSet& s) { return "{" + render_names(s) + "}"; }

int cmd_verify(const Options& o, std::ostream& out) {
  Dag g = parse_graph_flag(o);
  CausalExpr phi = parse_expr_flag("--phi", o.phi);
  CausalExpr psi = parse_expr_flag("--psi", o.psi);
  VerifyResult r = verify(g, phi, psi, o.max_depth, o.rules.search());
  const auto* d = std::get_if<Derivable>(&r.outcome);

  if (o.json_lines) {
    json steps = json::array();
    if (d) {
      for (const auto& s : d->proof.steps) {
        json moved = json::array();
        for (const auto& v : s.moved) moved.push_back(v.name());
        steps.push_back({{"rule", std::string(to_string(s.rule))}, {"moved", moved}, {"expression", render(s.to)}});
      }
    }
    json j = {{"verdict", std::string(outcome_name(r.outcome))}, {"steps", steps},
              {"stats", stats_json(r.stats, o.verbose)}};
    out << j.dump() << '\n';
  } else {
    if (d) {
      out << "derivable in " << d->proof.size() << (d->proof.size() == 1 ? " step\n" : " steps\n");
      std::size_t i = 0;
      out << "  0. " << render(phi) << '\n';
      for (const auto& s : d->proof.steps)
        out << "  " << ++i << ". " << to_string(s.rule) << ' ' << braces(s.moved) << ": " << render(s.to) << '\n';
    } else if (const auto* n = std::get_if<NotDerivableWithinDepth>(&r.outcome)) {
      out << "not derivable within depth " << n->depth;
      if (r.stats.budget_exhausted) out << " (expansion budget exhausted)";
      out << '\n';
    } else {
      out << "not derivable: every reachable expression was explored\n";
    }
    const auto& s = r.stats;
    out << "expanded " << s.expanded_nodes << ", guard evaluations " << s.guard_evaluations << ", cache hits "
        << s.cache_hits << ", max frontier " << s.max_frontier << ", visited " << s.visited;
    if (o.verbose) out << ", " << std::chrono::duration<double, std::milli>(s.wall_time).count() << " ms";
    out << '\n';
  }
  return d ? kExitOk : kExitNotDerivable;
}

int cmd_closure(const Options& o, std::ostream& out) {
  Dag g = parse_graph_flag(o);
  CausalExpr phi = parse_expr_flag("--phi", o.phi);
  Closure c = reachable_closure(g, phi, o.max_depth, o.rules.search(), o.node_cap);
  bool erase = !o.rules.keep_values;
  for (const auto& e : c.members()) {
    int d = *c.distance(canonicalize(e, erase));
    if (o.json_lines) {
      out << json{{"depth", d}, {"expression", render(e)}}.dump() << '\n';
    } else {
      out << d << '\t' << render(e) << '\n';
    }
  }
  if (!o.json_lines) out << c.size() << " expressions within depth " << o.max_depth << '\n';
  return kExitOk;
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
  SynthConfig cfg;
  cfg.vars = {o.min_vars, o.max_vars};
  cfg.edge_prob = o.edge_prob;
  cfg.rule_apps = {o.min_steps, o.max_steps};
  cfg.seed = o.seed;
  cfg.rules = o.rules.search().rules;
  cfg.negative_fraction = o.negative_fraction;
  Dataset ds = generate_dataset(cfg, o.n_pairs);

  std::string stats = stats_to_json(ds.stats);
  if (o.out.empty()) {
    write_dataset(ds.pairs, out);
  } else {
    emit_dataset(ds.pairs, o.out);
    out << "wrote " << ds.pairs.size() << " pairs to " << o.out << '\n';
  }
  std::string stats_path = o.stats.empty() && !o.out.empty() ? o.out + ".stats.json" : o.stats;
  if (stats_path.empty()) {
    err << stats;
  } else {
    std::ofstream f(stats_path, std::ios::binary);
    if (!(f << stats)) throw IoError(stats_path, "cannot write statistics");
    if (!o.out.empty()) out << "statistics in " << stats_path << '\n';
  }
  return kExitOk;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!(f << text)) throw IoError(p.string(), "cannot write");
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  auto bench = load_bench_file(o.bench);
  auto outputs = load_outputs_file(o.outputs);
  Joined joined = join_outputs(bench, outputs, o.use_gold_graph);
  BatchReport report = evaluate_batch(joined.items, o.eval_depth, o.rules.search());
  report.excluded = std::move(joined.excluded);

  if (!o.out.empty()) {
    std::filesystem::path dir(o.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(o.out, ec.message());
    write_file(dir / "items.jsonl", item_records(report));
    write_file(dir / "summary.tsv", aggregate_table(report.aggregate));
    write_file(dir / "report.json", report_json(report));
  }
  if (o.json_lines) {
    out << item_records(report);
  } else {
    out << aggregate_table(report.aggregate);
    const auto& x = report.excluded;
    out << "skipped " << x.skipped.size() << ", unmatched " << x.unmatched.size() << ", extra " << x.extra.size()
        << '\n';
    for (const auto& [id, why] : x.skipped) out << "skipped\t" << id << '\t' << why << '\n';
    for (const auto& id : x.unmatched) out << "unmatched\t" << id << '\n';
    for (const auto& id : x.extra) out << "extra\t" << id << '\n';
  }
  return kExitOk;
}

int cmd_feedback(const Options& o, std::ostream& out) {
  Dag g = parse_graph_flag(o);
  CausalExpr e = parse_expr_flag("--expr", o.phi);
  auto diags = suggest_fix(g, e, o.first_only);
  if (o.json_lines) {
    for (const auto& d : diags) out << diagnostic_record(d) << '\n';
  } else if (!o.prompt.empty()) {
    out << render_feedback_prompt(o.prompt, e, diags);
  } else {
    for (const auto& d : diags) out << d.message << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal expression derivability checker"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (INI or TOML)")->envname(kConfigEnv);
  Options o;

  auto* verify_cmd = app.add_subcommand("verify", "Search for a derivation of psi from phi");
  add_graph(verify_cmd, o);
  verify_cmd->add_option("--phi", o.phi, "Starting expression")->required();
  verify_cmd->add_option("--psi", o.psi, "Target expression")->required();
  verify_cmd->add_option("--max-depth", o.max_depth, "Largest proof length")->capture_default_str();

  auto* closure_cmd = app.add_subcommand("closure", "List every expression reachable from phi");
  add_graph(closure_cmd, o);
  closure_cmd->add_option("--phi", o.phi, "Starting expression")->required();
  closure_cmd->add_option("--max-depth", o.max_depth, "Search depth")->capture_default_str();
  closure_cmd->add_option("--node-cap", o.node_cap, "Fail beyond this many expressions")->capture_default_str();

  auto* gen_cmd = app.add_subcommand("generate", "Generate synthetic derivation pairs");
  gen_cmd->add_option("--n-pairs", o.n_pairs, "Number of pairs")->capture_default_str();
  gen_cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--min-vars", o.min_vars, "Fewest graph variables")->capture_default_str();
  gen_cmd->add_option("--max-vars", o.max_vars, "Most graph variables")->capture_default_str();
  gen_cmd->add_option("--edge-prob", o.edge_prob, "Probability of each forward edge")->capture_default_str();
  gen_cmd->add_option("--min-steps", o.min_steps, "Fewest rule applications")->capture_default_str();
  gen_cmd->add_option("--max-steps", o.max_steps, "Most rule applications")->capture_default_str();
  gen_cmd->add_option("--negative-fraction", o.negative_fraction, "Share of negative pairs")->capture_default_str();
  gen_cmd->add_option("--out", o.out, "Dataset path (default: standard output)");
  gen_cmd->add_option("--stats", o.stats, "Statistics path (default: <out>.stats.json, or standard error)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score model outputs against a benchmark");
  eval_cmd->add_option("--bench", o.bench, "Benchmark file")->required();
  eval_cmd->add_option("--outputs", o.outputs, "Model outputs, one JSON object per line")->required();
  eval_cmd->add_flag("--use-gold-graph", o.use_gold_graph, "Verify against the benchmark graph");
  eval_cmd->add_option("--max-depth", o.eval_depth, "Largest proof length")->capture_default_str();
  eval_cmd->add_option("--out", o.out, "Directory for items.jsonl, summary.tsv and report.json");

  auto* fb_cmd = app.add_subcommand("feedback", "Structural diagnostics for an expression");
  add_graph(fb_cmd, o);
  fb_cmd->add_option("--expr,--phi", o.phi, "Expression to check")->required();
  fb_cmd->add_flag("--first-only", o.first_only, "Report only the first diagnostic");
  fb_cmd->add_option("--prompt", o.prompt, "Print the follow-up prompt built from this text");

  for (auto* cmd : {verify_cmd, closure_cmd, gen_cmd, eval_cmd, fb_cmd}) {
    cmd->add_flag("--json-lines", o.json_lines, "Machine-readable output");
    cmd->add_flag("-v,--verbose", o.verbose, "Include timings");
  }
  for (auto* cmd : {verify_cmd, closure_cmd, gen_cmd, eval_cmd}) add_rule_flags(cmd, o.rules);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*verify_cmd) return cmd_verify(o, out);
    if (*closure_cmd) return cmd_closure(o, out);
    if (*gen_cmd) return cmd_generate(o, out, err);
    if (*eval_cmd) return cmd_evaluate(o, out);
    if (*fb_cmd) return cmd_feedback(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"dover"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace dover
