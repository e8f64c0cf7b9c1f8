#include "dover/feedback.hpp"

#include <json.hpp>

namespace dover {

namespace {

std::string all_separated(const std::string& y) {
  return "All observed variables are d-separated from " + y +
         " in the interventional graph. Consider using P(" + y + ") instead — no conditioning is necessary.";
}

std::string mediator(const std::string& z, const std::string& y) {
  return z + " is a mediator between a cause and " + y + ". Avoid conditioning on " + z +
         " to prevent post-treatment bias.";
}

std::string confounder(const std::string& z, const std::string& y) {
  return z + " causes " + y + ", but is only observed. Consider using do(" + z + ") if you intend an intervention.";
}

std::string violation(const std::string& z, const std::string& y, const std::string& w) {
  return "Conditioning on " + z + " may bias results; " + y + " is not d-separated from " + z + " given " + w + ".";
}

}  // namespace

std::string_view to_string(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::AllDSeparated: return "AllDSeparated";
    case DiagnosticKind::Mediator: return "Mediator";
    case DiagnosticKind::Confounder: return "Confounder";
    case DiagnosticKind::DSepViolation: return "DSepViolation";
  }
  return "";
}

std::vector<Diagnostic> suggest_fix(const Dag& g, const CausalExpr& e, bool first_only) {
  const Topology& t = g.topology();
  NodeSet y = g.mask(e.outcome_vars());
  NodeSet x = g.mask(e.interventions());
  NodeSet obs = g.mask(e.observations());
  std::string y_text = render_names(e.outcome_vars());

  std::vector<Diagnostic> out;
  auto emit = [&](DiagnosticKind k, std::optional<Variable> z, std::string msg) {
    if (!first_only || out.empty()) out.push_back({k, std::move(z), std::move(msg)});
  };

  if (!obs.empty()) {
    bool all = true;
    obs.for_each([&](std::size_t z) {
      NodeSet zs = NodeSet::single(z);
      all = all && t.d_separated(y, zs, (obs - zs) | x, Cut{x, {}});
    });
    if (all) emit(DiagnosticKind::AllDSeparated, std::nullopt, all_separated(y_text));
  }

  NodeSet y_ancestors = t.ancestors(y);
  obs.for_each([&](std::size_t z) {
    NodeSet zs = NodeSet::single(z);
    Variable zv(g.nodes()[z]);
    const std::string& name = zv.name();
    NodeSet w = (obs - zs) | x;

    if (y_ancestors.contains(z) && t.ancestors(zs).intersects(w))
      emit(DiagnosticKind::Mediator, zv, mediator(name, y_text));

    bool causes_x = t.children[z].intersects(x);
    if (causes_x && t.children[z].intersects(y)) emit(DiagnosticKind::Confounder, zv, confounder(name, y_text));

    if (!t.d_separated(y, zs, w)) {
      std::string w_text = w.empty() ? "∅" : render_names(g.variables(w));
      emit(DiagnosticKind::DSepViolation, zv, violation(name, y_text, w_text));
    }
  });
  return out;
}

std::string render_feedback_prompt(std::string_view original_prompt, const CausalExpr& e,
                                   const std::vector<Diagnostic>& diags) {
  std::string out(original_prompt);
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += "Expression: " + render(e) + "\n";
  for (const auto& d : diags) out += d.message + "\n";
  return out;
}

std::string diagnostic_record(const Diagnostic& d) {
  nlohmann::ordered_json j = {
      {"kind", std::string(to_string(d.kind))},
      {"subject", d.subject ? nlohmann::ordered_json(d.subject->name()) : nlohmann::ordered_json(nullptr)},
      {"message", d.message},
  };
  return j.dump();
}

}  // namespace dover
