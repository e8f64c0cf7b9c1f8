#pragma once

// Structural diagnostics for a predicted expression under its graph:
// mediators, confounders and conditioning that breaks d-separation. Needs
// no reference answer.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dover/expr.hpp"
#include "dover/graph.hpp"

namespace dover {

enum class DiagnosticKind { AllDSeparated, Mediator, Confounder, DSepViolation };

std::string_view to_string(DiagnosticKind k);

struct Diagnostic {
  DiagnosticKind kind;
  std::optional<Variable> subject;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

// With W = (observed \ {z}) + interventions, for each observed z:
//   Mediator       some other conditioning variable reaches z and z reaches Y
//   Confounder     z -> x for an intervention x, and z -> Y
//   DSepViolation  Y and z are d-connected given W in g
// AllDSeparated comes first and fires when every observed z is d-separated
// from Y given W once edges into the interventions are cut.
// Throws UnknownVariable.
std::vector<Diagnostic> suggest_fix(const Dag& g, const CausalExpr& e, bool first_only = false);

// Prompt, then "Expression: <e>", then each message, one per line.
std::string render_feedback_prompt(std::string_view original_prompt, const CausalExpr& e,
                                   const std::vector<Diagnostic>& diags);

// {"kind": ..., "subject": ... or null, "message": ...}
std::string diagnostic_record(const Diagnostic& d);

}  // namespace dover
