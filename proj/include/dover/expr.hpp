#pragma once

// Causal probability expressions: P(Y | do(X), Z) and E[Y | ...].
//
// Expressions are immutable values. Outcome and conditioning terms are kept
// sorted by variable name, so structural equality is set equality and the
// canonical key is a plain rendering without whitespace.

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dover {

class Variable {
 public:
  // Throws InvalidExpression unless name is [A-Za-z_][A-Za-z0-9_]*.
  explicit Variable(std::string name);

  const std::string& name() const noexcept { return name_; }

  friend bool operator==(const Variable&, const Variable&) = default;
  friend auto operator<=>(const Variable&, const Variable&) = default;

  static bool valid_name(std::string_view name);

 private:
  std::string name_;
};

using VariableSet = std::set<Variable>;

// Integer or bare symbol, e.g. "0", "1", "z".
using Value = std::optional<std::string>;

enum class TermKind { Observed, Intervened };
enum class Form { Probability, Expectation };

struct Outcome {
  Variable var;
  Value value;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct Term {
  TermKind kind;
  Variable var;
  Value value;

  static Term observed(std::string name, Value value = std::nullopt);
  static Term intervened(std::string name, Value value = std::nullopt);

  friend bool operator==(const Term&, const Term&) = default;
};

struct CanonicalKey {
  std::string key;

  friend bool operator==(const CanonicalKey&, const CanonicalKey&) = default;
  friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
};

class CausalExpr {
 public:
  // Both factories validate disjointness and throw InvalidExpression.
  static CausalExpr probability(std::vector<Outcome> outcome, std::vector<Term> conditioning = {});
  static CausalExpr expectation(Outcome outcome, std::vector<Term> conditioning = {});

  const std::vector<Outcome>& outcome() const noexcept { return outcome_; }
  const std::vector<Term>& conditioning() const noexcept { return conditioning_; }
  Form form() const noexcept { return form_; }

  VariableSet outcome_vars() const;
  VariableSet interventions() const;
  VariableSet observations() const;
  VariableSet variables() const;

  // Term for var, or nullptr.
  const Term* find(const Variable& var) const;

  friend bool operator==(const CausalExpr&, const CausalExpr&) = default;

 private:
  CausalExpr(std::vector<Outcome> outcome, std::vector<Term> conditioning, Form form);

  std::vector<Outcome> outcome_;
  std::vector<Term> conditioning_;
  Form form_;
};

enum class Sign { Plus, Minus };

struct SignedExpr {
  Sign sign;
  CausalExpr expr;

  friend bool operator==(const SignedExpr&, const SignedExpr&) = default;
};

using Compound = std::vector<SignedExpr>;

CausalExpr parse_expression(std::string_view text);
Compound parse_compound(std::string_view text);

// E[X | Z] -> P(X = 1 | Z). Throws InvalidForm on a probability.
CausalExpr rewrite_expectation(const CausalExpr& e);

// Rewrites every expectation component; probabilities pass through.
Compound rewrite_expectations(const Compound& c);

CanonicalKey canonicalize(const CausalExpr& e, bool erase_values = true);

std::string render(const CausalExpr& e);
std::string render(const Compound& c);

// Comma separated names in set order, e.g. "A, C".
std::string render_names(const VariableSet& vars);

}  // namespace dover
