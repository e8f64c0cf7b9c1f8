#include "dover/expr.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "dover/error.hpp"

namespace dover {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

int kind_rank(TermKind k) { return k == TermKind::Observed ? 0 : 1; }

bool term_less(const Term& a, const Term& b) {
  if (a.var != b.var) return a.var < b.var;
  if (a.kind != b.kind) return kind_rank(a.kind) < kind_rank(b.kind);
  return a.value < b.value;
}

std::string render_value(const Value& v, std::string_view eq) {
  return v ? std::string(eq) + *v : std::string();
}

std::string render_term(const Term& t, std::string_view eq, bool with_value) {
  std::string body = t.var.name();
  if (with_value) body += render_value(t.value, eq);
  return t.kind == TermKind::Intervened ? "do(" + body + ")" : body;
}

std::string render_impl(const CausalExpr& e, std::string_view sep, std::string_view bar,
                        std::string_view eq, bool with_values) {
  std::string out = e.form() == Form::Probability ? "P(" : "E[";
  for (std::size_t i = 0; i < e.outcome().size(); ++i) {
    if (i) out += sep;
    out += e.outcome()[i].var.name();
    if (with_values) out += render_value(e.outcome()[i].value, eq);
  }
  if (!e.conditioning().empty()) {
    out += bar;
    for (std::size_t i = 0; i < e.conditioning().size(); ++i) {
      if (i) out += sep;
      out += render_term(e.conditioning()[i], eq, with_values);
    }
  }
  out += e.form() == Form::Probability ? ")" : "]";
  return out;
}

// Recursive-descent parser over a flat token stream.
enum class Tok { Ident, Int, LParen, RParen, LBracket, RBracket, Bar, Comma, Equals, Plus, Minus, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (ident_start(c)) {
      while (i < s.size() && ident_char(s[i])) ++i;
      out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), start});
      continue;
    }
    if (digit(c)) {
      while (i < s.size() && digit(s[i])) ++i;
      if (i < s.size() && ident_char(s[i])) throw ParseError(i, "malformed number");
      out.push_back({Tok::Int, std::string(s.substr(start, i - start)), start});
      continue;
    }
    Tok k;
    switch (c) {
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case '|': k = Tok::Bar; break;
      case ',': k = Tok::Comma; break;
      case '=': k = Tok::Equals; break;
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      default: throw ParseError(i, std::string("unknown token '") + c + "'");
    }
    out.push_back({k, std::string(1, c), i});
    ++i;
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

const char* describe(Tok k) {
  switch (k) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Bar: return "'|'";
    case Tok::Comma: return "','";
    case Tok::Equals: return "'='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::End: return "end of input";
  }
  return "token";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

  Compound compound() {
    Compound out;
    Sign sign = Sign::Plus;
    if (peek().kind == Tok::Minus || peek().kind == Tok::Plus) {
      sign = next().kind == Tok::Minus ? Sign::Minus : Sign::Plus;
    }
    out.push_back({sign, atom()});
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      sign = next().kind == Tok::Minus ? Sign::Minus : Sign::Plus;
      out.push_back({sign, atom()});
    }
    if (peek().kind != Tok::End) {
      throw ParseError(peek().pos, std::string("expected '+', '-' or end of input, found ") +
                                       describe(peek().kind));
    }
    return out;
  }

  CausalExpr single() {
    CausalExpr e = atom();
    if (peek().kind != Tok::End) {
      throw ParseError(peek().pos, std::string("trailing input: ") + describe(peek().kind));
    }
    return e;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  const Token& next() { return toks_[i_ == toks_.size() - 1 ? i_ : i_++]; }

  const Token& expect(Tok k) {
    if (peek().kind != k) {
      throw ParseError(peek().pos, std::string("expected ") + describe(k) + ", found " +
                                       describe(peek().kind));
    }
    return next();
  }

  Variable variable() {
    const Token& t = expect(Tok::Ident);
    return Variable(t.text);
  }

  Value value_suffix() {
    if (peek().kind != Tok::Equals) return std::nullopt;
    next();
    if (peek().kind == Tok::Int || peek().kind == Tok::Ident) return next().text;
    throw ParseError(peek().pos, std::string("expected value, found ") + describe(peek().kind));
  }

  void conditioning(std::vector<Term>& out) {
    do {
      if (peek().kind == Tok::Ident && peek().text == "do" && toks_[i_ + 1].kind == Tok::LParen) {
        next();
        next();
        do {
          Variable v = variable();
          out.push_back({TermKind::Intervened, std::move(v), value_suffix()});
        } while (peek().kind == Tok::Comma && (next(), true));
        expect(Tok::RParen);
      } else {
        Variable v = variable();
        out.push_back({TermKind::Observed, std::move(v), value_suffix()});
      }
    } while (peek().kind == Tok::Comma && (next(), true));
  }

  CausalExpr atom() {
    const Token& head = peek();
    std::size_t start = head.pos;
    if (head.kind != Tok::Ident || (head.text != "P" && head.text != "E")) {
      throw ParseError(head.pos, std::string("expected 'P(' or 'E[', found ") + describe(head.kind));
    }
    bool expectation = next().text == "E";
    Tok close = expectation ? Tok::RBracket : Tok::RParen;
    expect(expectation ? Tok::LBracket : Tok::LParen);
    if (peek().kind == close || peek().kind == Tok::Bar) throw ParseError(peek().pos, "empty outcome");

    std::vector<Outcome> outcome;
    do {
      Variable v = variable();
      outcome.push_back({std::move(v), value_suffix()});
    } while (peek().kind == Tok::Comma && (next(), true));

    std::vector<Term> cond;
    if (peek().kind == Tok::Bar) {
      next();
      conditioning(cond);
    }
    expect(close);

    try {
      if (expectation) {
        if (outcome.size() != 1) throw InvalidExpression("expectation needs exactly one outcome variable");
        return CausalExpr::expectation(std::move(outcome.front()), std::move(cond));
      }
      return CausalExpr::probability(std::move(outcome), std::move(cond));
    } catch (const InvalidExpression& err) {
      throw ParseError(start, err.what());
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

}  // namespace

Variable::Variable(std::string name) : name_(std::move(name)) {
  if (!valid_name(name_)) throw InvalidExpression("invalid variable name '" + name_ + "'");
}

bool Variable::valid_name(std::string_view name) {
  if (name.empty() || !ident_start(name.front())) return false;
  return std::all_of(name.begin(), name.end(), ident_char);
}

Term Term::observed(std::string name, Value value) {
  return {TermKind::Observed, Variable(std::move(name)), std::move(value)};
}

Term Term::intervened(std::string name, Value value) {
  return {TermKind::Intervened, Variable(std::move(name)), std::move(value)};
}

CausalExpr::CausalExpr(std::vector<Outcome> outcome, std::vector<Term> conditioning, Form form)
    : outcome_(std::move(outcome)), conditioning_(std::move(conditioning)), form_(form) {
  if (outcome_.empty()) throw InvalidExpression("empty outcome");
  if (form_ == Form::Expectation && outcome_.size() != 1) {
    throw InvalidExpression("expectation needs exactly one outcome variable");
  }
  std::sort(outcome_.begin(), outcome_.end(), [](const Outcome& a, const Outcome& b) {
    return a.var != b.var ? a.var < b.var : a.value < b.value;
  });
  std::sort(conditioning_.begin(), conditioning_.end(), term_less);

  std::vector<const Variable*> all;
  for (const auto& o : outcome_) all.push_back(&o.var);
  for (const auto& t : conditioning_) all.push_back(&t.var);
  std::sort(all.begin(), all.end(), [](const Variable* a, const Variable* b) { return *a < *b; });
  auto dup = std::adjacent_find(all.begin(), all.end(),
                                [](const Variable* a, const Variable* b) { return *a == *b; });
  if (dup != all.end()) throw InvalidExpression("duplicate variable '" + (*dup)->name() + "'");
}

CausalExpr CausalExpr::probability(std::vector<Outcome> outcome, std::vector<Term> conditioning) {
  return CausalExpr(std::move(outcome), std::move(conditioning), Form::Probability);
}

CausalExpr CausalExpr::expectation(Outcome outcome, std::vector<Term> conditioning) {
  return CausalExpr({std::move(outcome)}, std::move(conditioning), Form::Expectation);
}

VariableSet CausalExpr::outcome_vars() const {
  VariableSet s;
  for (const auto& o : outcome_) s.insert(o.var);
  return s;
}

VariableSet CausalExpr::interventions() const {
  VariableSet s;
  for (const auto& t : conditioning_) {
    if (t.kind == TermKind::Intervened) s.insert(t.var);
  }
  return s;
}

VariableSet CausalExpr::observations() const {
  VariableSet s;
  for (const auto& t : conditioning_) {
    if (t.kind == TermKind::Observed) s.insert(t.var);
  }
  return s;
}

VariableSet CausalExpr::variables() const {
  VariableSet s = outcome_vars();
  for (const auto& t : conditioning_) s.insert(t.var);
  return s;
}

const Term* CausalExpr::find(const Variable& var) const {
  for (const auto& t : conditioning_) {
    if (t.var == var) return &t;
  }
  return nullptr;
}

CausalExpr parse_expression(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ParseError(0, "empty input");
  return Parser(text).single();
}

Compound parse_compound(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ParseError(0, "empty input");
  return Parser(text).compound();
}

CausalExpr rewrite_expectation(const CausalExpr& e) {
  if (e.form() != Form::Expectation) throw InvalidForm("expression is already a probability");
  return CausalExpr::probability({Outcome{e.outcome().front().var, "1"}}, e.conditioning());
}

Compound rewrite_expectations(const Compound& c) {
  Compound out;
  out.reserve(c.size());
  for (const auto& s : c) {
    out.push_back({s.sign, s.expr.form() == Form::Expectation ? rewrite_expectation(s.expr) : s.expr});
  }
  return out;
}

CanonicalKey canonicalize(const CausalExpr& e, bool erase_values) {
  if (!erase_values) return {render_impl(e, ",", "|", "=", true)};
  // Erasing values can reorder nothing (names are unique), so the sorted
  // storage order is still canonical.
  return {render_impl(e, ",", "|", "=", false)};
}

std::string render(const CausalExpr& e) { return render_impl(e, ", ", " | ", " = ", true); }

std::string render(const Compound& c) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i == 0) {
      if (c[i].sign == Sign::Minus) out += "-";
    } else {
      out += c[i].sign == Sign::Minus ? " - " : " + ";
    }
    out += render(c[i].expr);
  }
  return out;
}

std::string render_names(const VariableSet& vars) {
  std::string out;
  for (const auto& v : vars) {
    if (!out.empty()) out += ", ";
    out += v.name();
  }
  return out;
}

}  // namespace dover
