#include <doctest.h>

#include <random>

#include "../support.hpp"
#include "dover/error.hpp"
#include "dover/expr.hpp"

using namespace dover;

namespace {

CausalExpr P(std::vector<std::string> outcome, std::vector<Term> cond = {}) {
  std::vector<Outcome> out;
  for (auto& o : outcome) out.push_back({Variable(o), std::nullopt});
  return CausalExpr::probability(out, cond);
}

}  // namespace

TEST_CASE("parse_expression accepts the probability surface forms") {
  CHECK(parse_expression("P(Y | do(X), Z)") == P({"Y"}, {Term::intervened("X"), Term::observed("Z")}));
  CHECK(parse_expression("P(Y)") == P({"Y"}));
  CHECK(parse_expression("  P ( Y|do ( X ) ,Z )  ") == parse_expression("P(Y | do(X), Z)"));

  auto e = parse_expression("E[Y | do(X = 1)]");
  CHECK(e.form() == Form::Expectation);
  CHECK(e.conditioning() == std::vector<Term>{Term::intervened("X", "1")});

  auto v = parse_expression("P(Y = 1 | Z = z, do(X=0))");
  CHECK(v.outcome().front().value == "1");
  CHECK(v.find(Variable("Z"))->value == "z");
  CHECK(v.find(Variable("X"))->kind == TermKind::Intervened);

  // do(...) may group several interventions; multi-variable outcomes are allowed.
  CHECK(parse_expression("P(Y, W | do(A, B))") ==
        P({"W", "Y"}, {Term::intervened("A"), Term::intervened("B")}));
  // A variable called "do" is only an intervention when followed by '('.
  CHECK(parse_expression("P(Y | do)").find(Variable("do"))->kind == TermKind::Observed);
}

TEST_CASE("parse_expression reports malformed input with a position") {
  auto fails_at = [](std::string_view text, std::size_t pos) {
    try {
      parse_expression(text);
    } catch (const ParseError& e) {
      CHECK(e.position() == pos);
      return;
    }
    FAIL("no ParseError for " << text);
  };
  fails_at("P(Y | X", 7);          // unbalanced
  fails_at("P(Y | X))", 8);        // trailing delimiter
  fails_at("P()", 2);              // empty outcome
  fails_at("P(Y | #)", 6);         // unknown token
  fails_at("P(Y | X, X)", 0);      // duplicate variable
  fails_at("P(Y | do(Y))", 0);     // outcome reused in conditioning
  fails_at("E[Y, Z]", 0);          // expectation over two outcomes
  fails_at("Q(Y)", 0);
  fails_at("P(Y | X =)", 9);
  fails_at("", 0);
  fails_at("P(Y) P(X)", 5);
}

TEST_CASE("construction enforces disjointness instead of deduplicating") {
  CHECK_THROWS_AS(P({"Y"}, {Term::observed("Y")}), InvalidExpression);
  CHECK_THROWS_AS(P({"Y"}, {Term::observed("X"), Term::intervened("X")}), InvalidExpression);
  CHECK_THROWS_AS(P({"Y", "Y"}), InvalidExpression);
  CHECK_THROWS_AS(P({}), InvalidExpression);
  CHECK_THROWS_AS(Variable("1X"), InvalidExpression);
  CHECK_THROWS_AS(Variable(""), InvalidExpression);
}

TEST_CASE("parse_compound splits +/- chains") {
  auto c = parse_compound("E[Y|do(X=1)] - E[Y|do(X=0)]");
  REQUIRE(c.size() == 2);
  CHECK(c[0].sign == Sign::Plus);
  CHECK(c[1].sign == Sign::Minus);
  CHECK(c[0].expr == parse_expression("E[Y | do(X = 1)]"));
  CHECK(c[1].expr == parse_expression("E[Y | do(X = 0)]"));

  auto one = parse_compound("P(Y|X)");
  REQUIRE(one.size() == 1);
  CHECK(one[0].sign == Sign::Plus);

  auto two = parse_compound("P(A) + P(B)");
  REQUIRE(two.size() == 2);
  CHECK(two[1].sign == Sign::Plus);
  CHECK(two[1].expr == P({"B"}));

  CHECK(parse_compound("-P(A)")[0].sign == Sign::Minus);
  CHECK_THROWS_AS(parse_compound("P(A) * P(B)"), ParseError);
  CHECK_THROWS_AS(parse_compound("(P(A) - P(B))"), ParseError);
  CHECK_THROWS_AS(parse_compound("P(A) -"), ParseError);
}

TEST_CASE("rewrite_expectation fixes the outcome to 1") {
  CHECK(rewrite_expectation(parse_expression("E[Y | Z]")) == parse_expression("P(Y = 1 | Z)"));
  CHECK(rewrite_expectation(parse_expression("E[Y]")) == parse_expression("P(Y=1)"));
  CHECK(rewrite_expectation(parse_expression("E[Y | do(X=1)]")) == parse_expression("P(Y = 1 | do(X = 1))"));
  CHECK_THROWS_AS(rewrite_expectation(parse_expression("P(Y)")), InvalidForm);

  // Two-point distribution: E[Y] = 0 * P(Y=0) + 1 * P(Y=1) = P(Y=1).
  for (double q : {0.0, 0.13, 0.5, 0.81, 1.0}) {
    double expectation = 0.0 * (1.0 - q) + 1.0 * q;
    CHECK(expectation == doctest::Approx(q));
  }
}

TEST_CASE("canonicalize orders terms and strips whitespace") {
  CHECK(canonicalize(parse_expression("P(Y | Z, X)")) == canonicalize(parse_expression("P(Y|X,Z)")));
  CHECK(canonicalize(P({"Y"})).key == "P(Y)");
  CHECK(canonicalize(parse_expression("P(Y | do(X), Z=1)")) == canonicalize(parse_expression("P(Y | do(X), Z)")));
  CHECK(canonicalize(parse_expression("P(Y | do(X), Z=1)"), false) !=
        canonicalize(parse_expression("P(Y | do(X), Z)"), false));
  CHECK(canonicalize(parse_expression("P(Y | do(X), Z=1)"), false).key == "P(Y|do(X),Z=1)");
  CHECK(canonicalize(parse_expression("P(Y | do(X))")) != canonicalize(parse_expression("P(Y | X)")));
  CHECK(canonicalize(parse_expression("E[Y]")).key == "E[Y]");
}

TEST_CASE("render produces the readable form") {
  CHECK(render(P({"Y"}, {Term::intervened("X")})) == "P(Y | do(X))");
  CHECK(render(CausalExpr::probability({{Variable("Y"), "1"}})) == "P(Y = 1)");
  CHECK(render(parse_expression("E[Y|do(X=1)]")) == "E[Y | do(X = 1)]");
  CHECK(render(parse_compound("E[Y|do(X=1)] - E[Y|do(X=0)]")) == "E[Y | do(X = 1)] - E[Y | do(X = 0)]");
}

TEST_CASE("property: render/parse round trip and canonical key soundness") {
  std::mt19937 rng(11);
  for (int i = 0; i < 500; ++i) {
    Dag g = testing_support::random_dag(rng, 1 + i % 7);
    CausalExpr e = testing_support::random_expr(rng, g, true, true);
    CHECK(parse_expression(render(e)) == e);

    // Shuffling the conditioning terms never changes the key.
    std::vector<Term> shuffled = e.conditioning();
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CausalExpr same = e.form() == Form::Expectation ? CausalExpr::expectation(e.outcome().front(), shuffled)
                                                    : CausalExpr::probability(e.outcome(), shuffled);
    CHECK(canonicalize(same, false) == canonicalize(e, false));

    // Keys agree iff the structures agree once values are dropped.
    CausalExpr f = testing_support::random_expr(rng, g, true, true);
    auto strip = [](const CausalExpr& x) { return parse_expression(canonicalize(x, true).key); };
    CHECK((canonicalize(e) == canonicalize(f)) == (strip(e) == strip(f)));
    CHECK((canonicalize(e, false) == canonicalize(f, false)) == (e == f));
  }
}

TEST_CASE("property: expectation rewrite then canonicalize matches the hand-built probability") {
  std::mt19937 rng(5);
  for (int i = 0; i < 300; ++i) {
    Dag g = testing_support::random_dag(rng, 1 + i % 6);
    CausalExpr p = testing_support::random_expr(rng, g, true);
    CausalExpr e = CausalExpr::expectation({p.outcome().front().var, std::nullopt}, p.conditioning());
    CausalExpr hand = CausalExpr::probability({{p.outcome().front().var, "1"}}, p.conditioning());
    CHECK(canonicalize(rewrite_expectation(e), false) == canonicalize(hand, false));
    CHECK(canonicalize(rewrite_expectation(e), true) == canonicalize(hand, true));
  }
}
