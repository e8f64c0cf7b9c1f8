#include <doctest.h>

#include <random>

#include "../oracle/oracle.hpp"
#include "../support.hpp"
#include "dover/error.hpp"
#include "dover/feedback.hpp"

using namespace dover;

namespace {

std::vector<DiagnosticKind> kinds(const std::vector<Diagnostic>& d) {
  std::vector<DiagnosticKind> out;
  for (const auto& x : d) out.push_back(x.kind);
  return out;
}

bool path(const oracle::Graph& g, const std::string& from, const std::string& to) {
  std::vector<bool> on(static_cast<std::size_t>(g.n()));
  return from != to && oracle::directed_path(g, g.idx(from), g.idx(to), on);
}

// The expected diagnostic kinds and subjects, from the adjacency-matrix
// oracle.
std::vector<std::pair<DiagnosticKind, std::string>> expected(const Dag& dag, const CausalExpr& e) {
  oracle::Graph g(dag);
  auto p = oracle::parts(e);
  std::vector<std::pair<DiagnosticKind, std::string>> out;
  if (!p.w.empty()) {
    oracle::Graph cut = g.cut(p.x, {});
    bool all = true;
    for (const auto& z : p.w) {
      auto w = oracle::unite(oracle::minus(p.w, {z}), p.x);
      all = all && oracle::dsep(cut, p.y, {z}, w);
    }
    if (all) out.emplace_back(DiagnosticKind::AllDSeparated, "");
  }
  for (const auto& z : p.w) {
    auto w = oracle::unite(oracle::minus(p.w, {z}), p.x);
    bool from_cause = false, to_y = false, into_x = false, into_y = false;
    for (const auto& a : w) from_cause = from_cause || path(g, a, z);
    for (const auto& y : p.y) {
      to_y = to_y || path(g, z, y);
      into_y = into_y || g.adj[g.idx(z)][g.idx(y)];
    }
    for (const auto& x : p.x) into_x = into_x || g.adj[g.idx(z)][g.idx(x)];
    if (from_cause && to_y) out.emplace_back(DiagnosticKind::Mediator, z);
    if (into_x && into_y) out.emplace_back(DiagnosticKind::Confounder, z);
    if (!oracle::dsep(g, p.y, {z}, w)) out.emplace_back(DiagnosticKind::DSepViolation, z);
  }
  return out;
}

}  // namespace

TEST_CASE("mediator") {
  Dag g = from_edge_list("A->Z,Z->Y");
  auto d = suggest_fix(g, parse_expression("P(Y | A, Z)"));
  REQUIRE(!d.empty());
  bool found = false;
  for (const auto& x : d) {
    if (x.kind != DiagnosticKind::Mediator) continue;
    found = true;
    CHECK(x.subject == Variable("Z"));
    CHECK(x.message ==
          "Z is a mediator between a cause and Y. Avoid conditioning on Z to prevent post-treatment bias.");
  }
  CHECK(found);
  auto first = suggest_fix(g, parse_expression("P(Y | A, Z)"), true);
  REQUIRE(first.size() == 1);
  CHECK(first[0].kind == DiagnosticKind::Mediator);
}

TEST_CASE("confounder") {
  Dag g = from_edge_list("Z->X,Z->Y,X->Y");
  auto d = suggest_fix(g, parse_expression("P(Y | do(X), Z)"));
  CHECK(kinds(d) == std::vector<DiagnosticKind>{DiagnosticKind::Confounder, DiagnosticKind::DSepViolation});
  CHECK(d[0].message == "Z causes Y, but is only observed. Consider using do(Z) if you intend an intervention.");
  CHECK(d[1].message == "Conditioning on Z may bias results; Y is not d-separated from Z given X.");
}

TEST_CASE("no observed conditioning, no diagnostics") {
  CHECK(suggest_fix(from_edge_list("X->Y"), parse_expression("P(Y | do(X))")).empty());
  CHECK(suggest_fix(from_edge_list("X->Y"), parse_expression("P(Y)")).empty());
}

TEST_CASE("all observed variables d-separated") {
  Dag g = from_edge_list("Z->X,X->Y");
  auto d = suggest_fix(g, parse_expression("P(Y | do(X), Z)"));
  REQUIRE(d.size() == 1);
  CHECK(d[0].kind == DiagnosticKind::AllDSeparated);
  CHECK_FALSE(d[0].subject.has_value());
  CHECK(d[0].message ==
        "All observed variables are d-separated from Y in the interventional graph. "
        "Consider using P(Y) instead \xE2\x80\x94 no conditioning is necessary.");
}

TEST_CASE("empty conditioning set renders as the empty-set sign") {
  auto d = suggest_fix(from_edge_list("Z->Y"), parse_expression("P(Y | Z)"));
  REQUIRE(d.size() == 1);
  CHECK(d[0].message == "Conditioning on Z may bias results; Y is not d-separated from Z given \xE2\x88\x85.");
}

TEST_CASE("multi-variable outcome and conditioning sets are comma separated") {
  Dag g = from_edge_list("A->Z,Z->Y,Z->W,B->Z");
  auto d = suggest_fix(g, parse_expression("P(W, Y | A, B, Z)"));
  bool saw = false;
  for (const auto& x : d) {
    if (x.kind == DiagnosticKind::DSepViolation && x.subject == Variable("Z")) {
      saw = true;
      CHECK(x.message == "Conditioning on Z may bias results; W, Y is not d-separated from Z given A, B.");
    }
  }
  CHECK(saw);
}

TEST_CASE("unknown variables are rejected") {
  CHECK_THROWS_AS(suggest_fix(from_edge_list("X->Y"), parse_expression("P(Y | Q)")), UnknownVariable);
}

TEST_CASE("property: diagnostics equal the oracle's, in order") {
  std::mt19937 rng(45);
  for (int i = 0; i < 2000; ++i) {
    Dag g = testing_support::random_dag(rng, 2 + i % 6);
    CausalExpr e = testing_support::random_expr(rng, g);
    auto d = suggest_fix(g, e);
    std::vector<std::pair<DiagnosticKind, std::string>> got;
    for (const auto& x : d) got.emplace_back(x.kind, x.subject ? x.subject->name() : "");
    CHECK(got == expected(g, e));
    auto first = suggest_fix(g, e, true);
    CHECK(first.size() == std::min<std::size_t>(1, d.size()));
    if (!first.empty()) CHECK(first[0] == d[0]);
  }
}

TEST_CASE("render_feedback_prompt and records") {
  auto e = parse_expression("P(Y | A, Z)");
  CHECK(render_feedback_prompt("Prompt text", e, {}) == "Prompt text\nExpression: P(Y | A, Z)\n");
  auto d = suggest_fix(from_edge_list("A->Z,Z->Y"), e);
  std::string text = render_feedback_prompt("Prompt text\n", e, d);
  std::string want = "Prompt text\nExpression: P(Y | A, Z)\n";
  for (const auto& x : d) want += x.message + "\n";
  CHECK(text == want);
  CHECK(text.find("Z is a mediator between a cause and Y.") != std::string::npos);

  Diagnostic m{DiagnosticKind::Mediator, Variable("Z"), "msg"};
  CHECK(diagnostic_record(m) == R"({"kind":"Mediator","subject":"Z","message":"msg"})");
  Diagnostic all{DiagnosticKind::AllDSeparated, std::nullopt, "msg"};
  CHECK(diagnostic_record(all) == R"({"kind":"AllDSeparated","subject":null,"message":"msg"})");
}
