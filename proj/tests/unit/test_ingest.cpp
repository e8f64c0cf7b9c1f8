#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dover/error.hpp"
#include "dover/ingest.hpp"
#include "dover/synth.hpp"

using namespace dover;

namespace {

std::string fixture(const char* name) { return std::string(DOVER_FIXTURES) + "/" + name; }

const BenchItem& by_id(const std::vector<BenchItem>& v, const std::string& id) {
  for (const auto& b : v)
    if (b.id == id) return b;
  throw std::runtime_error("no item " + id);
}

const std::string example2 =
    "Solution:\n"
    "Expression: E[Y | do(X = 1)] - E[Y | do(X = 0)]\n"
    "Graphical Representation: V1->X,V2->X,V1->Y,X->Y\n"
    "Reasoning: E[Y | do(X = 1)] - E[Y | do(X = 0)]\n"
    "[P(Y=1|V2=1)-P(Y=1|V2=0)]/[P(X=1|V2=1)-P(X=1|V2=0)]\n"
    "Final Answer: Yes\n";

}  // namespace

TEST_CASE("extract_model_output on the worked ATE answer") {
  ModelOutput m = extract_model_output(example2);
  REQUIRE(m.expression.has_value());
  REQUIRE(m.expression->size() == 2);
  CHECK((*m.expression)[0].sign == Sign::Plus);
  CHECK((*m.expression)[1].sign == Sign::Minus);
  CHECK((*m.expression)[0].expr == parse_expression("P(Y = 1 | do(X = 1))"));
  CHECK((*m.expression)[1].expr == parse_expression("P(Y = 1 | do(X = 0))"));
  CHECK(m.expression_text == "E[Y | do(X = 1)] - E[Y | do(X = 0)]");
  REQUIRE(m.graph.has_value());
  CHECK(*m.graph == from_edge_list("V1->X,V2->X,V1->Y,X->Y"));
  CHECK(m.notes == std::vector<std::string>{"expression: rewrote expectation as probability"});
}

TEST_CASE("extract_model_output prefers the answer after Solution:") {
  std::string text = "Expression: P(A)\nGraphical Representation: A->B\nSolution:\nExpression: P(Y | X)\n"
                     "Graphical Representation: X->Y\n";
  ModelOutput m = extract_model_output(text);
  REQUIRE(m.expression);
  CHECK((*m.expression)[0].expr == parse_expression("P(Y | X)"));
  CHECK(*m.graph == from_edge_list("X->Y"));
  CHECK(m.notes.empty());

  ModelOutput before = extract_model_output("Expression: P(Y)\nSolution: none\n");
  REQUIRE(before.expression);
  CHECK(before.notes.size() == 2);

  ModelOutput fancy = extract_model_output("**Expression:** `P(Y | X)`.\n  graphical representation: X->Y\n");
  REQUIRE(fancy.expression);
  CHECK((*fancy.expression)[0].expr == parse_expression("P(Y | X)"));
  REQUIRE(fancy.graph);
}

TEST_CASE("extract_model_output is total") {
  ModelOutput none = extract_model_output("I do not know.");
  CHECK_FALSE(none.expression);
  CHECK_FALSE(none.graph);
  CHECK(none.notes.size() == 2);

  ModelOutput bad = extract_model_output("Expression: P(Y | X\nGraphical Representation: X->Y->Z\n");
  CHECK_FALSE(bad.expression);
  CHECK_FALSE(bad.graph);
  CHECK(bad.expression_text == "P(Y | X");
  REQUIRE(bad.notes.size() == 2);
  CHECK(bad.notes[0].rfind("expression: parse error", 0) == 0);
  CHECK(bad.notes[1].rfind("graph: ", 0) == 0);

  CHECK_NOTHROW(extract_model_output(""));
  CHECK_NOTHROW(extract_model_output("Expression:"));
  CHECK_NOTHROW(extract_model_output("Graphical Representation: A->A"));
  CHECK_NOTHROW(extract_model_output(std::string("\0\xff\n", 3)));
}

TEST_CASE("parse_bench") {
  auto items = parse_bench(R"j([{"id": 7, "prompt": "p", "expression": "P(Y | X)", "graph": "V1->X,V2->X,V1->Y,X->Y"}])j");
  REQUIRE(items.size() == 1);
  CHECK(items[0].id == "7");
  CHECK(items[0].gold == parse_compound("P(Y | X)"));
  CHECK(items[0].graph == from_edge_list("V1->X,V2->X,V1->Y,X->Y"));
  CHECK_FALSE(items[0].skip_reason);

  CHECK(parse_bench("[]").empty());

  auto skipped = parse_bench(R"j([
      {"id": "a", "expression": NaN, "graph": "X->Y"},
      {"id": "b", "expression": "nan", "graph": "X->Y"},
      {"id": "c", "expression": "P(Y | X", "graph": "X->Y"},
      {"id": "d", "expression": "P(Y | X)", "graph": "X->Y,Y->X"},
      {"id": "e", "expression": "P(Y | Q)", "graph": "X->Y"},
      {"id": "f", "expression": "P(Y | X)", "graph": null},
      {"id": "g", "expression": "E[Y | do(X = 1)]", "graph": "X->Y", "nodes": ["W"]}
  ])j");
  REQUIRE(skipped.size() == 7);
  for (int i = 0; i < 6; ++i) CHECK(skipped[static_cast<std::size_t>(i)].skip_reason.has_value());
  CHECK_FALSE(skipped[6].skip_reason);
  CHECK(skipped[6].gold == parse_compound("P(Y = 1 | do(X = 1))"));
  CHECK(skipped[6].graph->size() == 3);

  auto schema = [](const std::string& text, std::size_t index) {
    try {
      parse_bench(text);
    } catch (const SchemaError& e) {
      CHECK(e.index() == index);
      return;
    }
    FAIL("no SchemaError for " << text);
  };
  schema("{not json", 0);
  schema(R"j({"id": "x"})j", 0);
  schema(R"j([{"id": "a", "expression": "P(Y)", "graph": "Y->Z"}, 3])j", 1);
  schema(R"j([{"id": "a", "expression": "P(Y)"}])j", 0);
  schema(R"j([{"expression": "P(Y)", "graph": ""}])j", 0);
  schema(R"j([{"id": "a", "expression": 5, "graph": ""}])j", 0);
  CHECK_THROWS_AS(load_bench_file("/nonexistent/bench.json"), IoError);
}

TEST_CASE("a synthetic dataset is accepted as a bench") {
  SynthConfig cfg;
  cfg.seed = 2;
  auto pairs = generate_dataset(cfg, 5).pairs;
  std::ostringstream ds;
  write_dataset(pairs, ds);
  auto items = parse_bench(ds.str());
  REQUIRE(items.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(items[i].id == pairs[i].id);
    CHECK(items[i].gold == Compound{{Sign::Plus, pairs[i].phi}});
    CHECK(items[i].graph == pairs[i].dag);
  }
  std::istringstream outs(ds.str());
  auto preds = parse_outputs(outs);
  REQUIRE(preds.size() == 5);
  CHECK(preds[0].output.expression == Compound{{Sign::Plus, pairs[0].psi}});
  CHECK(preds[0].output.graph == pairs[0].dag);
}

TEST_CASE("outputs files") {
  std::istringstream in(
      R"j({"id": "a", "output": "Expression: P(Y)\nGraphical Representation: X->Y"})j"
      "\n\n"
      R"j({"id": 2, "expression": "P(Y | X)", "graph": "X->Y"})j"
      "\n"
      R"j({"id": "c", "expression": null})j"
      "\n");
  auto recs = parse_outputs(in);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].output.expression == parse_compound("P(Y)"));
  CHECK(recs[1].id == "2");
  CHECK(recs[1].output.graph == from_edge_list("X->Y"));
  CHECK_FALSE(recs[2].output.expression);
  CHECK(output_record(recs[1]) == R"j({"id":"2","expression":"P(Y | X)","graph":"X->Y","notes":[]})j");

  std::istringstream bad(R"j({"id": "a"})j");
  CHECK_THROWS_AS(parse_outputs(bad), SchemaError);
  std::istringstream bad2("[1]");
  CHECK_THROWS_AS(parse_outputs(bad2), SchemaError);
  CHECK_THROWS_AS(load_outputs_file("/nonexistent/out.jsonl"), IoError);
}

TEST_CASE("fixture files load and join") {
  auto bench = load_bench_file(fixture("bench.json"));
  REQUIRE(bench.size() == 9);
  CHECK(by_id(bench, "broken-gold").skip_reason.has_value());
  CHECK(by_id(bench, "nan-string").skip_reason.has_value());
  CHECK_FALSE(by_id(bench, "spicy-ate").skip_reason.has_value());

  auto outputs = load_outputs_file(fixture("model_outputs.jsonl"));
  REQUIRE(outputs.size() == 7);

  Joined j = join_outputs(bench, outputs);
  // Loaded plus skipped plus unmatched covers every record.
  CHECK(j.items.size() + j.excluded.skipped.size() + j.excluded.unmatched.size() == bench.size());
  CHECK(j.items.size() == 6);
  CHECK(j.excluded.skipped.size() == 2);
  CHECK(j.excluded.unmatched == std::vector<std::string>{"no-answer"});
  CHECK(j.excluded.extra == std::vector<std::string>{"not-in-bench"});

  for (const auto& item : j.items) {
    if (item.id == "mediated") {
      CHECK(item.graph == by_id(bench, "mediated").graph);
      CHECK(std::find(item.notes.begin(), item.notes.end(), "no model graph; verified against the gold graph") !=
            item.notes.end());
    }
  }
  Joined gold = join_outputs(bench, outputs, true);
  for (const auto& item : gold.items) CHECK(item.graph == by_id(bench, item.id).graph);
}
