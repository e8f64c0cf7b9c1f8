#pragma once

// Random inputs for property tests.

#include <random>
#include <string>
#include <vector>

#include "dover/expr.hpp"
#include "dover/graph.hpp"

namespace testing_support {

inline std::string node_name(int i) { return std::string(1, static_cast<char>('A' + i)); }

// DAG on n nodes A, B, ... with edges only from lower to higher letter.
inline dover::Dag random_dag(std::mt19937& rng, int n, double p = 0.5) {
  std::vector<std::string> nodes;
  std::vector<dover::Edge> edges;
  std::bernoulli_distribution coin(p);
  for (int i = 0; i < n; ++i) nodes.push_back(node_name(i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) edges.emplace_back(node_name(i), node_name(j));
  return dover::Dag(nodes, edges);
}

// All DAGs on n nodes whose edges respect the alphabetical order, as the
// bits of `mask` over the i<j pairs.
inline dover::Dag ordered_dag(int n, std::uint32_t mask) {
  std::vector<std::string> nodes;
  std::vector<dover::Edge> edges;
  for (int i = 0; i < n; ++i) nodes.push_back(node_name(i));
  int bit = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++bit)
      if (mask & (1u << bit)) edges.emplace_back(node_name(i), node_name(j));
  return dover::Dag(nodes, edges);
}

inline int pair_count(int n) { return n * (n - 1) / 2; }

// Random well-formed expression over the graph's nodes; each non-outcome
// variable is absent, observed or intervened. Values appear when asked.
inline dover::CausalExpr random_expr(std::mt19937& rng, const dover::Dag& g, bool values = false,
                                     bool allow_expectation = false) {
  const auto& nodes = g.nodes();
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  std::uniform_int_distribution<int> role(0, 2);
  std::bernoulli_distribution coin(0.3);
  std::size_t y = pick(rng);
  std::vector<dover::Term> cond;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i == y) continue;
    int r = role(rng);
    if (r == 0) continue;
    dover::Value v;
    if (values && coin(rng)) v = coin(rng) ? "1" : "z";
    cond.push_back(r == 1 ? dover::Term::observed(nodes[i], v) : dover::Term::intervened(nodes[i], v));
  }
  dover::Value yv;
  if (values && coin(rng)) yv = "0";
  if (allow_expectation && coin(rng)) {
    return dover::CausalExpr::expectation({dover::Variable(nodes[y]), std::nullopt}, cond);
  }
  return dover::CausalExpr::probability({{dover::Variable(nodes[y]), yv}}, cond);
}

}  // namespace testing_support
