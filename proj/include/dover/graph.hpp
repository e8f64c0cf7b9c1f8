#pragma once

// Causal DAGs, graph surgery and d-separation.
//
// Nodes are kept sorted by name and addressed by index; node sets are 64-bit
// masks, which caps a graph at 64 variables.

#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dover/expr.hpp"

namespace dover {

inline constexpr std::size_t kMaxNodes = 64;

class NodeSet {
 public:
  constexpr NodeSet() = default;
  constexpr explicit NodeSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr NodeSet single(std::size_t i) { return NodeSet(std::uint64_t{1} << i); }
  static constexpr NodeSet first(std::size_t n) {
    return NodeSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(std::size_t i) const { return (bits_ >> i) & 1u; }
  constexpr bool subset_of(NodeSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr bool intersects(NodeSet o) const { return (bits_ & o.bits_) != 0; }
  int size() const { return std::popcount(bits_); }

  constexpr NodeSet& operator|=(NodeSet o) { bits_ |= o.bits_; return *this; }
  constexpr NodeSet& operator&=(NodeSet o) { bits_ &= o.bits_; return *this; }
  constexpr NodeSet& operator-=(NodeSet o) { bits_ &= ~o.bits_; return *this; }
  friend constexpr NodeSet operator|(NodeSet a, NodeSet b) { return NodeSet(a.bits_ | b.bits_); }
  friend constexpr NodeSet operator&(NodeSet a, NodeSet b) { return NodeSet(a.bits_ & b.bits_); }
  friend constexpr NodeSet operator-(NodeSet a, NodeSet b) { return NodeSet(a.bits_ & ~b.bits_); }
  friend constexpr bool operator==(NodeSet, NodeSet) = default;
  friend constexpr auto operator<=>(NodeSet, NodeSet) = default;

  // Indices in increasing order.
  template <class F>
  void for_each(F&& f) const {
    for (std::uint64_t b = bits_; b; b &= b - 1) f(static_cast<std::size_t>(std::countr_zero(b)));
  }
  std::vector<std::size_t> indices() const;

 private:
  std::uint64_t bits_ = 0;
};

// Edges removed from a graph before a query: everything into
// `remove_incoming_to` and everything out of `remove_outgoing_from`.
struct Cut {
  NodeSet into;
  NodeSet out_of;

  friend constexpr bool operator==(const Cut&, const Cut&) = default;
};

// Index-level adjacency shared by Dag and the rule engine.
struct Topology {
  std::vector<NodeSet> parents;
  std::vector<NodeSet> children;

  std::size_t size() const { return parents.size(); }
  NodeSet parents_of(std::size_t v, Cut cut = {}) const {
    return cut.into.contains(v) ? NodeSet{} : parents[v] - cut.out_of;
  }
  NodeSet children_of(std::size_t v, Cut cut = {}) const {
    return cut.out_of.contains(v) ? NodeSet{} : children[v] - cut.into;
  }

  // Strict ancestors of s (directed path of length >= 1), minus s itself.
  NodeSet ancestors(NodeSet s, Cut cut = {}) const;
  NodeSet descendants(NodeSet s, Cut cut = {}) const;
  bool d_separated(NodeSet a, NodeSet b, NodeSet cond, Cut cut = {}) const;
};

struct SurgerySpec {
  VariableSet remove_incoming_to;
  VariableSet remove_outgoing_from;
};

using Edge = std::pair<std::string, std::string>;

class Dag {
 public:
  Dag() = default;

  // Throws CycleError (including self-loops), CapacityError (> 64 nodes).
  // Duplicate edges collapse to one.
  Dag(std::vector<std::string> nodes, std::vector<Edge> edges);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& nodes() const noexcept { return names_; }
  // Sorted by (source, target) name.
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;

  std::optional<std::size_t> index_of(std::string_view name) const;
  // Throws UnknownVariable.
  std::size_t require(std::string_view name) const;
  NodeSet mask(const VariableSet& vars) const;
  VariableSet variables(NodeSet s) const;
  NodeSet all() const { return NodeSet::first(size()); }

  bool has_edge(std::string_view from, std::string_view to) const;
  const Topology& topology() const noexcept { return topo_; }

  // "A->B,C->D" rendering, edges sorted.
  std::string to_edge_list() const;

  friend bool operator==(const Dag& a, const Dag& b) {
    return a.names_ == b.names_ && a.topo_.parents == b.topo_.parents;
  }

 private:
  std::vector<std::string> names_;
  Topology topo_;
};

// Parses "A->B, B->C". Extra isolated nodes come from `nodes`.
// Throws ParseError on a malformed token, CycleError on a cycle.
Dag from_edge_list(std::string_view text, std::span<const std::string> nodes = {});

Dag apply_surgery(const Dag& g, const SurgerySpec& s);

VariableSet ancestors(const Dag& g, const VariableSet& s);

// Members of z that are not ancestors of any node of w once edges into x are
// removed. Throws DisjointnessError if x, z, w overlap.
VariableSet z_of_w(const Dag& g, const VariableSet& x, const VariableSet& z, const VariableSet& w);

// Throws DisjointnessError on overlapping or empty endpoint sets,
// UnknownVariable on names outside g.
bool d_separated(const Dag& g, const VariableSet& a, const VariableSet& b, const VariableSet& cond);

std::size_t hash_value(const Dag& g);

}  // namespace dover

template <>
struct std::hash<dover::Dag> {
  std::size_t operator()(const dover::Dag& g) const { return dover::hash_value(g); }
};
