#include "dover/graph.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "dover/error.hpp"

namespace dover {

std::vector<std::size_t> NodeSet::indices() const {
  std::vector<std::size_t> out;
  for_each([&](std::size_t i) { out.push_back(i); });
  return out;
}

NodeSet Topology::ancestors(NodeSet s, Cut cut) const {
  NodeSet seen;
  NodeSet frontier = s;
  while (!frontier.empty()) {
    NodeSet next;
    frontier.for_each([&](std::size_t v) { next |= parents_of(v, cut); });
    frontier = next - seen;
    seen |= next;
  }
  return seen - s;
}

NodeSet Topology::descendants(NodeSet s, Cut cut) const {
  NodeSet seen;
  NodeSet frontier = s;
  while (!frontier.empty()) {
    NodeSet next;
    frontier.for_each([&](std::size_t v) { next |= children_of(v, cut); });
    frontier = next - seen;
    seen |= next;
  }
  return seen - s;
}

// Moralized ancestral graph: a and b are d-separated by cond iff cond
// separates them in the moral graph of the ancestral closure of a, b, cond.
bool Topology::d_separated(NodeSet a, NodeSet b, NodeSet cond, Cut cut) const {
  NodeSet relevant = a | b | cond;
  NodeSet anc = relevant | ancestors(relevant, cut);

  std::array<std::uint64_t, kMaxNodes> nbr{};
  anc.for_each([&](std::size_t v) {
    NodeSet pa = parents_of(v, cut);
    nbr[v] |= (pa | (children_of(v, cut) & anc)).bits();
    pa.for_each([&](std::size_t p) { nbr[p] |= ((pa - NodeSet::single(p)) | NodeSet::single(v)).bits(); });
  });

  NodeSet open = anc - cond;
  NodeSet reached = a;
  NodeSet frontier = a;
  while (!frontier.empty()) {
    if (reached.intersects(b)) return false;
    std::uint64_t next = 0;
    frontier.for_each([&](std::size_t v) { next |= nbr[v]; });
    frontier = NodeSet(next) & open;
    frontier -= reached;
    reached |= frontier;
  }
  return !reached.intersects(b);
}

Dag::Dag(std::vector<std::string> nodes, std::vector<Edge> edges) {
  for (const auto& e : edges) {
    nodes.push_back(e.first);
    nodes.push_back(e.second);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (const auto& n : nodes) {
    if (!Variable::valid_name(n)) throw InvalidExpression("invalid node name '" + n + "'");
  }
  if (nodes.size() > kMaxNodes) {
    throw CapacityError("graph has " + std::to_string(nodes.size()) + " nodes; at most " +
                        std::to_string(kMaxNodes) + " are supported");
  }
  names_ = std::move(nodes);
  topo_.parents.assign(names_.size(), NodeSet{});
  topo_.children.assign(names_.size(), NodeSet{});
  for (const auto& [from, to] : edges) {
    if (from == to) throw CycleError("self-loop on '" + from + "'");
    std::size_t u = *index_of(from);
    std::size_t v = *index_of(to);
    topo_.parents[v] |= NodeSet::single(u);
    topo_.children[u] |= NodeSet::single(v);
  }

  // Kahn's algorithm.
  std::vector<int> indeg(size());
  for (std::size_t v = 0; v < size(); ++v) indeg[v] = topo_.parents[v].size();
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < size(); ++v) {
    if (indeg[v] == 0) ready.push_back(v);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    std::size_t v = ready.back();
    ready.pop_back();
    ++visited;
    topo_.children[v].for_each([&](std::size_t c) {
      if (--indeg[c] == 0) ready.push_back(c);
    });
  }
  if (visited != size()) {
    std::string members;
    for (std::size_t v = 0; v < size(); ++v) {
      if (indeg[v] > 0) members += (members.empty() ? "" : ", ") + names_[v];
    }
    throw CycleError("graph contains a directed cycle through {" + members + "}");
  }
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  for (std::size_t u = 0; u < size(); ++u) {
    topo_.children[u].for_each([&](std::size_t v) { out.emplace_back(names_[u], names_[v]); });
  }
  return out;
}

std::size_t Dag::edge_count() const {
  std::size_t n = 0;
  for (const auto& c : topo_.children) n += static_cast<std::size_t>(c.size());
  return n;
}

std::optional<std::size_t> Dag::index_of(std::string_view name) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), name);
  if (it == names_.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t Dag::require(std::string_view name) const {
  auto i = index_of(name);
  if (!i) throw UnknownVariable(std::string(name));
  return *i;
}

NodeSet Dag::mask(const VariableSet& vars) const {
  NodeSet s;
  for (const auto& v : vars) s |= NodeSet::single(require(v.name()));
  return s;
}

VariableSet Dag::variables(NodeSet s) const {
  VariableSet out;
  s.for_each([&](std::size_t i) { out.insert(Variable(names_[i])); });
  return out;
}

bool Dag::has_edge(std::string_view from, std::string_view to) const {
  auto u = index_of(from);
  auto v = index_of(to);
  return u && v && topo_.children[*u].contains(*v);
}

std::string Dag::to_edge_list() const {
  std::string out;
  for (const auto& [u, v] : edges()) {
    if (!out.empty()) out += ",";
    out += u + "->" + v;
  }
  return out;
}

Dag from_edge_list(std::string_view text, std::span<const std::string> nodes) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  std::vector<Edge> edges;
  bool blank = std::all_of(text.begin(), text.end(), is_space);
  std::size_t pos = 0;
  while (!blank) {
    std::size_t comma = text.find(',', pos);
    std::size_t end = comma == std::string_view::npos ? text.size() : comma;
    std::string_view token = text.substr(pos, end - pos);
    std::size_t arrow = token.find("->");
    if (arrow == std::string_view::npos) throw ParseError(pos, "expected 'A->B'");
    auto trim = [&](std::string_view s, std::size_t at) {
      std::size_t b = 0;
      while (b < s.size() && is_space(s[b])) ++b;
      std::size_t e = s.size();
      while (e > b && is_space(s[e - 1])) --e;
      std::string name(s.substr(b, e - b));
      if (!Variable::valid_name(name)) {
        throw ParseError(at + b, "invalid node name '" + name + "'");
      }
      return name;
    };
    std::string from = trim(token.substr(0, arrow), pos);
    std::string to = trim(token.substr(arrow + 2), pos + arrow + 2);
    edges.emplace_back(std::move(from), std::move(to));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  std::vector<std::string> all(nodes.begin(), nodes.end());
  for (const auto& n : all) {
    if (!Variable::valid_name(n)) throw ParseError(0, "invalid node name '" + n + "'");
  }
  return Dag(std::move(all), std::move(edges));
}

Dag apply_surgery(const Dag& g, const SurgerySpec& s) {
  NodeSet into = g.mask(s.remove_incoming_to);
  NodeSet out_of = g.mask(s.remove_outgoing_from);
  std::vector<Edge> kept;
  for (auto& e : g.edges()) {
    std::size_t u = *g.index_of(e.first);
    std::size_t v = *g.index_of(e.second);
    if (into.contains(v) || out_of.contains(u)) continue;
    kept.push_back(std::move(e));
  }
  return Dag(g.nodes(), std::move(kept));
}

VariableSet ancestors(const Dag& g, const VariableSet& s) {
  return g.variables(g.topology().ancestors(g.mask(s)));
}

VariableSet z_of_w(const Dag& g, const VariableSet& x, const VariableSet& z, const VariableSet& w) {
  NodeSet xm = g.mask(x), zm = g.mask(z), wm = g.mask(w);
  if (xm.intersects(zm) || xm.intersects(wm) || zm.intersects(wm)) {
    throw DisjointnessError("x, z and w must be pairwise disjoint");
  }
  NodeSet anc = g.topology().ancestors(wm, Cut{xm, {}});
  return g.variables(zm - anc);
}

bool d_separated(const Dag& g, const VariableSet& a, const VariableSet& b, const VariableSet& cond) {
  NodeSet am = g.mask(a), bm = g.mask(b), cm = g.mask(cond);
  if (am.empty() || bm.empty()) throw DisjointnessError("endpoint sets must be non-empty");
  if (am.intersects(bm) || am.intersects(cm) || bm.intersects(cm)) {
    throw DisjointnessError("endpoint and conditioning sets must be pairwise disjoint");
  }
  return g.topology().d_separated(am, bm, cm);
}

std::size_t hash_value(const Dag& g) {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&](std::size_t v) { h = (h ^ v) * 1099511628211ull; };
  for (const auto& n : g.nodes()) mix(std::hash<std::string>{}(n));
  for (const auto& p : g.topology().parents) mix(static_cast<std::size_t>(p.bits()));
  return h;
}

}  // namespace dover
