#pragma once

// Bridges, articulation points and 2-edge-connected components from a
// rooted spanning forest annotated with preorder numbers, subtree sizes and
// the subtree extremes (Low/High) of non-tree edge endpoints.
//
// A tree edge (v, p) with p = parent(v) is critical when every non-tree
// edge leaving v's subtree lands inside p's subtree:
//   Low(v) >= PN(p)  and  High(v) <= PN(p) + Size(p) - 1,
// where Size counts the subtree's root. The label graph L joins v to p along
// every non-critical tree edge and joins the endpoints of every non-tree edge
// whose endpoints are unrelated (neither is an ancestor of the other).
// Non-tree edges between an ancestor and a descendant only feed Low/High.
// The head of an L-component is the parent of its preorder-first vertex.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ampc/connectivity.hpp"
#include "ampc/graph.hpp"
#include "ampc/primitives.hpp"
#include "ampc/runtime.hpp"
#include "ampc/trees.hpp"

namespace ampc {

inline constexpr std::uint32_t kNoEdge = std::numeric_limits<std::uint32_t>::max();

struct BCLabeling {
  ComponentLabeling components;           // L
  RootedForest forest;                    // F, parent[root] == root
  std::vector<std::uint32_t> parent_edge; // per vertex: input edge to its parent, kNoEdge at roots
  std::vector<std::uint32_t> preorder;    // per tree, root 0
  std::vector<std::uint32_t> size;        // subtree sizes counting the subtree root
  std::vector<std::int64_t> low;
  std::vector<std::int64_t> high;
  std::vector<char> critical;             // per vertex: its parent edge is critical
  std::vector<std::uint32_t> tree_edges;  // input edge indices, ascending

  bool is_root(Vertex v) const { return forest.parent[v] == v; }

  /// u is an ancestor of v (or v itself); only meaningful within one tree.
  bool ancestor(Vertex u, Vertex v) const {
    return preorder[u] <= preorder[v] && preorder[v] < preorder[u] + size[u];
  }

  std::vector<std::uint32_t> critical_edges() const {
    std::vector<std::uint32_t> out;
    for (Vertex v = 0; v < critical.size(); ++v) {
      if (critical[v]) out.push_back(parent_edge[v]);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

inline BCLabeling bc_labeling(const Graph& g, Simulator& sim, const ConnectivityOptions& opts = {}) {
  if (g.multigraph()) throw DomainError("biconnectivity expects a simple graph");
  const std::size_t n = g.n();
  BCLabeling bc;

  const SpanningForest sf = spanning_forest(g, sim, opts);
  bc.tree_edges = sf.edges;
  std::vector<Edge> forest_edges;
  forest_edges.reserve(sf.edges.size());
  std::vector<char> in_tree(g.m(), 0);
  for (std::uint32_t e : sf.edges) {
    forest_edges.push_back({g.edge(e).u, g.edge(e).v, 0});
    in_tree[e] = 1;
  }
  const Graph forest(n, std::move(forest_edges));
  const RootedTree rooted = root_forest(forest, sim);
  bc.forest = rooted.forest;
  bc.preorder = preorder_number(rooted, sim);
  bc.size = subtree_sizes(rooted, sim);

  bc.parent_edge.assign(n, kNoEdge);
  for (std::uint32_t e : sf.edges) {
    const Edge& ed = g.edge(e);
    const Vertex child = bc.forest.parent[ed.u] == ed.v ? ed.u : ed.v;
    bc.parent_edge[child] = e;
  }

  // Per-vertex extremes over incident non-tree edges, seeded with own PN.
  std::vector<std::int64_t> low_seed(n), high_seed(n);
  for (Vertex v = 0; v < n; ++v) low_seed[v] = high_seed[v] = bc.preorder[v];
  for (std::uint32_t e = 0; e < g.m(); ++e) {
    if (in_tree[e]) continue;
    const Edge& ed = g.edge(e);
    low_seed[ed.u] = std::min<std::int64_t>(low_seed[ed.u], bc.preorder[ed.v]);
    high_seed[ed.u] = std::max<std::int64_t>(high_seed[ed.u], bc.preorder[ed.v]);
    low_seed[ed.v] = std::min<std::int64_t>(low_seed[ed.v], bc.preorder[ed.u]);
    high_seed[ed.v] = std::max<std::int64_t>(high_seed[ed.v], bc.preorder[ed.u]);
  }
  sim.charge("bc/edge-extremes", {sim.config().primitive_rounds(), static_cast<std::int64_t>(2 * g.m())});
  const auto lows = SubtreeMinMax(rooted, low_seed, sim).query_all(sim);
  const auto highs = SubtreeMinMax(rooted, high_seed, sim).query_all(sim);
  bc.low.resize(n);
  bc.high.resize(n);
  for (Vertex v = 0; v < n; ++v) {
    bc.low[v] = lows[v].first;
    bc.high[v] = highs[v].second;
  }

  bc.critical.assign(n, 0);
  for (Vertex v = 0; v < n; ++v) {
    if (bc.is_root(v)) continue;
    const Vertex p = bc.forest.parent[v];
    const std::int64_t begin = bc.preorder[p];
    const std::int64_t last = begin + static_cast<std::int64_t>(bc.size[p]) - 1;
    bc.critical[v] = bc.low[v] >= begin && bc.high[v] <= last;
  }
  sim.charge("bc/critical", {1, static_cast<std::int64_t>(n)});

  std::vector<Edge> l_edges;
  for (Vertex v = 0; v < n; ++v) {
    if (!bc.is_root(v) && !bc.critical[v]) l_edges.push_back({v, bc.forest.parent[v], 0});
  }
  for (std::uint32_t e = 0; e < g.m(); ++e) {
    if (in_tree[e]) continue;
    const Edge& ed = g.edge(e);
    if (!bc.ancestor(ed.u, ed.v) && !bc.ancestor(ed.v, ed.u)) l_edges.push_back({ed.u, ed.v, 0});
  }
  sim.charge("bc/label-graph", {sim.config().primitive_rounds(), static_cast<std::int64_t>(g.m() + n)});
  const Graph l_graph(n, std::move(l_edges));
  bc.components = connectivity(l_graph, sim, opts).labels;
  return bc;
}

/// Tree edges (u, parent(u)) whose u is alone in its L-component.
inline std::vector<std::uint32_t> bridges(const BCLabeling& bc) {
  const std::size_t n = bc.components.size();
  std::vector<std::uint32_t> members(n, 0);
  for (Vertex v = 0; v < n; ++v) ++members[bc.components.label[v]];
  std::vector<std::uint32_t> out;
  for (Vertex v = 0; v < n; ++v) {
    if (!bc.is_root(v) && members[bc.components.label[v]] == 1) out.push_back(bc.parent_edge[v]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Number of L-components each vertex heads.
inline std::vector<std::uint32_t> headed_components(const BCLabeling& bc) {
  const std::size_t n = bc.components.size();
  std::vector<Vertex> first(n, kNoVertex);  // per label: preorder-first member
  for (Vertex v = 0; v < n; ++v) {
    Vertex& f = first[bc.components.label[v]];
    if (f == kNoVertex || bc.preorder[v] < bc.preorder[f]) f = v;
  }
  std::vector<std::uint32_t> heads(n, 0);
  for (Vertex f : first) {
    if (f != kNoVertex && !bc.is_root(f)) ++heads[bc.forest.parent[f]];
  }
  return heads;
}

/// Non-roots heading at least one L-component, roots heading at least two.
inline std::vector<Vertex> articulation_points(const BCLabeling& bc) {
  const auto heads = headed_components(bc);
  std::vector<Vertex> out;
  for (Vertex v = 0; v < heads.size(); ++v) {
    if (heads[v] >= (bc.is_root(v) ? 2u : 1u)) out.push_back(v);
  }
  return out;
}

/// Connectivity of the graph without its bridges.
inline ComponentLabeling two_edge_components(const Graph& g, Simulator& sim, const ConnectivityOptions& opts = {}) {
  const BCLabeling bc = bc_labeling(g, sim, opts);
  const auto cut = bridges(bc);
  std::vector<char> is_bridge(g.m(), 0);
  for (std::uint32_t e : cut) is_bridge[e] = 1;
  std::vector<Edge> kept;
  for (std::uint32_t e = 0; e < g.m(); ++e) {
    if (!is_bridge[e]) kept.push_back({g.edge(e).u, g.edge(e).v, 0});
  }
  sim.charge("2ecc/filter", {sim.config().primitive_rounds(), static_cast<std::int64_t>(g.m())});
  return connectivity(Graph(g.n(), std::move(kept)), sim, opts).labels;
}

}  // namespace ampc
