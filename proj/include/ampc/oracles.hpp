#pragma once

// Sequential reference implementations. This header depends only on the
// graph model so the ground truth never shares code with the algorithms it
// checks.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ampc/errors.hpp"
#include "ampc/graph.hpp"

namespace ampc::oracle {

struct OracleReport {
  bool match = true;
  std::string first_divergence;

  explicit operator bool() const { return match; }
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

/// Relabels so the first vertex of each class gets the next unused label.
inline std::vector<std::uint32_t> canonical(std::span<const Vertex> label) {
  std::vector<std::uint32_t> out(label.size());
  std::vector<std::pair<Vertex, std::uint32_t>> order(label.size());
  for (std::uint32_t i = 0; i < label.size(); ++i) order[i] = {label[i], i};
  std::sort(order.begin(), order.end());
  std::vector<std::uint32_t> first(label.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && order[j].first == order[i].first) ++j;
    for (std::size_t k = i; k < j; ++k) first[order[k].second] = order[i].second;
    i = j;
  }
  std::vector<std::uint32_t> id(label.size(), UINT32_MAX);
  std::uint32_t next = 0;
  for (std::uint32_t v = 0; v < label.size(); ++v) {
    if (id[first[v]] == UINT32_MAX) id[first[v]] = next++;
    out[v] = id[first[v]];
  }
  return out;
}

inline OracleReport same_partition(std::span<const Vertex> got, std::span<const Vertex> want) {
  if (got.size() != want.size()) {
    return {false, "labelings cover " + std::to_string(got.size()) + " and " + std::to_string(want.size()) +
                       " vertices"};
  }
  const auto a = canonical(got), b = canonical(want);
  for (std::size_t v = 0; v < a.size(); ++v) {
    if (a[v] != b[v]) {
      return {false, "vertex " + std::to_string(v) + " is in class " + std::to_string(a[v]) + ", expected " +
                         std::to_string(b[v])};
    }
  }
  return {};
}

template <class T>
OracleReport same_sequence(std::span<const T> got, std::span<const T> want, const std::string& what) {
  if (got.size() != want.size()) {
    return {false, what + ": sizes " + std::to_string(got.size()) + " vs " + std::to_string(want.size())};
  }
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i] != want[i]) {
      return {false, what + " differs at " + std::to_string(i) + ": " + std::to_string(got[i]) + " vs " +
                         std::to_string(want[i])};
    }
  }
  return {};
}

/// Union-find components; each vertex is labelled by the smallest id in its component.
inline std::vector<Vertex> uf_components(const Graph& g) {
  UnionFind uf(g.n());
  for (const Edge& e : g.edges()) uf.unite(e.u, e.v);
  std::vector<Vertex> smallest(g.n(), kNoVertex), out(g.n());
  for (Vertex v = 0; v < g.n(); ++v) {
    Vertex& s = smallest[uf.find(v)];
    if (s == kNoVertex) s = v;
    out[v] = s;
  }
  return out;
}

/// Flood fill over the edge list; a second, independent component oracle.
inline std::vector<Vertex> bfs_components(const Graph& g) {
  std::vector<std::vector<Vertex>> adj(g.n());
  for (const Edge& e : g.edges()) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<Vertex> out(g.n(), kNoVertex);
  std::vector<Vertex> queue;
  for (Vertex s = 0; s < g.n(); ++s) {
    if (out[s] != kNoVertex) continue;
    out[s] = s;
    queue.assign(1, s);
    for (std::size_t h = 0; h < queue.size(); ++h) {
      for (Vertex x : adj[queue[h]]) {
        if (out[x] == kNoVertex) {
          out[x] = s;
          queue.push_back(x);
        }
      }
    }
  }
  return out;
}

inline std::size_t count_components(std::span<const Vertex> label) {
  std::vector<Vertex> l(label.begin(), label.end());
  std::sort(l.begin(), l.end());
  return static_cast<std::size_t>(std::unique(l.begin(), l.end()) - l.begin());
}

/// Edge indices of the unique minimum spanning forest, ascending by weight.
inline std::vector<std::uint32_t> kruskal_msf(const Graph& g) {
  std::vector<std::uint32_t> order(g.m());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return g.edge(a).w < g.edge(b).w; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (g.edge(order[i]).w == g.edge(order[i - 1]).w) {
      throw DomainError("duplicate edge weight " + std::to_string(g.edge(order[i]).w));
    }
  }
  UnionFind uf(g.n());
  std::vector<std::uint32_t> out;
  for (std::uint32_t i : order) {
    if (uf.unite(g.edge(i).u, g.edge(i).v)) out.push_back(i);
  }
  return out;
}

struct BridgeReport {
  std::vector<std::uint32_t> bridges;     // edge indices, ascending
  std::vector<Vertex> articulation;       // ascending
};

/// Iterative Hopcroft-Tarjan low-link computation.
inline BridgeReport tarjan_bridges_aps(const Graph& g) {
  const std::size_t n = g.n();
  std::vector<std::vector<std::pair<Vertex, std::uint32_t>>> adj(n);
  for (std::uint32_t i = 0; i < g.m(); ++i) {
    adj[g.edge(i).u].push_back({g.edge(i).v, i});
    adj[g.edge(i).v].push_back({g.edge(i).u, i});
  }
  std::vector<std::uint32_t> disc(n, UINT32_MAX), low(n, 0);
  std::vector<char> cut(n, 0);
  BridgeReport out;
  std::uint32_t timer = 0;
  struct Frame {
    Vertex v;
    std::uint32_t via;  // edge used to enter v
    std::size_t next;
    std::uint32_t children;
  };
  std::vector<Frame> stack;
  for (Vertex root = 0; root < n; ++root) {
    if (disc[root] != UINT32_MAX) continue;
    disc[root] = low[root] = timer++;
    stack.push_back({root, UINT32_MAX, 0, 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < adj[f.v].size()) {
        const auto [to, e] = adj[f.v][f.next++];
        if (e == f.via) continue;
        if (disc[to] == UINT32_MAX) {
          disc[to] = low[to] = timer++;
          ++f.children;
          stack.push_back({to, e, 0, 0});
        } else {
          low[f.v] = std::min(low[f.v], disc[to]);
        }
        continue;
      }
      const Frame done = f;
      stack.pop_back();
      if (stack.empty()) {
        if (done.children >= 2) cut[done.v] = 1;
        continue;
      }
      Frame& parent = stack.back();
      low[parent.v] = std::min(low[parent.v], low[done.v]);
      if (low[done.v] > disc[parent.v]) out.bridges.push_back(done.via);
      if (stack.size() >= 2 && low[done.v] >= disc[parent.v]) cut[parent.v] = 1;
    }
  }
  std::sort(out.bridges.begin(), out.bridges.end());
  for (Vertex v = 0; v < n; ++v) {
    if (cut[v]) out.articulation.push_back(v);
  }
  return out;
}

namespace detail {

inline std::size_t components_without(const Graph& g, std::uint32_t skip_edge, Vertex skip_vertex) {
  UnionFind uf(g.n());
  std::size_t count = g.n() - (skip_vertex == kNoVertex ? 0 : 1);
  for (std::uint32_t i = 0; i < g.m(); ++i) {
    const Edge& e = g.edge(i);
    if (i == skip_edge || e.u == skip_vertex || e.v == skip_vertex) continue;
    if (uf.unite(e.u, e.v)) --count;
  }
  return count;
}

}  // namespace detail

/// Bridges by deleting each edge and recounting components.
inline std::vector<std::uint32_t> brute_force_bridges(const Graph& g) {
  const std::size_t base = detail::components_without(g, UINT32_MAX, kNoVertex);
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < g.m(); ++i) {
    if (detail::components_without(g, i, kNoVertex) > base) out.push_back(i);
  }
  return out;
}

/// Articulation points by deleting each vertex and recounting components.
inline std::vector<Vertex> brute_force_articulation(const Graph& g) {
  const std::size_t base = detail::components_without(g, UINT32_MAX, kNoVertex);
  std::vector<Vertex> out;
  for (Vertex v = 0; v < g.n(); ++v) {
    // Removing an isolated vertex drops one component; anything else that
    // raises the count past base - 1 + 1 splits its component.
    const std::size_t without = detail::components_without(g, UINT32_MAX, v);
    const std::size_t expected = g.degree(v) == 0 ? base - 1 : base;
    if (without > expected) out.push_back(v);
  }
  return out;
}

/// 2-edge-connected components: components after deleting every bridge.
inline std::vector<Vertex> two_edge_components(const Graph& g) {
  const auto bridges = tarjan_bridges_aps(g).bridges;
  std::vector<char> is_bridge(g.m(), 0);
  for (auto b : bridges) is_bridge[b] = 1;
  UnionFind uf(g.n());
  for (std::uint32_t i = 0; i < g.m(); ++i) {
    if (!is_bridge[i]) uf.unite(g.edge(i).u, g.edge(i).v);
  }
  std::vector<Vertex> out(g.n());
  for (Vertex v = 0; v < g.n(); ++v) out[v] = uf.find(v);
  return out;
}

/// Distance from the head for every element of the list starting at `head`.
/// Elements not on the list get rank UINT64_MAX.
inline std::vector<std::uint64_t> seq_list_rank(std::span<const Vertex> successor, Vertex head) {
  std::vector<std::uint64_t> rank(successor.size(), UINT64_MAX);
  std::uint64_t r = 0;
  for (Vertex v = head; v != kNoVertex; v = successor[v]) {
    if (rank[v] != UINT64_MAX) throw StructureError("list revisits element " + std::to_string(v));
    rank[v] = r++;
  }
  return rank;
}

struct DfsTree {
  std::vector<Vertex> parent;
  std::vector<std::uint32_t> preorder;
  std::vector<std::uint32_t> size;
};

/// Depth-first traversal of a forest from the given roots. A root visits
/// its neighbors in ascending id order; any other vertex visits them in
/// ascending cyclic order starting just after its parent. Preorder numbers
/// restart at 0 per tree.
inline DfsTree seq_dfs_tree(const Graph& forest, std::span<const Vertex> roots) {
  const std::size_t n = forest.n();
  std::vector<std::vector<Vertex>> adj(n);
  for (const Edge& e : forest.edges()) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  DfsTree t{std::vector<Vertex>(n, kNoVertex), std::vector<std::uint32_t>(n, 0), std::vector<std::uint32_t>(n, 1)};
  struct Frame {
    Vertex v;
    std::size_t start;
    std::size_t done;
  };
  std::vector<Frame> stack;
  auto enter = [&](Vertex x, Vertex parent, std::uint32_t pn) {
    t.parent[x] = parent;
    t.preorder[x] = pn;
    std::size_t start = 0;
    if (x != parent) {
      start = static_cast<std::size_t>(std::upper_bound(adj[x].begin(), adj[x].end(), parent) - adj[x].begin());
    }
    stack.push_back({x, start, 0});
  };
  for (Vertex r : roots) {
    if (t.parent[r] != kNoVertex) throw StructureError("two roots in one tree");
    std::uint32_t counter = 0;
    enter(r, r, counter++);
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& nb = adj[f.v];
      if (f.done < nb.size()) {
        const Vertex x = nb[(f.start + f.done++) % nb.size()];
        if (x == t.parent[f.v] && f.v != r) continue;
        if (t.parent[x] != kNoVertex) throw StructureError("forest contains a cycle");
        enter(x, f.v, counter++);
      } else {
        const Vertex finished = f.v;
        stack.pop_back();
        if (!stack.empty()) t.size[stack.back().v] += t.size[finished];
      }
    }
  }
  for (Vertex v = 0; v < n; ++v) {
    if (t.parent[v] == kNoVertex) throw StructureError("vertex " + std::to_string(v) + " has no root");
  }
  return t;
}

}  // namespace ampc::oracle
