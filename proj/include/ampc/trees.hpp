#pragma once

// Euler tours of forests and what they give: forest connectivity, rooting,
// preorder numbers, subtree sizes and subtree min/max.
//
// Tree edge e contributes two darts: 2e runs edges[e].u -> edges[e].v and
// 2e + 1 runs back. The dart after u -> v is v -> w, where w follows u in
// v's neighbor list sorted ascending (wrapping around).

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ampc/contraction.hpp"
#include "ampc/errors.hpp"
#include "ampc/graph.hpp"
#include "ampc/primitives.hpp"
#include "ampc/runtime.hpp"

namespace ampc {

using Dart = std::uint32_t;
inline constexpr Dart kNoDart = kNoVertex;

struct EulerTour {
  std::size_t vertices = 0;
  std::vector<Edge> edges;
  std::vector<Dart> successor;  // one closed cycle of darts per tree
  std::vector<Dart> first_out;  // dart toward the smallest neighbor; kNoDart if isolated

  std::size_t darts() const { return successor.size(); }
  static constexpr Dart twin(Dart d) { return d ^ 1u; }
  Vertex tail(Dart d) const { return (d & 1u) ? edges[d >> 1].v : edges[d >> 1].u; }
  Vertex head(Dart d) const { return (d & 1u) ? edges[d >> 1].u : edges[d >> 1].v; }
};

namespace detail {

class Dsu {
 public:
  explicit Dsu(std::size_t n) : p_(n) { std::iota(p_.begin(), p_.end(), Vertex{0}); }
  Vertex find(Vertex x) {
    while (p_[x] != x) x = p_[x] = p_[p_[x]];
    return x;
  }
  bool join(Vertex a, Vertex b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<Vertex> p_;
};

}  // namespace detail

/// Successor structure of the Euler tours of a forest. Charged as one sort.
inline EulerTour euler_tour(const Graph& forest, Simulator& sim) {
  {
    detail::Dsu dsu(forest.n());
    for (const Edge& e : forest.edges()) {
      if (!dsu.join(e.u, e.v)) {
        throw StructureError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ") closes a cycle");
      }
    }
  }
  EulerTour t;
  t.vertices = forest.n();
  t.edges = forest.edges();
  t.successor.assign(2 * forest.m(), kNoDart);
  t.first_out.assign(forest.n(), kNoDart);
  auto out_dart = [&](Vertex v, std::uint32_t e) -> Dart { return 2 * e + (t.edges[e].u == v ? 0u : 1u); };
  for (Vertex v = 0; v < forest.n(); ++v) {
    const auto arcs = forest.arcs(v);
    if (arcs.empty()) continue;
    t.first_out[v] = out_dart(v, arcs[0].edge);
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      const Dart in = EulerTour::twin(out_dart(v, arcs[i].edge));
      t.successor[in] = out_dart(v, arcs[(i + 1) % arcs.size()].edge);
    }
  }
  sim.charge("euler/sort", {sim.config().primitive_rounds(),
                            sim.config().primitive_rounds() * static_cast<std::int64_t>(t.darts())});
  return t;
}

/// The tours as a union of cycles over dart ids: port 0 leads to the
/// successor, port 1 to the predecessor.
inline CycleGraph tour_cycles(const EulerTour& t) {
  std::vector<Port> links(2 * t.darts(), kNoPort);
  std::vector<Vertex> ids(t.darts());
  std::iota(ids.begin(), ids.end(), Vertex{0});
  for (Dart d = 0; d < t.darts(); ++d) {
    links[make_port(d, 0)] = make_port(t.successor[d], 1);
    links[make_port(t.successor[d], 1)] = make_port(d, 0);
  }
  return CycleGraph(std::move(ids), std::move(links));
}

/// Component labels of a forest via connectivity on its Euler tours. A
/// vertex is labelled by the tail of its tour's representative dart;
/// isolated vertices label themselves.
inline std::vector<Vertex> forest_connectivity(const Graph& forest, Simulator& sim) {
  const EulerTour t = euler_tour(forest, sim);
  std::vector<Vertex> label(forest.n());
  std::iota(label.begin(), label.end(), Vertex{0});
  if (t.darts() == 0) return label;
  const auto dart_label = cycle_conn(tour_cycles(t), sim);
  for (Vertex v = 0; v < forest.n(); ++v) {
    if (t.first_out[v] != kNoDart) label[v] = t.tail(dart_label[t.first_out[v]]);
  }
  sim.charge("forest-conn/label", {1, static_cast<std::int64_t>(forest.n())});
  return label;
}

/// Lowest vertex id of every component, from forest connectivity.
inline std::vector<Vertex> default_roots(const Graph& forest, Simulator& sim) {
  const auto label = forest_connectivity(forest, sim);
  std::vector<std::pair<Vertex, Vertex>> pairs(forest.n());
  for (Vertex v = 0; v < forest.n(); ++v) pairs[v] = {label[v], v};
  auto sorted = settle(sim, "roots/sort", mpc_sort(std::move(pairs), sim.config().epsilon));
  std::vector<Vertex> roots;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i == 0 || sorted[i].first != sorted[i - 1].first) roots.push_back(sorted[i].second);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// A rooted forest with its ranked Euler sequence.
struct RootedTree {
  RootedForest forest;
  EulerTour tour;
  std::vector<std::uint64_t> rank;      // per dart: distance from its tree's first dart
  std::vector<char> forward;            // per dart: parent -> child
  std::vector<std::uint64_t> position;  // per dart: index in the concatenated Euler sequence
  std::vector<Dart> sequence;           // darts by position
  std::vector<Dart> enter;              // per vertex: forward dart into it; kNoDart for roots
  std::vector<std::uint64_t> tree_begin;  // per vertex: first position of its tree
  std::vector<std::uint64_t> tree_size;   // per vertex: vertices in its tree
  std::size_t list_iterations = 0;
};

/// Roots every tree at the given vertex (one per tree). The tour of each
/// tree is cut just before root -> smallest neighbor, list ranked, and each
/// edge's lower-ranked dart is its forward one.
inline RootedTree root_forest(const Graph& forest, std::span<const Vertex> roots, Simulator& sim) {
  const std::size_t n = forest.n();
  {
    detail::Dsu dsu(n);
    for (const Edge& e : forest.edges()) dsu.join(e.u, e.v);
    std::vector<char> has_root(n, 0);
    for (Vertex r : roots) {
      if (r >= n) throw DomainError("root " + std::to_string(r) + " is not a vertex of the forest");
      const Vertex c = dsu.find(r);
      if (has_root[c]) throw DomainError("two roots given for the tree of vertex " + std::to_string(r));
      has_root[c] = 1;
    }
    for (Vertex v = 0; v < n; ++v) {
      if (!has_root[dsu.find(v)]) throw DomainError("no root given for the tree of vertex " + std::to_string(v));
    }
  }
  RootedTree out;
  out.tour = euler_tour(forest, sim);
  const EulerTour& t = out.tour;
  out.forest.roots.assign(roots.begin(), roots.end());

  std::vector<Vertex> successor(t.successor.begin(), t.successor.end());
  std::vector<Vertex> heads;
  for (Vertex r : roots) {
    const Dart first = t.first_out[r];
    if (first == kNoDart) continue;
    heads.push_back(first);
  }
  // Cut each cycle just before its head.
  std::vector<char> is_head(t.darts(), 0);
  for (Vertex h : heads) is_head[h] = 1;
  for (Dart d = 0; d < t.darts(); ++d) {
    if (is_head[t.successor[d]]) successor[d] = kNoVertex;
  }
  ListRanks ranks = rank_lists(successor, heads, sim);
  out.list_iterations = ranks.iterations;
  out.rank = ranks.rank;

  out.forward.assign(t.darts(), 0);
  out.forest.parent.resize(n);
  std::iota(out.forest.parent.begin(), out.forest.parent.end(), Vertex{0});
  out.enter.assign(n, kNoDart);
  for (Dart d = 0; d < t.darts(); ++d) {
    if (out.rank[d] < out.rank[EulerTour::twin(d)]) {
      out.forward[d] = 1;
      out.forest.parent[t.head(d)] = t.tail(d);
      out.enter[t.head(d)] = d;
    }
  }
  sim.charge("root/orient", {1, static_cast<std::int64_t>(t.darts())});

  // Concatenate the trees' sequences in root order.
  std::vector<std::uint64_t> offset_of_head(t.darts(), 0);
  std::vector<std::uint64_t> root_begin(n, 0), root_size(n, 1);
  std::uint64_t offset = 0;
  std::vector<std::uint64_t> darts_in(t.darts(), 0);
  for (Dart d = 0; d < t.darts(); ++d) ++darts_in[ranks.head[d]];
  for (Vertex r : roots) {
    root_begin[r] = offset;
    const Dart first = t.first_out[r];
    if (first == kNoDart) continue;
    offset_of_head[first] = offset;
    root_size[r] = darts_in[first] / 2 + 1;
    offset += darts_in[first];
  }
  out.position.assign(t.darts(), 0);
  std::vector<std::pair<std::uint64_t, Dart>> keyed(t.darts());
  for (Dart d = 0; d < t.darts(); ++d) {
    out.position[d] = offset_of_head[ranks.head[d]] + out.rank[d];
    keyed[d] = {out.position[d], d};
  }
  const auto sorted = settle(sim, "root/sequence", mpc_sort(std::move(keyed), sim.config().epsilon));
  out.sequence.resize(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) out.sequence[i] = sorted[i].second;

  // Tree extent per vertex, by following parents up to the root (charged as
  // the label broadcast from each head).
  out.tree_begin.assign(n, 0);
  out.tree_size.assign(n, 1);
  for (Vertex r : roots) {
    out.tree_begin[r] = root_begin[r];
    out.tree_size[r] = root_size[r];
  }
  for (Dart d = 0; d < t.darts(); ++d) {
    const Vertex r = t.tail(ranks.head[d]);
    out.tree_begin[t.tail(d)] = root_begin[r];
    out.tree_size[t.tail(d)] = root_size[r];
  }
  sim.charge("root/broadcast", {1, static_cast<std::int64_t>(n)});
  return out;
}

inline RootedTree root_forest(const Graph& forest, Simulator& sim) {
  const auto roots = default_roots(forest, sim);
  return root_forest(forest, roots, sim);
}

namespace detail {

// Inclusive count of forward darts up to each position, restarting per tree.
inline std::vector<std::uint64_t> forward_prefix(const RootedTree& t, Simulator& sim) {
  std::vector<std::uint64_t> flags(t.sequence.size());
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = t.forward[t.sequence[i]];
  const auto pref = settle(sim, "tree/prefix",
                           mpc_prefix_sum<std::uint64_t>(flags, std::plus<>{}, 0, sim.config().epsilon));
  std::vector<std::uint64_t> inclusive(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) inclusive[i] = pref[i].second + flags[i];
  // Subtract the running count at each tree's first position.
  std::vector<std::uint64_t> out(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const Vertex owner = t.tour.tail(t.sequence[i]);
    const std::uint64_t begin = t.tree_begin[owner];
    out[i] = inclusive[i] - pref[begin].second;
  }
  return out;
}

}  // namespace detail

/// Preorder numbers: the number of forward darts up to and including the
/// one entering v. Roots get 0, and each tree is numbered 0..size-1.
inline std::vector<std::uint32_t> preorder_number(const RootedTree& t, Simulator& sim) {
  const auto pref = detail::forward_prefix(t, sim);
  std::vector<std::uint32_t> pn(t.forest.parent.size(), 0);
  for (Vertex v = 0; v < pn.size(); ++v) {
    if (t.enter[v] != kNoDart) pn[v] = static_cast<std::uint32_t>(pref[t.position[t.enter[v]]]);
  }
  return pn;
}

/// Subtree sizes: forward darts strictly between v's entering dart and its
/// twin, plus one for v. A root's size is its tree's size.
inline std::vector<std::uint32_t> subtree_sizes(const RootedTree& t, Simulator& sim) {
  const auto pref = detail::forward_prefix(t, sim);
  std::vector<std::uint32_t> size(t.forest.parent.size(), 1);
  for (Vertex v = 0; v < size.size(); ++v) {
    const Dart in = t.enter[v];
    if (in == kNoDart) {
      size[v] = static_cast<std::uint32_t>(t.tree_size[v]);
    } else {
      size[v] = static_cast<std::uint32_t>(pref[t.position[EulerTour::twin(in)]] - pref[t.position[in]] + 1);
    }
  }
  return size;
}

/// Min and max of per-vertex values over every subtree, answered by range
/// queries over the Euler sequence. Position i holds the value of the head
/// of the dart at i, so v's subtree is the range from its entering dart up
/// to (not including) the dart leaving it.
class SubtreeMinMax {
 public:
  SubtreeMinMax(const RootedTree& t, std::span<const std::int64_t> values, Simulator& sim)
      : tree_(&t), values_(values.begin(), values.end()) {
    std::vector<std::int64_t> seq(t.sequence.size());
    for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = values_[t.tour.head(t.sequence[i])];
    rmq_ = settle(sim, "subtree/rmq-build", rmq_build(std::move(seq), sim.config().epsilon));
  }

  std::pair<std::int64_t, std::int64_t> query(Vertex v) const {
    const RootedTree& t = *tree_;
    const std::int64_t own = values_[v];
    std::size_t lo = 0, hi = 0;
    if (t.enter[v] != kNoDart) {
      lo = t.position[t.enter[v]];
      hi = t.position[EulerTour::twin(t.enter[v])] - 1;
    } else if (t.tree_size[v] > 1) {
      lo = t.tree_begin[v];
      hi = lo + 2 * (t.tree_size[v] - 1) - 1;
    } else {
      return {own, own};
    }
    return {std::min(own, rmq_.min(lo, hi)), std::max(own, rmq_.max(lo, hi))};
  }

  /// Answers every vertex at once; charged as one query round.
  std::vector<std::pair<std::int64_t, std::int64_t>> query_all(Simulator& sim) const {
    std::vector<std::pair<std::int64_t, std::int64_t>> out(values_.size());
    for (Vertex v = 0; v < out.size(); ++v) out[v] = query(v);
    sim.charge("subtree/rmq-query", {1, 2 * static_cast<std::int64_t>(out.size())});
    return out;
  }

 private:
  const RootedTree* tree_;
  std::vector<std::int64_t> values_;
  RangeMinMax<std::int64_t> rmq_;
};

}  // namespace ampc
