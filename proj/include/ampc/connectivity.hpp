#pragma once

// Leader contraction for connected components and minimum spanning forests.
// Each phase grows every vertex's neighborhood to a budget d by local
// exploration, samples leaders, and contracts every vertex into a leader it
// can see. Sparse inputs are first thinned by a constant-round vertex
// shrinker that merges along min-id (or lightest-edge) pointers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ampc/errors.hpp"
#include "ampc/graph.hpp"
#include "ampc/primitives.hpp"
#include "ampc/random.hpp"
#include "ampc/runtime.hpp"

namespace ampc {

namespace table {
inline constexpr std::uint32_t kConnAdjacency = 40;
inline constexpr std::uint32_t kMsfAdjacency = 41;
}  // namespace table

struct ConnectivityOptions {
  double leader_constant = 4.0;
  // Throw LeaderSamplingFailure when a vertex of degree >= d sees no leader.
  // Otherwise it contracts by the low-degree rule and the event is counted.
  bool strict_leaders = false;
  bool reduce_sparse = true;  // apply the vertex shrinker when m < n ln^2 n
  std::size_t max_iterations = 64;
};

/// Per-phase exploration budget: starts at max(2, floor(sqrt(T / n))) and
/// moves by d <- min(ceil(d^1.4), cap) with cap = max(2, floor(n^(eps/3))).
class BudgetSchedule {
 public:
  BudgetSchedule(const ModelConfig& cfg, std::size_t active) {
    cap_ = std::max<std::uint64_t>(2, detail::floor_power(std::max<std::uint64_t>(cfg.n, 1), cfg.epsilon / 3.0));
    const double ratio = static_cast<double>(cfg.total_space) / static_cast<double>(std::max<std::size_t>(active, 1));
    const auto start = static_cast<std::uint64_t>(std::floor(std::sqrt(ratio)));
    d_ = std::min(cap_, std::max<std::uint64_t>(2, start));
    history_.push_back(d_);
  }

  std::uint64_t d() const { return d_; }
  std::uint64_t cap() const { return cap_; }
  const std::vector<std::uint64_t>& history() const { return history_; }

  static std::uint64_t next(std::uint64_t d, std::uint64_t cap) {
    const double grown = std::ceil(std::pow(static_cast<double>(d), 1.4) - 1e-9);
    return std::min<std::uint64_t>(cap, static_cast<std::uint64_t>(grown));
  }

  void advance() {
    d_ = next(d_, cap_);
    history_.push_back(d_);
  }

 private:
  std::uint64_t d_ = 2;
  std::uint64_t cap_ = 2;
  std::vector<std::uint64_t> history_;
};

namespace detail {

inline std::uint64_t adjacency_key(Vertex v, std::size_t j) {
  return static_cast<std::uint64_t>(v) << 32 | static_cast<std::uint64_t>(j);
}

inline std::vector<std::uint64_t> non_isolated(const Graph& g) {
  std::vector<std::uint64_t> out;
  for (Vertex v = 0; v < g.n(); ++v) {
    if (g.degree(v) > 0) out.push_back(v);
  }
  return out;
}

inline double leader_probability(const ModelConfig& cfg, double constant, std::uint64_t d) {
  const double ln_n = std::log(static_cast<double>(std::max<std::uint64_t>(cfg.n, 2)));
  return std::min(0.5, constant * ln_n / static_cast<double>(d));
}

inline Graph simple_union(std::size_t n, std::vector<std::uint64_t> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (std::uint64_t p : pairs) edges.push_back({static_cast<Vertex>(p >> 32), static_cast<Vertex>(p), 0});
  return Graph(n, std::move(edges));
}

inline std::uint64_t pair_key(Vertex a, Vertex b) {
  const std::uint64_t lo = std::min(a, b), hi = std::max(a, b);
  return lo << 32 | hi;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Increasing degrees by local BFS

struct DegreeIncrease {
  Graph graph;                              // input plus {v, x} for x in N_v
  std::vector<std::vector<Vertex>> reached; // N_v in BFS order
  std::vector<std::uint64_t> queries;       // store reads per vertex
};

/// Every vertex runs a BFS over the stored adjacency until it has reached d
/// other vertices or its whole component, then links to all of them. A
/// vertex reads one adjacency entry per query, so it issues at most d^2.
inline DegreeIncrease increase_degree(const Graph& g, std::uint64_t d, Simulator& sim) {
  if (d < 1) throw DomainError("degree budget must be at least 1");
  const std::size_t n = g.n();
  std::vector<std::uint64_t> arc_owner;
  arc_owner.reserve(2 * g.m());
  for (Vertex v = 0; v < n; ++v) {
    for (std::size_t j = 0; j < g.degree(v); ++j) arc_owner.push_back(v);
  }
  std::vector<std::size_t> first(n + 1, 0);
  for (Vertex v = 0; v < n; ++v) first[v + 1] = first[v] + g.degree(v);

  sim.run_range("increase-degree/publish", arc_owner.size(), [&](MachineContext& ctx, std::uint64_t i) {
    const Vertex v = static_cast<Vertex>(arc_owner[i]);
    const std::size_t j = i - first[v];
    ctx.write({table::kConnAdjacency, detail::adjacency_key(v, j)},
              {static_cast<Word>(g.arcs(v)[j].to), static_cast<Word>(g.degree(v))});
  });

  DegreeIncrease out;
  out.reached.assign(n, {});
  out.queries.assign(n, 0);
  const auto items = detail::non_isolated(g);
  sim.run_items("increase-degree/bfs", items, [&](MachineContext& ctx, std::uint64_t item) {
    const Vertex v = static_cast<Vertex>(item);
    const std::uint64_t before = ctx.queries();
    std::vector<Vertex> visited{v};
    // Every entry also carries its owner's degree, so entry 0 tells how far
    // to scan.
    for (std::size_t head = 0; head < visited.size() && visited.size() <= d; ++head) {
      const Vertex x = visited[head];
      std::uint64_t deg_x = 1;
      for (std::uint64_t j = 0; j < deg_x && visited.size() <= d; ++j) {
        const auto rec = ctx.query({table::kConnAdjacency, detail::adjacency_key(x, j)});
        if (j == 0) deg_x = static_cast<std::uint64_t>((*rec)[1]);
        const Vertex y = static_cast<Vertex>((*rec)[0]);
        if (std::find(visited.begin(), visited.end(), y) == visited.end()) visited.push_back(y);
      }
    }
    out.reached[v].assign(visited.begin() + 1, visited.end());
    out.queries[v] = ctx.queries() - before;
  });

  std::vector<std::uint64_t> pairs;
  pairs.reserve(g.m() + n * d);
  for (const Edge& e : g.edges()) pairs.push_back(detail::pair_key(e.u, e.v));
  for (Vertex v = 0; v < n; ++v) {
    for (Vertex x : out.reached[v]) pairs.push_back(detail::pair_key(v, x));
  }
  sim.charge("increase-degree/dedup", {sim.config().primitive_rounds(), static_cast<std::int64_t>(pairs.size())});
  out.graph = detail::simple_union(n, std::move(pairs));
  return out;
}

// ---------------------------------------------------------------------------
// Constant-factor vertex shrinking for sparse inputs

namespace detail {

/// The six-line merge over a pointer forest: out[v] is v's single outgoing
/// arc or kNoVertex. Returns the merge target of every vertex (itself when
/// unmerged); every merged vertex moves along its own arc.
inline std::vector<Vertex> merge_along_pointers(std::vector<Vertex> out, std::uint64_t seed, std::uint64_t salt) {
  const std::size_t n = out.size();
  // Line 2: of a mutual pair, the smaller endpoint drops its arc.
  for (Vertex v = 0; v < n; ++v) {
    const Vertex u = out[v];
    if (u != kNoVertex && v < u && out[u] == v) out[v] = kNoVertex;
  }
  std::vector<std::uint32_t> indegree(n, 0);
  auto count_indegree = [&] {
    std::fill(indegree.begin(), indegree.end(), 0);
    for (Vertex v = 0; v < n; ++v) {
      if (out[v] != kNoVertex) ++indegree[out[v]];
    }
  };
  // Line 3, against the indegrees left by line 2.
  count_indegree();
  for (Vertex v = 0; v < n; ++v) {
    if (indegree[v] >= 2) out[v] = kNoVertex;
  }
  // Line 4: a center with indegree >= 2 absorbs its in-neighbors, whose own
  // incoming arcs disappear with them.
  count_indegree();
  std::vector<Vertex> target(n);
  for (Vertex v = 0; v < n; ++v) target[v] = v;
  std::vector<char> absorbed(n, 0);
  for (Vertex u = 0; u < n; ++u) {
    if (out[u] != kNoVertex && indegree[out[u]] >= 2) {
      target[u] = out[u];
      absorbed[u] = 1;
    }
  }
  for (Vertex v = 0; v < n; ++v) {
    if (out[v] != kNoVertex && (absorbed[v] || absorbed[out[v]])) out[v] = kNoVertex;
  }
  // Line 5: each surviving arc stays with probability 1/3.
  for (Vertex v = 0; v < n; ++v) {
    if (out[v] != kNoVertex && !bernoulli(hash_coin(seed, Stream::kEdgeSample, salt, v), 1.0 / 3.0)) {
      out[v] = kNoVertex;
    }
  }
  // Line 6: an arc touching no other arc merges its tail into its head.
  count_indegree();
  for (Vertex u = 0; u < n; ++u) {
    const Vertex w = out[u];
    if (w != kNoVertex && indegree[u] == 0 && indegree[w] == 1 && out[w] == kNoVertex) target[u] = w;
  }
  return target;
}

/// An outgoing arc per vertex: the head and the graph edge it follows.
struct PointerChoice {
  Vertex to = kNoVertex;
  std::uint32_t edge = 0;
};

inline PointerChoice min_id_pointer(const Graph& g, Vertex v) {
  const Arc& a = g.arcs(v).front();
  return {a.to, a.edge};
}

inline PointerChoice lightest_pointer(const Graph& g, Vertex v) {
  const auto arcs = g.arcs(v);
  const Arc* best = &arcs.front();
  for (const Arc& a : arcs) {
    if (g.edge(a.edge).w < g.edge(best->edge).w) best = &a;
  }
  return {best->to, best->edge};
}

}  // namespace detail

struct VertexShrinkStep {
  Graph graph;                          // contracted, same id space
  std::vector<Vertex> map;              // merge target of every vertex
  std::vector<std::uint32_t> merged_by; // input edge followed by each merged vertex
  std::vector<std::uint32_t> origin;    // input edge of each output edge
};

namespace detail {

template <class Pointer>
VertexShrinkStep shrink_step_with(const Graph& g, Simulator& sim, std::uint64_t salt, ContractMode mode,
                                  Pointer pointer) {
  std::vector<Vertex> out(g.n(), kNoVertex);
  std::vector<std::uint32_t> via(g.n(), 0);
  for (Vertex v = 0; v < g.n(); ++v) {
    if (g.degree(v) == 0) continue;
    const PointerChoice c = pointer(g, v);
    out[v] = c.to;
    via[v] = c.edge;
  }
  sim.charge("shrink-vertices/pointers", {sim.config().primitive_rounds(), static_cast<std::int64_t>(2 * g.m())});
  VertexShrinkStep step;
  step.map = merge_along_pointers(std::move(out), sim.config().seed, salt);
  sim.charge("shrink-vertices/merge", {sim.config().primitive_rounds(), static_cast<std::int64_t>(g.n())});
  for (Vertex v = 0; v < g.n(); ++v) {
    if (step.map[v] != v) step.merged_by.push_back(via[v]);
  }
  auto contracted = settle(sim, "shrink-vertices/contract", contract_graph(g, step.map, mode));
  step.graph = std::move(contracted.graph);
  step.origin = std::move(contracted.origin);
  return step;
}

}  // namespace detail

/// One pass of the constant-factor shrinker: every vertex points at its
/// minimum-id neighbor and the pointer forest is merged as above. Isolated
/// vertices point nowhere and stay put. `salt` separates the edge coins of
/// successive passes.
inline VertexShrinkStep shrink_vertices_step(const Graph& g, Simulator& sim, std::uint64_t salt = 0) {
  return detail::shrink_step_with(g, sim, salt, ContractMode::kSimple, detail::min_id_pointer);
}

struct ShrinkStepRecord {
  std::size_t active_before = 0;  // non-isolated vertices
  std::size_t active_after = 0;
  std::size_t edges_before = 0;
  std::size_t edges_after = 0;
  std::vector<std::uint32_t> merged_by;  // original edge indices
};

struct SparseReduction {
  Graph graph;
  std::vector<Vertex> map;            // original vertex -> vertex of `graph`
  std::vector<std::uint32_t> origin;  // original edge of each edge of `graph`
  std::vector<ShrinkStepRecord> steps;
};

/// ceil(4 log2 log2 n) + 4 passes.
inline std::size_t reduction_passes(std::uint64_t n) {
  if (n < 4) return 4;
  return static_cast<std::size_t>(std::ceil(4.0 * std::log2(std::log2(static_cast<double>(n))) - 1e-9)) + 4;
}

inline std::size_t active_vertices(const Graph& g) {
  std::size_t k = 0;
  for (Vertex v = 0; v < g.n(); ++v) k += g.degree(v) > 0;
  return k;
}

namespace detail {

template <class Pointer>
SparseReduction reduce_with(const Graph& g, Simulator& sim, ContractMode mode, Pointer pointer,
                            std::size_t stop_at) {
  SparseReduction r;
  r.graph = g;
  r.map.resize(g.n());
  for (Vertex v = 0; v < g.n(); ++v) r.map[v] = v;
  r.origin.resize(g.m());
  for (std::uint32_t i = 0; i < g.m(); ++i) r.origin[i] = i;
  const std::size_t passes = reduction_passes(g.n());
  for (std::size_t pass = 0; pass < passes && r.graph.m() > 0; ++pass) {
    ShrinkStepRecord rec;
    rec.active_before = active_vertices(r.graph);
    if (rec.active_before <= stop_at) break;
    rec.edges_before = r.graph.m();
    auto step = shrink_step_with(r.graph, sim, pass, mode, pointer);
    for (std::uint32_t e : step.merged_by) rec.merged_by.push_back(r.origin[e]);
    for (Vertex& x : r.map) x = step.map[x];
    sim.charge("shrink-vertices/relabel", {1, static_cast<std::int64_t>(g.n())});
    std::vector<std::uint32_t> origin(step.origin.size());
    for (std::size_t i = 0; i < origin.size(); ++i) origin[i] = r.origin[step.origin[i]];
    r.origin = std::move(origin);
    r.graph = std::move(step.graph);
    rec.active_after = active_vertices(r.graph);
    rec.edges_after = r.graph.m();
    r.steps.push_back(std::move(rec));
  }
  return r;
}

}  // namespace detail

/// Repeats shrink_vertices_step for reduction_passes(n) passes, until no
/// edge is left, or until at most `stop_at` vertices are non-isolated. u and
/// v share a component of the input exactly when map[u] and map[v] share one
/// in the result.
inline SparseReduction reduce_small_space(const Graph& g, Simulator& sim, std::size_t stop_at = 0) {
  return detail::reduce_with(g, sim, ContractMode::kSimple, detail::min_id_pointer, stop_at);
}

// ---------------------------------------------------------------------------
// Connectivity

struct ConnectivityPhase {
  std::uint64_t d = 0;
  std::size_t active = 0;           // non-isolated vertices entering the phase
  std::size_t edges = 0;
  std::size_t augmented_edges = 0;  // after increase_degree
  std::size_t leaders = 0;
  std::size_t leaderless = 0;       // degree >= d and no leader in reach
  std::uint64_t total_queries = 0;
  std::uint64_t max_vertex_queries = 0;
  std::vector<std::uint32_t> committed;  // MSF only: original edges found
};

/// Sees the current contracted graph and the composed map after the sparse
/// reduction and after every phase.
using PhaseObserver = std::function<void(const Graph&, std::span<const Vertex>)>;

struct ConnectivityResult {
  ComponentLabeling labels;
  std::size_t iterations = 0;
  bool reduced = false;
  std::vector<ShrinkStepRecord> reduction;
  std::vector<ConnectivityPhase> phases;
  std::vector<std::uint64_t> budgets;
};

namespace detail {

inline double log_squared(std::size_t n) {
  const double ln_n = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  return ln_n * ln_n;
}

inline bool needs_sparse_reduction(const Graph& g) {
  return static_cast<double>(g.m()) < static_cast<double>(g.n()) * log_squared(g.n());
}

/// The shrinker's goal: n / ln^2 n non-isolated vertices.
inline std::size_t sparse_target(const Graph& g) {
  return static_cast<std::size_t>(static_cast<double>(g.n()) / log_squared(g.n()));
}

inline std::vector<char> sample_leaders(const Graph& g, const ModelConfig& cfg, double p, std::uint64_t salt,
                                        std::size_t& count) {
  std::vector<char> leader(g.n(), 0);
  count = 0;
  for (Vertex v = 0; v < g.n(); ++v) {
    if (g.degree(v) > 0 && bernoulli(hash_coin(cfg.seed, Stream::kLeader, salt, v), p)) {
      leader[v] = 1;
      ++count;
    }
  }
  return leader;
}

}  // namespace detail

inline ConnectivityResult connectivity(const Graph& g, Simulator& sim, const ConnectivityOptions& opts = {},
                                       const PhaseObserver& observe = {}) {
  const ModelConfig& cfg = sim.config();
  ConnectivityResult res;
  Graph current = g;
  std::vector<Vertex> label(g.n());
  for (Vertex v = 0; v < g.n(); ++v) label[v] = v;

  if (opts.reduce_sparse && detail::needs_sparse_reduction(g)) {
    auto r = reduce_small_space(g, sim, detail::sparse_target(g));
    res.reduced = true;
    res.reduction = std::move(r.steps);
    label = std::move(r.map);
    current = std::move(r.graph);
    if (observe) observe(current, label);
  }

  BudgetSchedule schedule(cfg, active_vertices(current));
  while (current.m() > 0) {
    if (res.iterations >= opts.max_iterations) {
      throw NonTerminationError("connectivity did not finish within " + std::to_string(opts.max_iterations) +
                                " phases");
    }
    ConnectivityPhase phase;
    phase.d = schedule.d();
    phase.active = active_vertices(current);
    phase.edges = current.m();

    auto grown = increase_degree(current, phase.d, sim);
    const Graph& h = grown.graph;
    phase.augmented_edges = h.m();
    for (std::uint64_t q : grown.queries) {
      phase.total_queries += q;
      phase.max_vertex_queries = std::max(phase.max_vertex_queries, q);
    }

    const double p = detail::leader_probability(cfg, opts.leader_constant, phase.d);
    const auto leader = detail::sample_leaders(h, cfg, p, sim.round(), phase.leaders);
    sim.charge("connectivity/leaders", {1, static_cast<std::int64_t>(phase.active)});

    // Leaders stay; others take their lowest-id leader neighbor, falling
    // back to the lowest id of the closed neighborhood.
    std::vector<Vertex> target(h.n());
    for (Vertex v = 0; v < h.n(); ++v) {
      target[v] = v;
      if (h.degree(v) == 0 || leader[v]) continue;
      const auto arcs = h.arcs(v);
      const auto hit = std::find_if(arcs.begin(), arcs.end(), [&](const Arc& a) { return leader[a.to]; });
      if (hit != arcs.end()) {
        target[v] = hit->to;
        continue;
      }
      if (h.degree(v) >= phase.d) {
        ++phase.leaderless;
        if (opts.strict_leaders) {
          throw LeaderSamplingFailure("vertex " + std::to_string(v) + " of degree " + std::to_string(h.degree(v)) +
                                      " has no leader neighbor");
        }
      }
      target[v] = std::min(v, arcs.front().to);
    }
    sim.charge("connectivity/choose-target", {2, static_cast<std::int64_t>(2 * h.m())});
    auto contracted = settle(sim, "connectivity/contract", contract_graph(h, target));
    for (Vertex& x : label) x = target[x];
    sim.charge("connectivity/relabel", {1, static_cast<std::int64_t>(g.n())});
    current = std::move(contracted.graph);

    res.phases.push_back(std::move(phase));
    ++res.iterations;
    schedule.advance();
    if (observe) observe(current, label);
  }
  res.budgets = schedule.history();
  res.budgets.resize(res.iterations);
  res.labels.label = std::move(label);
  return res;
}

// ---------------------------------------------------------------------------
// Minimum spanning forest

struct LocalForest {
  std::vector<Vertex> members;        // F_v in the order Prim added them
  std::vector<std::uint32_t> edges;   // E_v, edge indices of the explored graph
};

struct MsfDegreeIncrease {
  std::vector<LocalForest> forests;
  std::vector<std::uint64_t> queries;
};

/// Prim from every vertex over weight-sorted stored adjacency, stopping at
/// d members or when the component runs out. Each member reads its list in
/// weight order and only past entries that lead back into F_v, so a vertex
/// issues at most d^2 queries.
inline MsfDegreeIncrease msf_increase_degree(const Graph& g, std::uint64_t d, Simulator& sim) {
  if (d < 1) throw DomainError("degree budget must be at least 1");
  if (!g.weighted()) throw DomainError("minimum spanning forest needs a weighted graph");
  const std::size_t n = g.n();
  std::vector<std::size_t> first(n + 1, 0);
  for (Vertex v = 0; v < n; ++v) first[v + 1] = first[v] + g.degree(v);
  std::vector<Arc> sorted(first[n]);
  std::vector<std::uint64_t> owner(first[n]);
  for (Vertex v = 0; v < n; ++v) {
    const auto arcs = g.arcs(v);
    std::copy(arcs.begin(), arcs.end(), sorted.begin() + static_cast<std::ptrdiff_t>(first[v]));
    std::sort(sorted.begin() + static_cast<std::ptrdiff_t>(first[v]),
              sorted.begin() + static_cast<std::ptrdiff_t>(first[v + 1]),
              [&](const Arc& a, const Arc& b) { return g.edge(a.edge).w < g.edge(b.edge).w; });
    std::fill(owner.begin() + static_cast<std::ptrdiff_t>(first[v]),
              owner.begin() + static_cast<std::ptrdiff_t>(first[v + 1]), v);
  }
  sim.charge("msf-increase-degree/sort", {sim.config().primitive_rounds(), static_cast<std::int64_t>(sorted.size())});
  sim.run_range("msf-increase-degree/publish", sorted.size(), [&](MachineContext& ctx, std::uint64_t i) {
    const Vertex v = static_cast<Vertex>(owner[i]);
    const Arc& a = sorted[i];
    ctx.write({table::kMsfAdjacency, detail::adjacency_key(v, i - first[v])},
              {static_cast<Word>(a.to), static_cast<Word>(g.edge(a.edge).w), static_cast<Word>(a.edge),
               static_cast<Word>(g.degree(v))});
  });

  MsfDegreeIncrease out;
  out.forests.assign(n, {});
  out.queries.assign(n, 0);
  std::vector<std::uint64_t> items(n);
  for (Vertex v = 0; v < n; ++v) items[v] = v;
  sim.run_items("msf-increase-degree/prim", items, [&](MachineContext& ctx, std::uint64_t item) {
    const Vertex v = static_cast<Vertex>(item);
    LocalForest& forest = out.forests[v];
    forest.members.push_back(v);
    const std::uint64_t before = ctx.queries();
    struct Head {
      std::uint64_t next = 0;    // index of the entry held in `entry`
      std::uint64_t degree = 0;
      bool live = false;
      Record entry;
    };
    std::vector<Head> heads;
    auto read = [&](Vertex x, Head& h) {
      if (h.next >= h.degree) {
        h.live = false;
        return;
      }
      h.entry = *ctx.query({table::kMsfAdjacency, detail::adjacency_key(x, h.next)});
      h.live = true;
    };
    auto open = [&](Vertex x) {
      Head h;
      h.degree = g.degree(x);  // every entry of x repeats this; entry 0 is the first read
      read(x, h);
      heads.push_back(std::move(h));
    };
    if (d >= 2) open(v);
    while (forest.members.size() < d) {
      std::size_t best = heads.size();
      for (std::size_t i = 0; i < heads.size(); ++i) {
        if (heads[i].live && (best == heads.size() || heads[i].entry[1] < heads[best].entry[1])) best = i;
      }
      if (best == heads.size()) break;  // F_v is the whole component
      Head& h = heads[best];
      const Vertex y = static_cast<Vertex>(h.entry[0]);
      const bool inside = std::find(forest.members.begin(), forest.members.end(), y) != forest.members.end();
      if (!inside) {
        forest.members.push_back(y);
        forest.edges.push_back(static_cast<std::uint32_t>(h.entry[2]));
        if (forest.members.size() >= d) break;
      }
      ++h.next;
      read(forest.members[best], h);
      if (!inside) open(y);
    }
    out.queries[v] = ctx.queries() - before;
  });
  return out;
}

struct MsfResult {
  std::vector<std::uint32_t> edges;  // original edge indices, ascending
  ComponentLabeling labels;
  std::size_t iterations = 0;
  bool reduced = false;
  std::vector<ShrinkStepRecord> reduction;  // merged_by holds committed edges
  std::vector<ConnectivityPhase> phases;
  std::vector<std::uint64_t> budgets;
};

/// Minimum spanning forest of a graph with distinct weights. Found edges
/// are mapped back to the input through their (unique) weights.
inline MsfResult msf(const Graph& g, Simulator& sim, const ConnectivityOptions& opts = {},
                     const PhaseObserver& observe = {}) {
  if (!g.weighted()) throw DomainError("minimum spanning forest needs a weighted graph");
  const ModelConfig& cfg = sim.config();
  std::unordered_map<Weight, std::uint32_t> by_weight;
  by_weight.reserve(g.m());
  for (std::uint32_t i = 0; i < g.m(); ++i) by_weight.emplace(g.edge(i).w, i);

  MsfResult res;
  std::vector<std::uint32_t> found;
  Graph current = g;
  std::vector<Vertex> label(g.n());
  for (Vertex v = 0; v < g.n(); ++v) label[v] = v;

  if (opts.reduce_sparse && detail::needs_sparse_reduction(g)) {
    auto r = detail::reduce_with(g, sim, ContractMode::kMinWeight, detail::lightest_pointer,
                                 detail::sparse_target(g));
    res.reduced = true;
    for (const auto& step : r.steps) found.insert(found.end(), step.merged_by.begin(), step.merged_by.end());
    res.reduction = std::move(r.steps);
    label = std::move(r.map);
    current = std::move(r.graph);
    if (observe) observe(current, label);
  }

  BudgetSchedule schedule(cfg, active_vertices(current));
  while (current.m() > 0) {
    if (res.iterations >= opts.max_iterations) {
      throw NonTerminationError("spanning forest did not finish within " + std::to_string(opts.max_iterations) +
                                " phases");
    }
    ConnectivityPhase phase;
    phase.d = schedule.d();
    phase.active = active_vertices(current);
    phase.edges = current.m();
    phase.augmented_edges = current.m();

    auto grown = msf_increase_degree(current, phase.d, sim);
    for (std::uint64_t q : grown.queries) {
      phase.total_queries += q;
      phase.max_vertex_queries = std::max(phase.max_vertex_queries, q);
    }
    std::vector<std::uint32_t> local;
    for (const auto& f : grown.forests) local.insert(local.end(), f.edges.begin(), f.edges.end());
    local = settle(sim, "msf/dedup", mpc_dedup(std::move(local), cfg.epsilon));
    for (std::uint32_t e : local) phase.committed.push_back(by_weight.at(current.edge(e).w));
    sim.charge("msf/recover-edges", {1, static_cast<std::int64_t>(local.size())});
    found.insert(found.end(), phase.committed.begin(), phase.committed.end());

    const double p = detail::leader_probability(cfg, opts.leader_constant, phase.d);
    const auto leader = detail::sample_leaders(current, cfg, p, sim.round(), phase.leaders);
    sim.charge("msf/leaders", {1, static_cast<std::int64_t>(phase.active)});

    // Every target lies in F_v, so v reaches it over committed edges.
    std::vector<Vertex> target(current.n());
    for (Vertex v = 0; v < current.n(); ++v) {
      target[v] = v;
      if (current.degree(v) == 0 || leader[v]) continue;
      const auto& members = grown.forests[v].members;
      Vertex best_leader = kNoVertex;
      for (Vertex x : members) {
        if (leader[x]) best_leader = std::min(best_leader, x);
      }
      if (best_leader != kNoVertex) {
        target[v] = best_leader;
        continue;
      }
      if (members.size() >= phase.d) {
        ++phase.leaderless;
        if (opts.strict_leaders) {
          throw LeaderSamplingFailure("vertex " + std::to_string(v) + " has no leader in its local forest");
        }
      }
      target[v] = *std::min_element(members.begin(), members.end());
    }
    sim.charge("msf/choose-target", {1, static_cast<std::int64_t>(current.n())});
    auto contracted = settle(sim, "msf/contract", contract_graph(current, target, ContractMode::kMinWeight));
    for (Vertex& x : label) x = target[x];
    sim.charge("msf/relabel", {1, static_cast<std::int64_t>(g.n())});
    current = std::move(contracted.graph);

    res.phases.push_back(std::move(phase));
    ++res.iterations;
    schedule.advance();
    if (observe) observe(current, label);
  }
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  res.edges = std::move(found);
  res.budgets = schedule.history();
  res.budgets.resize(res.iterations);
  res.labels.label = std::move(label);
  return res;
}

struct SpanningForest {
  std::vector<std::uint32_t> edges;  // input edge indices
  ComponentLabeling labels;
};

/// Spanning forest via the MSF under seeded distinct weights.
inline SpanningForest spanning_forest(const Graph& g, Simulator& sim, const ConnectivityOptions& opts = {}) {
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  SplitMix64 rng(hash_coin(sim.config().seed, Stream::kWeights, 0, g.m()));
  detail::assign_weights(edges, rng);
  const Graph weighted(g.n(), std::move(edges), true, g.multigraph() ? Graph::Kind::kMultigraph : Graph::Kind::kSimple);
  auto r = msf(weighted, sim, opts);
  return {std::move(r.edges), std::move(r.labels)};
}

}  // namespace ampc
