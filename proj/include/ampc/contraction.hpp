#pragma once

// Sample-and-traverse contraction: shrinking unions of cycles, the
// one-versus-two cycle problem, connectivity on cycles, and list ranking.
//
// Cycles are stored with two ports per vertex. Leaving vertex x through port
// p arrives at some vertex y through port q; the walk continues out of y
// through port 1 - q. Links are symmetric: if x:p leads to y:q then y:q leads
// back to x:p. This keeps parallel edges and one-vertex cycles well formed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ampc/errors.hpp"
#include "ampc/graph.hpp"
#include "ampc/primitives.hpp"
#include "ampc/random.hpp"
#include "ampc/runtime.hpp"

namespace ampc {

namespace table {
inline constexpr std::uint32_t kCyclePort = 10;
inline constexpr std::uint32_t kCycleEnds = 11;
inline constexpr std::uint32_t kCycleCovered = 12;
inline constexpr std::uint32_t kCycleFallback = 13;
inline constexpr std::uint32_t kCycleFallbackPtr = 14;
inline constexpr std::uint32_t kCycleResidual = 15;
inline constexpr std::uint32_t kCycleAnswer = 16;
inline constexpr std::uint32_t kCyclePointer = 17;
inline constexpr std::uint32_t kCycleLabel = 18;
inline constexpr std::uint32_t kListNode = 20;
inline constexpr std::uint32_t kListJump = 21;
inline constexpr std::uint32_t kListRank = 22;
}  // namespace table

/// A port: (vertex, side) packed as vertex * 2 + side.
using Port = std::uint64_t;
inline constexpr Port kNoPort = ~Port{0};

constexpr Port make_port(Vertex v, unsigned side) { return (static_cast<Port>(v) << 1) | side; }
constexpr Vertex port_vertex(Port p) { return static_cast<Vertex>(p >> 1); }
constexpr unsigned port_side(Port p) { return static_cast<unsigned>(p & 1); }

/// Disjoint union of cycles over a subset of the slots 0..slots-1.
class CycleGraph {
 public:
  CycleGraph() = default;

  /// Every vertex of `g` must have degree exactly two.
  static CycleGraph from_graph(const Graph& g) {
    CycleGraph c;
    c.links_.assign(2 * g.n(), kNoPort);
    c.active_.assign(g.n(), 0);
    std::vector<unsigned> used(g.n(), 0);
    auto take = [&](Vertex v) -> Port {
      if (used[v] >= 2) throw StructureError("vertex " + std::to_string(v) + " has degree above 2");
      return make_port(v, used[v]++);
    };
    for (const Edge& e : g.edges()) {
      const Port a = take(e.u);
      const Port b = take(e.v);
      c.links_[a] = b;
      c.links_[b] = a;
    }
    for (Vertex v = 0; v < g.n(); ++v) {
      if (used[v] != 2) {
        throw StructureError("vertex " + std::to_string(v) + " has degree " + std::to_string(used[v]) +
                             "; the input is not a union of cycles");
      }
      c.vertices_.push_back(v);
      c.active_[v] = 1;
    }
    return c;
  }

  /// Builds from explicit links; `links[2v + side]` for active v.
  CycleGraph(std::vector<Vertex> vertices, std::vector<Port> links)
      : vertices_(std::move(vertices)), links_(std::move(links)), active_(links_.size() / 2, 0) {
    for (Vertex v : vertices_) active_[v] = 1;
    validate();
  }

  std::size_t size() const { return vertices_.size(); }
  std::size_t slots() const { return active_.size(); }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  bool active(Vertex v) const { return v < active_.size() && active_[v]; }
  Port link(Vertex v, unsigned side) const { return links_[make_port(v, side)]; }
  const std::vector<Port>& links() const { return links_; }

  void validate() const {
    for (Vertex v : vertices_) {
      for (unsigned s = 0; s < 2; ++s) {
        const Port to = link(v, s);
        if (to == kNoPort || !active(port_vertex(to)) || links_[to] != make_port(v, s)) {
          throw StructureError("port " + std::to_string(s) + " of vertex " + std::to_string(v) +
                               " is not matched by its twin");
        }
      }
    }
  }

  /// Smallest vertex id of each vertex's cycle (sequential; for checks).
  std::vector<Vertex> cycle_minimum() const {
    std::vector<Vertex> out(slots(), kNoVertex);
    for (Vertex v : vertices_) {
      if (out[v] != kNoVertex) continue;
      std::vector<Vertex> members;
      Vertex best = v;
      Port cur = link(v, 0);
      members.push_back(v);
      while (port_vertex(cur) != v) {
        const Vertex y = port_vertex(cur);
        members.push_back(y);
        best = std::min(best, y);
        cur = link(y, 1 - port_side(cur));
      }
      for (Vertex y : members) out[y] = best;
    }
    return out;
  }

  std::size_t count_cycles() const {
    const auto mins = cycle_minimum();
    std::size_t c = 0;
    for (Vertex v : vertices_) c += mins[v] == v;
    return c;
  }

 private:
  std::vector<Vertex> vertices_;
  std::vector<Port> links_;
  std::vector<char> active_;
};

namespace detail {

inline Record port_record(const CycleGraph& c, Vertex v, Word extra) {
  return {static_cast<Word>(c.link(v, 0)), static_cast<Word>(c.link(v, 1)), extra};
}

inline std::size_t sample_budget_iterations(double epsilon) {
  return static_cast<std::size_t>(std::ceil(2.0 * (1.0 - epsilon) / epsilon - 1e-9));
}

}  // namespace detail

/// Optional override for the sampling coin: (iteration, vertex) -> sampled.
using Sampler = std::function<bool(std::size_t, Vertex)>;

struct ShrinkOptions {
  double delta = 0.5;
  std::size_t iterations = 1;
  std::size_t population = 0;  // n in the sampling rate n^(-delta/2); 0 means the input size
  Sampler sampler;
};

struct ShrinkResult {
  CycleGraph graph;
  /// (l, r): samples reached from each final vertex through port 0 and port 1.
  std::vector<std::array<Vertex, 2>> sample_map;
  std::vector<std::size_t> iteration_sizes;  // vertex count entering each iteration, then the final count
  std::vector<Vertex> representative;      // surviving vertex each input vertex was contracted into
  std::vector<CycleGraph> levels;           // graph entering each iteration
  std::size_t fallback_samples = 0;
};

/// Contracts every cycle onto a random sample, `iterations` times. Each
/// iteration is three rounds: publish the ports, traverse from every sample
/// in both directions, and let vertices of sample-free cycles elect their
/// minimum id as a sample.
inline ShrinkResult shrink(const CycleGraph& input, const ShrinkOptions& options, Simulator& sim) {
  ShrinkResult result;
  const std::size_t slots = input.slots();
  const double population =
      static_cast<double>(options.population ? options.population : std::max<std::size_t>(input.size(), 1));
  const double rate = std::pow(population, -options.delta / 2.0);
  std::vector<Vertex> parent(slots, kNoVertex);
  for (Vertex v : input.vertices()) parent[v] = v;

  CycleGraph current = input;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    result.iteration_sizes.push_back(current.size());
    result.levels.push_back(current);
    const std::uint64_t coin_round = sim.round();
    std::vector<char> sampled(slots, 0);
    for (Vertex v : current.vertices()) {
      sampled[v] = options.sampler ? options.sampler(it, v)
                                   : bernoulli(hash_coin(sim.config().seed, Stream::kVertexSample, coin_round, v), rate);
    }
    std::vector<std::uint64_t> items(current.vertices().begin(), current.vertices().end());

    sim.run_items("shrink/publish", items, [&](MachineContext& ctx, std::uint64_t v) {
      ctx.write({table::kCyclePort, v}, detail::port_record(current, static_cast<Vertex>(v), sampled[v]));
    });

    sim.run_items("shrink/traverse", items, [&](MachineContext& ctx, std::uint64_t v) {
      const auto own = ctx.query({table::kCyclePort, v});
      ctx.write({table::kCyclePort, v}, *own);
      if (!(*own)[2]) return;
      std::array<Word, 2> ends{};
      for (unsigned side = 0; side < 2; ++side) {
        Port cur = static_cast<Port>((*own)[side]);
        for (;;) {
          const Vertex y = port_vertex(cur);
          const auto rec = ctx.query({table::kCyclePort, y});
          if ((*rec)[2]) break;
          ctx.write({table::kCycleCovered, y}, {static_cast<Word>(v)});
          cur = static_cast<Port>((*rec)[1 - port_side(cur)]);
        }
        ends[side] = static_cast<Word>(cur);
      }
      ctx.write({table::kCycleEnds, v}, {ends[0], ends[1]});
    });

    std::vector<Vertex> next_vertices;
    std::vector<Port> next_links(2 * slots, kNoPort);
    {
      const Generation& g = sim.store();
      for (Vertex v : current.vertices()) {
        if (sampled[v]) {
          const auto ends = g.find({table::kCycleEnds, v});
          next_vertices.push_back(v);
          next_links[make_port(v, 0)] = static_cast<Port>((*ends)[0]);
          next_links[make_port(v, 1)] = static_cast<Port>((*ends)[1]);
        } else if (const auto by = g.find({table::kCycleCovered, v})) {
          parent[v] = static_cast<Vertex>((*by)[0]);
        }
      }
    }

    std::vector<std::uint64_t> loose;
    for (Vertex v : current.vertices()) {
      if (!sampled[v] && parent[v] == v) loose.push_back(v);
    }
    // Vertices whose cycle drew no sample walk until they meet a smaller id;
    // the one that walks all the way around becomes the sample.
    sim.run_items("shrink/fallback", loose, [&](MachineContext& ctx, std::uint64_t v) {
      const auto own = ctx.query({table::kCyclePort, v});
      Port cur = static_cast<Port>((*own)[0]);
      for (;;) {
        const Vertex y = port_vertex(cur);
        if (y == v) {
          ctx.write({table::kCycleFallback, v},
                    {static_cast<Word>(make_port(static_cast<Vertex>(v), 1)),
                     static_cast<Word>(make_port(static_cast<Vertex>(v), 0))});
          return;
        }
        if (y < v) {
          ctx.write({table::kCycleFallbackPtr, v}, {static_cast<Word>(y)});
          return;
        }
        const auto rec = ctx.query({table::kCyclePort, y});
        cur = static_cast<Port>((*rec)[1 - port_side(cur)]);
      }
    });
    {
      const Generation& g = sim.store();
      for (std::uint64_t v : loose) {
        if (const auto ends = g.find({table::kCycleFallback, v})) {
          next_vertices.push_back(static_cast<Vertex>(v));
          next_links[make_port(static_cast<Vertex>(v), 0)] = static_cast<Port>((*ends)[0]);
          next_links[make_port(static_cast<Vertex>(v), 1)] = static_cast<Port>((*ends)[1]);
          ++result.fallback_samples;
        } else {
          parent[v] = static_cast<Vertex>((*g.find({table::kCycleFallbackPtr, v}))[0]);
        }
      }
    }
    std::sort(next_vertices.begin(), next_vertices.end());
    current = CycleGraph(std::move(next_vertices), std::move(next_links));
    sim.charge("shrink/contract", {1, static_cast<std::int64_t>(current.size())});
  }
  result.iteration_sizes.push_back(current.size());

  // Compose the per-iteration parents into final representatives.
  result.representative.assign(slots, kNoVertex);
  for (Vertex v : input.vertices()) {
    Vertex r = v;
    while (parent[r] != r) r = parent[r];
    result.representative[v] = r;
  }
  sim.charge("shrink/compose", {sim.config().primitive_rounds(), static_cast<std::int64_t>(input.size())});

  result.sample_map.assign(slots, {kNoVertex, kNoVertex});
  for (Vertex v : current.vertices()) {
    result.sample_map[v] = {port_vertex(current.link(v, 0)), port_vertex(current.link(v, 1))};
  }
  result.graph = std::move(current);
  return result;
}

// ---------------------------------------------------------------------------
// One cycle or two

struct TwoCycleResult {
  int cycles = 0;
  std::size_t shrink_iterations = 0;
  std::size_t residual = 0;
  std::vector<std::size_t> iteration_sizes;
};

/// Shrinks for ceil(2(1-eps)/eps) iterations (one more if the residual still
/// exceeds S), then counts the cycles of the residual on machine 0.
inline TwoCycleResult two_cycle(const Graph& g, Simulator& sim, const Sampler& sampler = {}) {
  const auto& cfg = sim.config();
  const CycleGraph cycles = CycleGraph::from_graph(g);
  ShrinkOptions opt;
  opt.delta = cfg.epsilon;
  opt.iterations = std::max<std::size_t>(1, detail::sample_budget_iterations(cfg.epsilon));
  opt.population = cycles.size();
  opt.sampler = sampler;
  ShrinkResult shrunk = shrink(cycles, opt, sim);
  TwoCycleResult out;
  out.shrink_iterations = opt.iterations;
  out.iteration_sizes = shrunk.iteration_sizes;
  if (shrunk.graph.size() > cfg.space) {
    opt.iterations = 1;
    ShrinkResult more = shrink(shrunk.graph, opt, sim);
    ++out.shrink_iterations;
    out.iteration_sizes.pop_back();
    out.iteration_sizes.insert(out.iteration_sizes.end(), more.iteration_sizes.begin(), more.iteration_sizes.end());
    shrunk = std::move(more);
  }
  const CycleGraph& residual = shrunk.graph;
  out.residual = residual.size();
  if (residual.size() > cfg.budget()) {
    throw CapacityError("residual cycle graph has " + std::to_string(residual.size()) +
                        " vertices, more than one machine holds (" + std::to_string(cfg.budget()) + ")");
  }

  std::vector<std::uint64_t> items(residual.vertices().begin(), residual.vertices().end());
  sim.run_items("two-cycle/gather", items, [&](MachineContext& ctx, std::uint64_t v) {
    ctx.write({table::kCycleResidual, 0},
              {static_cast<Word>(v), static_cast<Word>(residual.link(static_cast<Vertex>(v), 0)),
               static_cast<Word>(residual.link(static_cast<Vertex>(v), 1))});
  });
  sim.run_round("two-cycle/solve", [&](MachineContext& ctx) {
    if (ctx.id() != 0) return;
    std::vector<Vertex> ids;
    std::vector<Port> links(2 * residual.slots(), kNoPort);
    for (std::uint64_t j = 1;; ++j) {
      const auto rec = ctx.query({table::kCycleResidual, 0}, j);
      if (!rec) break;
      const auto v = static_cast<Vertex>((*rec)[0]);
      ids.push_back(v);
      links[make_port(v, 0)] = static_cast<Port>((*rec)[1]);
      links[make_port(v, 1)] = static_cast<Port>((*rec)[2]);
    }
    std::sort(ids.begin(), ids.end());
    const CycleGraph local(std::move(ids), std::move(links));
    ctx.write({table::kCycleAnswer, 0}, {static_cast<Word>(local.count_cycles())});
  });
  out.cycles = static_cast<int>((*sim.store().find({table::kCycleAnswer, 0}))[0]);
  return out;
}

inline TwoCycleResult two_cycle(const Graph& g, const ModelConfig& cfg) {
  Simulator sim(cfg);
  return two_cycle(g, sim);
}

// ---------------------------------------------------------------------------
// Connectivity on cycles

struct CycleSearch {
  std::vector<Vertex> label;        // cycle representative: its lowest-priority vertex
  std::vector<std::uint64_t> steps; // vertices visited by each search
};

/// Random priority of a vertex; ties fall back to the id.
inline std::uint64_t vertex_priority(std::uint64_t seed, std::uint64_t salt, Vertex v) {
  return hash_coin(seed, Stream::kPriority, salt, v);
}

/// Every vertex walks out of port 0 until it meets a vertex of lower
/// priority or returns to itself, then follows the resulting pointers to the
/// cycle's minimum. Two rounds after publishing.
inline CycleSearch cycle_search(const CycleGraph& c, Simulator& sim, std::uint64_t salt = 0) {
  const std::uint64_t seed = sim.config().seed;
  auto prio = [&](Vertex v) { return vertex_priority(seed, salt, v); };
  auto lower = [](std::uint64_t pa, Vertex a, std::uint64_t pb, Vertex b) { return pa != pb ? pa < pb : a < b; };
  std::vector<std::uint64_t> items(c.vertices().begin(), c.vertices().end());

  sim.run_items("cycle-search/publish", items, [&](MachineContext& ctx, std::uint64_t v) {
    ctx.write({table::kCyclePort, v}, detail::port_record(c, static_cast<Vertex>(v), static_cast<Word>(prio(static_cast<Vertex>(v)))));
  });
  sim.run_items("cycle-search/walk", items, [&](MachineContext& ctx, std::uint64_t v) {
    const auto own = ctx.query({table::kCyclePort, v});
    const auto own_prio = static_cast<std::uint64_t>((*own)[2]);
    Port cur = static_cast<Port>((*own)[0]);
    std::uint64_t steps = 0;
    Vertex target = static_cast<Vertex>(v);
    for (;;) {
      const Vertex y = port_vertex(cur);
      ++steps;
      if (y == v) break;
      const auto rec = ctx.query({table::kCyclePort, y});
      if (lower(static_cast<std::uint64_t>((*rec)[2]), y, own_prio, static_cast<Vertex>(v))) {
        target = y;
        break;
      }
      cur = static_cast<Port>((*rec)[1 - port_side(cur)]);
    }
    ctx.write({table::kCyclePointer, v}, {static_cast<Word>(target), static_cast<Word>(steps)});
  });
  CycleSearch out;
  out.steps.assign(c.slots(), 0);
  for (Vertex v : c.vertices()) out.steps[v] = static_cast<std::uint64_t>((*sim.store().find({table::kCyclePointer, v}))[1]);

  sim.run_items("cycle-search/chase", items, [&](MachineContext& ctx, std::uint64_t v) {
    Vertex at = static_cast<Vertex>(v);
    for (;;) {
      const auto rec = ctx.query({table::kCyclePointer, at});
      const auto next = static_cast<Vertex>((*rec)[0]);
      if (next == at) break;
      at = next;
    }
    ctx.write({table::kCycleLabel, v}, {static_cast<Word>(at)});
  });
  out.label.assign(c.slots(), kNoVertex);
  for (Vertex v : c.vertices()) out.label[v] = static_cast<Vertex>((*sim.store().find({table::kCycleLabel, v}))[0]);
  return out;
}

/// Labels every vertex of a union of cycles with its cycle's representative.
inline std::vector<Vertex> cycle_conn(const CycleGraph& c, Simulator& sim) {
  const auto& cfg = sim.config();
  ShrinkOptions opt;
  opt.delta = cfg.epsilon;
  opt.iterations = detail::sample_budget_iterations(cfg.epsilon);
  opt.population = c.size();
  const ShrinkResult shrunk = shrink(c, opt, sim);
  const CycleSearch search = cycle_search(shrunk.graph, sim, sim.round());
  std::vector<Vertex> label(c.slots(), kNoVertex);
  for (Vertex v : c.vertices()) label[v] = search.label[shrunk.representative[v]];
  sim.charge("cycle-conn/compose", {1, static_cast<std::int64_t>(c.size())});
  return label;
}

inline std::vector<Vertex> cycle_conn(const Graph& g, Simulator& sim) {
  return cycle_conn(CycleGraph::from_graph(g), sim);
}

// ---------------------------------------------------------------------------
// List ranking

struct ListLevel {
  std::vector<Vertex> active;
  std::vector<Vertex> successor;       // full slot range; kNoVertex for tails and inactive
  std::vector<std::uint64_t> weight;   // full slot range; 0 when inactive
  std::vector<char> sampled;           // chosen to survive into the next level
};

struct ListRanks {
  std::vector<std::uint64_t> rank;     // distance from the head of its list
  std::vector<Vertex> head;            // head of the list holding each element
  std::vector<ListLevel> levels;       // level 0 is the input
  std::size_t iterations = 0;          // contraction iterations
};

namespace detail {

// Rank and head share one word: rank in the high half, head in the low half.
inline Word pack_rank(std::uint64_t rank, Vertex head) { return static_cast<Word>(rank << 32 | head); }
inline std::pair<std::uint64_t, Vertex> unpack_rank(Word w) {
  const auto u = static_cast<std::uint64_t>(w);
  return {u >> 32, static_cast<Vertex>(u & 0xFFFFFFFFULL)};
}

}  // namespace detail

/// Ranks every element of a set of disjoint lists. `successor[v]` is the
/// next element or kNoVertex; each head starts one list and every element
/// must lie on exactly one of them. Contraction repeats while more than S
/// non-head elements remain; each head then walks its residual list.
inline ListRanks rank_lists(std::span<const Vertex> successor, std::span<const Vertex> heads, Simulator& sim,
                            const Sampler& sampler = {}) {
  const std::size_t n = successor.size();
  const auto& cfg = sim.config();
  {
    std::vector<char> has_pred(n, 0), seen(n, 0);
    for (Vertex v = 0; v < n; ++v) {
      const Vertex s = successor[v];
      if (s == kNoVertex) continue;
      if (s >= n) throw StructureError("element " + std::to_string(v) + " points outside the list");
      if (has_pred[s]) throw StructureError("element " + std::to_string(s) + " has two predecessors");
      has_pred[s] = 1;
    }
    std::size_t reached = 0;
    for (Vertex h : heads) {
      if (h >= n) throw DomainError("head " + std::to_string(h) + " is not an element");
      if (has_pred[h]) throw StructureError("head " + std::to_string(h) + " has a predecessor");
      for (Vertex v = h; v != kNoVertex; v = successor[v]) {
        if (seen[v]) throw StructureError("element " + std::to_string(v) + " is reached twice");
        seen[v] = 1;
        ++reached;
      }
    }
    if (reached != n) {
      throw StructureError("broken successor chain: " + std::to_string(n - reached) +
                           " elements are not reachable from a head");
    }
  }

  ListRanks out;
  std::vector<char> is_head(n, 0);
  for (Vertex h : heads) is_head[h] = 1;
  {
    ListLevel base;
    base.active.resize(n);
    std::iota(base.active.begin(), base.active.end(), Vertex{0});
    base.successor.assign(successor.begin(), successor.end());
    base.weight.assign(n, 1);
    out.levels.push_back(std::move(base));
  }
  const double rate = std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), -cfg.epsilon / 2.0);
  const std::size_t cap = 4 * detail::sample_budget_iterations(cfg.epsilon) + 8;

  while (out.levels.back().active.size() - heads.size() > cfg.space) {
    if (out.iterations >= cap) throw NonTerminationError("list contraction did not converge");
    ListLevel& level = out.levels.back();
    const std::uint64_t coin_round = sim.round();
    level.sampled.assign(n, 0);
    for (Vertex v : level.active) {
      level.sampled[v] = is_head[v] ||
                         (sampler ? sampler(out.iterations, v)
                                  : bernoulli(hash_coin(cfg.seed, Stream::kVertexSample, coin_round, v), rate));
    }
    std::vector<std::uint64_t> items(level.active.begin(), level.active.end());
    sim.run_items("list/publish", items, [&](MachineContext& ctx, std::uint64_t v) {
      ctx.write({table::kListNode, v}, {static_cast<Word>(level.successor[v]), static_cast<Word>(level.weight[v]),
                                        static_cast<Word>(level.sampled[v])});
    });
    std::vector<std::uint64_t> samples;
    for (Vertex v : level.active) {
      if (level.sampled[v]) samples.push_back(v);
    }
    sim.run_items("list/traverse", samples, [&](MachineContext& ctx, std::uint64_t v) {
      const auto own = ctx.query({table::kListNode, v});
      auto cur = static_cast<Vertex>((*own)[0]);
      Word acc = (*own)[1];
      while (cur != kNoVertex) {
        const auto rec = ctx.query({table::kListNode, cur});
        if ((*rec)[2]) break;
        acc += (*rec)[1];
        cur = static_cast<Vertex>((*rec)[0]);
      }
      ctx.write({table::kListJump, v}, {static_cast<Word>(cur), acc});
    });
    ListLevel next;
    next.successor.assign(n, kNoVertex);
    next.weight.assign(n, 0);
    for (std::uint64_t v : samples) {
      const auto jump = sim.store().find({table::kListJump, v});
      next.active.push_back(static_cast<Vertex>(v));
      next.successor[v] = static_cast<Vertex>((*jump)[0]);
      next.weight[v] = static_cast<std::uint64_t>((*jump)[1]);
    }
    sim.charge("list/contract", {1, static_cast<std::int64_t>(samples.size())});
    out.levels.push_back(std::move(next));
    ++out.iterations;
  }

  // Residual lists are short enough for their heads to walk.
  std::vector<std::uint64_t> rank(n, 0);
  std::vector<Vertex> head(n, kNoVertex);
  {
    const ListLevel& top = out.levels.back();
    std::vector<std::uint64_t> items(top.active.begin(), top.active.end());
    sim.run_items("list/publish-residual", items, [&](MachineContext& ctx, std::uint64_t v) {
      ctx.write({table::kListNode, v}, {static_cast<Word>(top.successor[v]), static_cast<Word>(top.weight[v])});
    });
    std::vector<std::uint64_t> head_items(heads.begin(), heads.end());
    sim.run_items("list/solve-residual", head_items, [&](MachineContext& ctx, std::uint64_t h) {
      Word d = 0;
      for (auto cur = static_cast<Vertex>(h); cur != kNoVertex;) {
        const auto rec = ctx.query({table::kListNode, cur});
        ctx.write({table::kListRank, cur}, {d, static_cast<Word>(h)});
        d += (*rec)[1];
        cur = static_cast<Vertex>((*rec)[0]);
      }
    });
    for (Vertex v : top.active) {
      const auto rec = sim.store().find({table::kListRank, v});
      rank[v] = static_cast<std::uint64_t>((*rec)[0]);
      head[v] = static_cast<Vertex>((*rec)[1]);
    }
  }

  // Unwind: each sample hands ranks to the elements it skipped.
  for (std::size_t r = out.levels.size() - 1; r-- > 0;) {
    const ListLevel& level = out.levels[r];
    std::vector<std::uint64_t> items(level.active.begin(), level.active.end());
    sim.run_items("list/publish-unwind", items, [&](MachineContext& ctx, std::uint64_t v) {
      ctx.write({table::kListNode, v}, {static_cast<Word>(level.successor[v]), static_cast<Word>(level.weight[v]),
                                        static_cast<Word>(level.sampled[v]),
                                        level.sampled[v] ? detail::pack_rank(rank[v], head[v]) : Word{-1}});
    });
    std::vector<std::uint64_t> samples;
    for (Vertex v : level.active) {
      if (level.sampled[v]) samples.push_back(v);
    }
    sim.run_items("list/unwind", samples, [&](MachineContext& ctx, std::uint64_t v) {
      const auto own = ctx.query({table::kListNode, v});
      const auto [base, h] = detail::unpack_rank((*own)[3]);
      Word d = static_cast<Word>(base) + (*own)[1];
      auto cur = static_cast<Vertex>((*own)[0]);
      while (cur != kNoVertex) {
        const auto rec = ctx.query({table::kListNode, cur});
        if ((*rec)[2]) break;
        ctx.write({table::kListRank, cur}, {d, static_cast<Word>(h)});
        d += (*rec)[1];
        cur = static_cast<Vertex>((*rec)[0]);
      }
    });
    for (Vertex v : level.active) {
      if (level.sampled[v]) continue;
      const auto rec = sim.store().find({table::kListRank, v});
      rank[v] = static_cast<std::uint64_t>((*rec)[0]);
      head[v] = static_cast<Vertex>((*rec)[1]);
    }
  }
  out.rank = std::move(rank);
  out.head = std::move(head);
  return out;
}

struct RankedList {
  std::vector<Vertex> order;           // head first
  std::vector<std::uint64_t> rank;     // indexed by element
  std::vector<ListLevel> levels;
  std::size_t iterations = 0;
};

/// Ranks a single list starting at `head`.
inline RankedList list_ranking(std::span<const Vertex> successor, Vertex head, Simulator& sim,
                               const Sampler& sampler = {}) {
  const std::array<Vertex, 1> heads{head};
  ListRanks r = rank_lists(successor, heads, sim, sampler);
  RankedList out;
  out.order.assign(successor.size(), kNoVertex);
  for (Vertex v = 0; v < successor.size(); ++v) out.order[r.rank[v]] = v;
  out.rank = std::move(r.rank);
  out.levels = std::move(r.levels);
  out.iterations = r.iterations;
  return out;
}

}  // namespace ampc
