#pragma once

// Lexicographically first maximal independent set under a random vertex
// order: the greedy reference, the recursive membership test, its truncated
// variant, and the iterated algorithm that runs truncated tests in rounds.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
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
inline constexpr std::uint32_t kMisAdjacency = 30;
inline constexpr std::uint32_t kMisStatus = 31;
}  // namespace table

enum class MisState : std::uint8_t { kUnknown = 0, kIn = 1, kOut = 2 };

/// Seeded distinct priorities induce the order: rank[v] is v's position
/// when vertices are sorted by (priority, id).
struct Permutation {
  std::vector<std::uint64_t> priority;
  std::vector<std::uint32_t> rank;

  static Permutation random(std::size_t n, std::uint64_t seed) {
    Permutation p;
    p.priority.resize(n);
    for (Vertex v = 0; v < n; ++v) p.priority[v] = hash_coin(seed, Stream::kPriority, 0, v);
    p.derive_rank();
    return p;
  }

  /// A fixed order: order[i] gets rank i.
  static Permutation from_order(std::span<const Vertex> order) {
    Permutation p;
    p.priority.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) p.priority[order[i]] = i;
    p.derive_rank();
    return p;
  }

 private:
  void derive_rank() {
    std::vector<Vertex> by(priority.size());
    std::iota(by.begin(), by.end(), Vertex{0});
    std::sort(by.begin(), by.end(),
              [&](Vertex a, Vertex b) { return priority[a] != priority[b] ? priority[a] < priority[b] : a < b; });
    rank.assign(priority.size(), 0);
    for (std::uint32_t i = 0; i < by.size(); ++i) rank[by[i]] = i;
  }
};

/// Greedy reference: scan vertices by rank, keep each with no kept neighbor.
inline std::vector<Vertex> lfmis_oracle(const Graph& g, std::span<const std::uint32_t> rank) {
  std::vector<Vertex> order(g.n());
  for (Vertex v = 0; v < g.n(); ++v) order[rank[v]] = v;
  std::vector<char> in(g.n(), 0), blocked(g.n(), 0);
  for (Vertex v : order) {
    if (blocked[v]) continue;
    in[v] = 1;
    for (const Arc& a : g.arcs(v)) blocked[a.to] = 1;
  }
  std::vector<Vertex> out;
  for (Vertex v = 0; v < g.n(); ++v) {
    if (in[v]) out.push_back(v);
  }
  return out;
}

/// Neighbors of every vertex sorted by rank.
inline std::vector<std::vector<Vertex>> neighbors_by_rank(const Graph& g, std::span<const std::uint32_t> rank) {
  std::vector<std::vector<Vertex>> adj(g.n());
  for (Vertex v = 0; v < g.n(); ++v) {
    adj[v] = g.neighbors(v);
    std::sort(adj[v].begin(), adj[v].end(), [&](Vertex a, Vertex b) { return rank[a] < rank[b]; });
  }
  return adj;
}

struct Membership {
  bool in_mis = false;
  std::uint64_t calls = 0;  // recursive invocations, the top-level call included
};

/// The recursive membership test: v is in the set unless some lower-ranked
/// neighbor is, checking lower neighbors in rank order. No memoization, so
/// `calls` is the full size of the recursion tree.
inline Membership membership_query(const std::vector<std::vector<Vertex>>& by_rank,
                                   std::span<const std::uint32_t> rank, Vertex v) {
  struct Frame {
    Vertex v;
    std::size_t next;
  };
  std::vector<Frame> stack{{v, 0}};
  std::uint64_t calls = 1;
  bool returned = false;  // value handed back by the frame just popped
  bool have_return = false;
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (have_return) {
      have_return = false;
      if (returned) {
        stack.pop_back();
        returned = false;
        have_return = true;
        continue;
      }
    }
    const auto& nb = by_rank[f.v];
    if (f.next < nb.size() && rank[nb[f.next]] < rank[f.v]) {
      const Vertex u = nb[f.next++];
      ++calls;
      stack.push_back({u, 0});
      continue;
    }
    stack.pop_back();
    returned = true;
    have_return = true;
  }
  return {returned, calls};
}

inline Membership membership_query(const Graph& g, std::span<const std::uint32_t> rank, Vertex v) {
  return membership_query(neighbors_by_rank(g, rank), rank, v);
}

namespace detail {

// Core of the truncated test, shared by the sequential entry point and the
// simulated machines. `next(v, j)` yields v's j-th neighbor (0-based, rank
// order) with its rank, or nothing past the end. `state` reads and settles
// statuses. Neighbors already out of the set are skipped without a call.
template <class Next, class State>
std::uint64_t truncated_core(Next&& next, State&& state, Vertex v, std::uint32_t v_rank, std::uint64_t capacity) {
  if (capacity == 0) return 0;
  struct Frame {
    Vertex v;
    std::uint32_t rank;
    std::uint64_t capacity;
    std::uint64_t used;
    std::size_t j;
    Vertex child;
  };
  std::vector<Frame> stack{{v, v_rank, capacity, 1, 0, kNoVertex}};
  std::uint64_t returned = 0;
  bool have_return = false;
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (have_return) {
      have_return = false;
      f.used += returned;
      if (state.get(f.child) == MisState::kIn) {
        state.set(f.v, MisState::kOut);
        returned = f.used;
        have_return = true;
        stack.pop_back();
        continue;
      }
      if (f.used >= f.capacity) {
        returned = f.used;
        have_return = true;
        stack.pop_back();
        continue;
      }
    }
    bool descended = false;
    bool finished = false;
    for (;;) {
      const auto entry = next(f.v, f.j);
      if (!entry) break;
      const auto [u, u_rank] = *entry;
      if (f.rank < u_rank) {
        state.set(f.v, MisState::kIn);
        finished = true;
        break;
      }
      ++f.j;
      const MisState s = state.get(u);
      if (s == MisState::kOut) continue;
      if (s == MisState::kIn) {
        state.set(f.v, MisState::kOut);
        finished = true;
        break;
      }
      f.child = u;
      const std::uint64_t child_capacity = f.capacity - f.used;
      if (child_capacity == 0) {
        returned = 0;
        have_return = true;
        descended = true;
        break;
      }
      stack.push_back({u, u_rank, child_capacity, 1, 0, kNoVertex});
      descended = true;
      break;
    }
    if (descended) continue;
    if (!finished) state.set(f.v, MisState::kIn);  // every lower neighbor is out
    returned = stack.back().used;
    have_return = true;
    stack.pop_back();
  }
  return returned;
}

}  // namespace detail

/// Per-vertex status for the sequential truncated test.
struct MisStatus {
  std::vector<MisState> state;
  explicit MisStatus(std::size_t n = 0) : state(n, MisState::kUnknown) {}
  MisState get(Vertex v) const { return state[v]; }
  void set(Vertex v, MisState s) { state[v] = s; }
};

/// Truncated membership test with a budget of `capacity` calls. Returns the
/// calls made; may settle v and vertices it recursed into.
inline std::uint64_t truncated_query(const std::vector<std::vector<Vertex>>& by_rank,
                                     std::span<const std::uint32_t> rank, Vertex v, std::uint64_t capacity,
                                     MisStatus& status) {
  auto next = [&](Vertex x, std::size_t j) -> std::optional<std::pair<Vertex, std::uint32_t>> {
    if (j >= by_rank[x].size()) return std::nullopt;
    return std::pair{by_rank[x][j], rank[by_rank[x][j]]};
  };
  return detail::truncated_core(next, status, v, rank[v], capacity);
}

inline std::uint64_t truncated_query(const Graph& g, std::span<const std::uint32_t> rank, Vertex v,
                                     std::uint64_t capacity, MisStatus& status) {
  return truncated_query(neighbors_by_rank(g, rank), rank, v, capacity, status);
}

struct MisResult {
  std::vector<Vertex> members;                 // ascending
  std::vector<MisState> state;
  Permutation order;
  std::size_t iterations = 0;
  std::vector<std::size_t> remaining;          // unsettled vertices entering each iteration
  std::uint64_t capacity = 0;
};

/// Iterated truncated tests. Each iteration publishes the remaining graph
/// with lists sorted by rank, then every unsettled vertex runs a truncated
/// test with capacity floor(n^eps) against that snapshot. Everything a test
/// settles is written back; neighbors of new members drop out.
inline MisResult maximal_independent_set(const Graph& g, Simulator& sim, const Permutation* order = nullptr,
                                         std::size_t max_iterations = 0) {
  const auto& cfg = sim.config();
  const std::size_t n = g.n();
  MisResult out;
  out.order = order ? *order : Permutation::random(n, cfg.seed);
  const auto& rank = out.order.rank;
  out.capacity = std::max<std::uint64_t>(1, detail::floor_power(std::max<std::size_t>(n, 1), cfg.epsilon));
  const std::size_t cap =
      max_iterations ? max_iterations : 10 * static_cast<std::size_t>(std::ceil(2.0 / cfg.epsilon - 1e-12));
  out.state.assign(n, MisState::kUnknown);
  const auto full = neighbors_by_rank(g, rank);
  sim.charge("mis/sort-adjacency", {cfg.primitive_rounds(), static_cast<std::int64_t>(2 * g.m())});

  std::vector<Vertex> alive(n);
  std::iota(alive.begin(), alive.end(), Vertex{0});
  while (!alive.empty()) {
    if (out.iterations >= cap) {
      throw NonTerminationError("independent set did not settle within " + std::to_string(cap) + " iterations");
    }
    out.remaining.push_back(alive.size());

    struct Entry {
      Vertex v;
      std::uint32_t j;
      Vertex u;
    };
    std::vector<Entry> entries;
    for (Vertex v : alive) {
      std::uint32_t j = 0;
      for (Vertex u : full[v]) {
        if (out.state[u] == MisState::kUnknown) entries.push_back({v, ++j, u});
      }
    }
    sim.charge("mis/filter", {cfg.primitive_rounds(), static_cast<std::int64_t>(entries.size())});
    sim.run_range("mis/publish", entries.size(), [&](MachineContext& ctx, std::uint64_t i) {
      const Entry& e = entries[i];
      ctx.write({table::kMisAdjacency, static_cast<std::uint64_t>(e.v) << 32 | e.j},
                {static_cast<Word>(e.u), static_cast<Word>(rank[e.u])});
    });

    std::vector<std::uint64_t> items(alive.begin(), alive.end());
    sim.run_items("mis/query", items, [&](MachineContext& ctx, std::uint64_t v) {
      std::unordered_map<Vertex, MisState> local;
      struct Overlay {
        std::unordered_map<Vertex, MisState>* map;
        MisState get(Vertex x) const {
          auto it = map->find(x);
          return it == map->end() ? MisState::kUnknown : it->second;
        }
        void set(Vertex x, MisState s) { (*map)[x] = s; }
      } overlay{&local};
      auto next = [&](Vertex x, std::size_t j) -> std::optional<std::pair<Vertex, std::uint32_t>> {
        const auto rec = ctx.query({table::kMisAdjacency, static_cast<std::uint64_t>(x) << 32 | (j + 1)});
        if (!rec) return std::nullopt;
        return std::pair{static_cast<Vertex>((*rec)[0]), static_cast<std::uint32_t>((*rec)[1])};
      };
      detail::truncated_core(next, overlay, static_cast<Vertex>(v), rank[v], out.capacity);
      for (const auto& [x, s] : local) {
        if (s != MisState::kUnknown) ctx.write({table::kMisStatus, x}, {static_cast<Word>(s)});
      }
    });

    const Generation& store = sim.store();
    std::vector<Vertex> joined;
    for (Vertex v : alive) {
      if (const auto rec = store.find({table::kMisStatus, v})) {
        out.state[v] = static_cast<MisState>((*rec)[0]);
        if (out.state[v] == MisState::kIn) joined.push_back(v);
      }
    }
    for (Vertex v : joined) {
      for (Vertex u : full[v]) {
        if (out.state[u] == MisState::kUnknown) out.state[u] = MisState::kOut;
      }
    }
    sim.charge("mis/remove", {1, static_cast<std::int64_t>(joined.size())});
    std::vector<Vertex> still;
    for (Vertex v : alive) {
      if (out.state[v] == MisState::kUnknown) still.push_back(v);
    }
    alive.swap(still);
    ++out.iterations;
  }
  for (Vertex v = 0; v < n; ++v) {
    if (out.state[v] == MisState::kIn) out.members.push_back(v);
  }
  return out;
}

}  // namespace ampc
