#pragma once

// Constant-round MPC building blocks. Each one computes its result centrally
// and reports the rounds and communication a distributed implementation is
// charged with: ceil(1/eps) rounds for sort, filter, prefix sums,
// predecessor, dedup and RMQ construction; one round for contraction and an
// RMQ query.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ampc/graph.hpp"
#include "ampc/runtime.hpp"

namespace ampc {

template <class T>
struct ChargedResult {
  T value;
  std::int64_t rounds_charged = 1;
  std::int64_t communication_charged = 0;
};

/// Records the cost of a primitive on `sim` and hands back its value.
template <class T>
T settle(Simulator& sim, std::string_view label, ChargedResult<T> r) {
  sim.charge(label, {r.rounds_charged, r.communication_charged});
  return std::move(r.value);
}

namespace detail {

inline std::int64_t log_rounds(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie strictly between 0 and 1");
  return static_cast<std::int64_t>(std::ceil(1.0 / epsilon - 1e-12));
}

template <class T>
ChargedResult<T> charged(T value, double epsilon, std::size_t touched) {
  const std::int64_t rounds = log_rounds(epsilon);
  return {std::move(value), rounds, rounds * static_cast<std::int64_t>(touched)};
}

}  // namespace detail

template <class T, class Less = std::less<>>
ChargedResult<std::vector<T>> mpc_sort(std::vector<T> tuples, double epsilon, Less less = {}) {
  const std::size_t n = tuples.size();
  std::stable_sort(tuples.begin(), tuples.end(), less);
  return detail::charged(std::move(tuples), epsilon, n);
}

template <class T, class Pred>
ChargedResult<std::vector<T>> mpc_filter(std::span<const T> tuples, Pred keep, double epsilon) {
  std::vector<T> out;
  for (const T& t : tuples) {
    if (keep(t)) out.push_back(t);
  }
  return detail::charged(std::move(out), epsilon, tuples.size());
}

/// Exclusive prefix: entry j carries identity (+) t_0 (+) ... (+) t_{j-1}.
template <class T, class Op>
ChargedResult<std::vector<std::pair<T, T>>> mpc_prefix_sum(std::span<const T> tuples, Op op, T identity,
                                                          double epsilon) {
  std::vector<std::pair<T, T>> out;
  out.reserve(tuples.size());
  T acc = identity;
  for (const T& t : tuples) {
    out.emplace_back(t, acc);
    acc = op(acc, t);
  }
  return detail::charged(std::move(out), epsilon, tuples.size());
}

/// For each position, the nearest earlier position whose flag is set.
inline ChargedResult<std::vector<std::optional<std::size_t>>> mpc_predecessor(std::span<const bool> flags,
                                                                            double epsilon) {
  std::vector<std::optional<std::size_t>> out(flags.size());
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    out[i] = last;
    if (flags[i]) last = i;
  }
  return detail::charged(std::move(out), epsilon, flags.size());
}

/// One representative per distinct value, in ascending order.
template <class T>
ChargedResult<std::vector<T>> mpc_dedup(std::vector<T> tuples, double epsilon) {
  const std::size_t n = tuples.size();
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  return detail::charged(std::move(tuples), epsilon, n);
}

/// Sparse tables answering inclusive range minimum and maximum in O(1).
template <class T>
class RangeMinMax {
 public:
  RangeMinMax() = default;
  explicit RangeMinMax(std::vector<T> values) {
    const std::size_t n = values.size();
    std::size_t levels = 1;
    while ((std::size_t{1} << levels) <= n) ++levels;
    min_.assign(levels, {});
    max_.assign(levels, {});
    min_[0] = values;
    max_[0] = std::move(values);
    for (std::size_t k = 1; k < levels; ++k) {
      const std::size_t half = std::size_t{1} << (k - 1);
      const std::size_t len = n + 1 - (std::size_t{1} << k);
      min_[k].resize(len);
      max_[k].resize(len);
      for (std::size_t i = 0; i < len; ++i) {
        min_[k][i] = std::min(min_[k - 1][i], min_[k - 1][i + half]);
        max_[k][i] = std::max(max_[k - 1][i], max_[k - 1][i + half]);
      }
    }
  }

  std::size_t size() const { return min_.empty() ? 0 : min_[0].size(); }

  T min(std::size_t i, std::size_t j) const {
    const auto [k, right] = span_level(i, j);
    return std::min(min_[k][i], min_[k][right]);
  }
  T max(std::size_t i, std::size_t j) const {
    const auto [k, right] = span_level(i, j);
    return std::max(max_[k][i], max_[k][right]);
  }

 private:
  std::pair<std::size_t, std::size_t> span_level(std::size_t i, std::size_t j) const {
    if (i > j || j >= size()) {
      throw std::out_of_range("range [" + std::to_string(i) + ", " + std::to_string(j) +
                              "] is outside an array of length " + std::to_string(size()));
    }
    const std::size_t k = static_cast<std::size_t>(std::bit_width(j - i + 1)) - 1;
    return {k, j + 1 - (std::size_t{1} << k)};
  }

  std::vector<std::vector<T>> min_;
  std::vector<std::vector<T>> max_;
};

template <class T>
ChargedResult<RangeMinMax<T>> rmq_build(std::vector<T> values, double epsilon) {
  const std::size_t n = values.size();
  return detail::charged(RangeMinMax<T>(std::move(values)), epsilon, n);
}

template <class T>
ChargedResult<T> rmq_query(const RangeMinMax<T>& index, std::size_t i, std::size_t j) {
  return {index.min(i, j), 1, 2};
}

template <class T>
ChargedResult<T> rmq_query_max(const RangeMinMax<T>& index, std::size_t i, std::size_t j) {
  return {index.max(i, j), 1, 2};
}

// ---------------------------------------------------------------------------
// Graph contraction

enum class ContractMode {
  kSimple,     // parallel edges collapse to one
  kMultigraph, // parallel edges kept
  kMinWeight,  // parallel edges collapse to the lightest
};

struct Contracted {
  Graph graph;                  // same vertex id space as the input
  std::vector<Vertex> vertices; // image of the map, ascending
  std::vector<std::uint32_t> origin;  // input edge index of each output edge
};

/// Relabels every edge (u, v) to (f(u), f(v)), dropping self-loops. The
/// result lives on the image of f; vertices outside it keep no edges.
inline ChargedResult<Contracted> contract_graph(const Graph& g, std::span<const Vertex> f,
                                                ContractMode mode = ContractMode::kSimple) {
  if (f.size() != g.n()) {
    throw DomainError("contraction map covers " + std::to_string(f.size()) + " of " + std::to_string(g.n()) +
                      " vertices");
  }
  std::vector<char> in_image(g.n(), 0);
  for (std::size_t v = 0; v < f.size(); ++v) {
    if (f[v] >= g.n()) throw DomainError("contraction map undefined at vertex " + std::to_string(v));
    in_image[f[v]] = 1;
  }
  struct Candidate {
    std::uint64_t key;
    Weight w;
    std::uint32_t index;
  };
  std::vector<Candidate> cand;
  cand.reserve(g.m());
  for (std::uint32_t i = 0; i < g.m(); ++i) {
    const Edge& e = g.edge(i);
    const Vertex a = f[e.u], b = f[e.v];
    if (a == b) continue;
    const std::uint64_t lo = std::min(a, b), hi = std::max(a, b);
    cand.push_back({lo << 32 | hi, e.w, i});
  }
  std::sort(cand.begin(), cand.end(), [mode](const Candidate& x, const Candidate& y) {
    if (x.key != y.key) return x.key < y.key;
    if (mode == ContractMode::kMinWeight && x.w != y.w) return x.w < y.w;
    return x.index < y.index;
  });
  Contracted out;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (mode != ContractMode::kMultigraph && i > 0 && cand[i].key == cand[i - 1].key) continue;
    const Edge& e = g.edge(cand[i].index);
    edges.push_back({f[e.u], f[e.v], e.w});
    out.origin.push_back(cand[i].index);
  }
  for (Vertex v = 0; v < g.n(); ++v) {
    if (in_image[v]) out.vertices.push_back(v);
  }
  out.graph = Graph(g.n(), std::move(edges), g.weighted(),
                    mode == ContractMode::kMultigraph ? Graph::Kind::kMultigraph : Graph::Kind::kSimple);
  return {std::move(out), 1, static_cast<std::int64_t>(g.m() + g.n())};
}

}  // namespace ampc
