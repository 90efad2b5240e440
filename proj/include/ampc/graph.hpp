#pragma once

// Undirected graph model, labelings, and seeded instance generators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "ampc/errors.hpp"
#include "ampc/random.hpp"

namespace ampc {

using Vertex = std::uint32_t;
using Weight = std::int64_t;

inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  Weight w = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Half of an edge as seen from one endpoint.
struct Arc {
  Vertex to = 0;
  std::uint32_t edge = 0;
};

/// Undirected graph on vertex ids 0..n-1 with CSR adjacency. Each vertex's
/// arcs are sorted by neighbor id (then edge index).
class Graph {
 public:
  enum class Kind { kSimple, kMultigraph };

  Graph() = default;

  Graph(std::size_t n, std::vector<Edge> edges, bool weighted = false, Kind kind = Kind::kSimple)
      : n_(n), edges_(std::move(edges)), weighted_(weighted), multigraph_(kind == Kind::kMultigraph) {
    if (n_ >= kNoVertex) throw DomainError("vertex count too large");
    if (edges_.size() >= std::numeric_limits<std::uint32_t>::max()) throw DomainError("too many edges");
    for (const Edge& e : edges_) {
      if (e.u >= n_ || e.v >= n_) {
        throw DomainError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                          ") has an endpoint outside 0.." + std::to_string(n_ == 0 ? 0 : n_ - 1));
      }
      if (e.u == e.v && !multigraph_) throw StructureError("self-loop at vertex " + std::to_string(e.u));
    }
    if (!multigraph_) check_no_duplicates();
    if (weighted_) check_distinct_weights();
    build_adjacency();
  }

  std::size_t n() const { return n_; }
  std::size_t m() const { return edges_.size(); }
  bool weighted() const { return weighted_; }
  bool multigraph() const { return multigraph_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t i) const { return edges_[i]; }

  std::span<const Arc> arcs(Vertex v) const {
    return {arcs_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

  std::vector<Vertex> neighbors(Vertex v) const {
    std::vector<Vertex> out;
    out.reserve(degree(v));
    for (const Arc& a : arcs(v)) out.push_back(a.to);
    return out;
  }

 private:
  void check_no_duplicates() const {
    std::vector<std::uint64_t> keys;
    keys.reserve(edges_.size());
    for (const Edge& e : edges_) {
      const std::uint64_t lo = std::min(e.u, e.v), hi = std::max(e.u, e.v);
      keys.push_back(lo << 32 | hi);
    }
    std::sort(keys.begin(), keys.end());
    auto dup = std::adjacent_find(keys.begin(), keys.end());
    if (dup != keys.end()) {
      throw StructureError("duplicate edge (" + std::to_string(*dup >> 32) + ", " +
                           std::to_string(*dup & 0xFFFFFFFFULL) + ")");
    }
  }

  void check_distinct_weights() const {
    std::vector<Weight> ws;
    ws.reserve(edges_.size());
    for (const Edge& e : edges_) ws.push_back(e.w);
    std::sort(ws.begin(), ws.end());
    auto dup = std::adjacent_find(ws.begin(), ws.end());
    if (dup != ws.end()) throw StructureError("duplicate edge weight " + std::to_string(*dup));
  }

  void build_adjacency() {
    offsets_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) {
      ++offsets_[e.u + 1];
      if (e.u != e.v) ++offsets_[e.v + 1];
    }
    for (std::size_t i = 1; i <= n_; ++i) offsets_[i] += offsets_[i - 1];
    arcs_.resize(offsets_[n_]);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::uint32_t i = 0; i < edges_.size(); ++i) {
      const Edge& e = edges_[i];
      arcs_[fill[e.u]++] = {e.v, i};
      if (e.u != e.v) arcs_[fill[e.v]++] = {e.u, i};
    }
    for (std::size_t v = 0; v < n_; ++v) {
      std::sort(arcs_.begin() + offsets_[v], arcs_.begin() + offsets_[v + 1],
                [](const Arc& a, const Arc& b) { return a.to != b.to ? a.to < b.to : a.edge < b.edge; });
    }
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  bool weighted_ = false;
  bool multigraph_ = false;
  std::vector<std::size_t> offsets_{0};
  std::vector<Arc> arcs_;
};

/// Component label per vertex. Two vertices share a label exactly when they
/// share a component.
struct ComponentLabeling {
  std::vector<Vertex> label;

  std::size_t size() const { return label.size(); }
  std::size_t count() const {
    std::vector<Vertex> l = label;
    std::sort(l.begin(), l.end());
    return static_cast<std::size_t>(std::unique(l.begin(), l.end()) - l.begin());
  }
};

/// Parent pointers; roots point to themselves.
struct RootedForest {
  std::vector<Vertex> parent;
  std::vector<Vertex> roots;
};

// ---------------------------------------------------------------------------
// Generators. All are pure functions of their arguments.

namespace detail {

inline std::vector<Vertex> random_permutation(std::size_t n, SplitMix64& rng) {
  std::vector<Vertex> p(n);
  std::iota(p.begin(), p.end(), Vertex{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

inline void assign_weights(std::vector<Edge>& edges, SplitMix64& rng) {
  const auto perm = random_permutation(edges.size(), rng);
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i].w = static_cast<Weight>(perm[i]) + 1;
}

}  // namespace detail

/// One vertex-permuted cycle on n vertices, or two of n/2 each.
inline Graph gen_cycles(std::size_t n, int pieces, std::uint64_t seed) {
  if (pieces != 1 && pieces != 2) throw ConfigError("pieces must be 1 or 2");
  if (pieces == 1 && n < 3) throw ConfigError("a single cycle needs n >= 3");
  if (pieces == 2 && (n < 6 || n % 2 != 0)) throw ConfigError("two cycles need an even n >= 6");
  SplitMix64 rng(hash_coin(seed, Stream::kGenerator, 0, n * 2 + static_cast<std::size_t>(pieces)));
  const auto perm = detail::random_permutation(n, rng);
  std::vector<Edge> edges;
  edges.reserve(n);
  const std::size_t len = n / static_cast<std::size_t>(pieces);
  for (int c = 0; c < pieces; ++c) {
    const std::size_t base = static_cast<std::size_t>(c) * len;
    for (std::size_t i = 0; i < len; ++i) edges.push_back({perm[base + i], perm[base + (i + 1) % len], 0});
  }
  return Graph(n, std::move(edges));
}

/// Uniform simple graph with exactly m edges. Weighted graphs get a random
/// permutation of 1..m as weights.
inline Graph gen_random_graph(std::size_t n, std::size_t m, std::uint64_t seed, bool weighted = false) {
  const std::uint64_t pairs = n < 2 ? 0 : static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (m > pairs) {
    throw ConfigError("cannot place " + std::to_string(m) + " edges on " + std::to_string(n) + " vertices");
  }
  SplitMix64 rng(hash_coin(seed, Stream::kGenerator, 1, n ^ (static_cast<std::uint64_t>(m) << 32)));
  // Floyd's sampling of m distinct pair indices.
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(m * 2);
  std::vector<std::uint64_t> picks;
  picks.reserve(m);
  for (std::uint64_t j = pairs - m; j < pairs; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    const std::uint64_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    picks.push_back(pick);
  }
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::uint64_t idx : picks) {
    // Row u holds pairs (u, u+1..n-1); find the row by walking the triangle.
    const double nn = static_cast<double>(n);
    auto u = static_cast<std::uint64_t>(
        std::max(0.0, std::floor(nn - 0.5 - std::sqrt((nn - 0.5) * (nn - 0.5) - 2.0 * static_cast<double>(idx)))));
    auto row_start = [n](std::uint64_t r) { return r * (2 * n - r - 1) / 2; };
    while (u > 0 && row_start(u) > idx) --u;
    while (row_start(u + 1) <= idx) ++u;
    const std::uint64_t v = u + 1 + (idx - row_start(u));
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v), 0});
  }
  if (weighted) detail::assign_weights(edges, rng);
  return Graph(n, std::move(edges), weighted);
}

/// Random forest with exactly `trees` components: each non-root vertex
/// attaches to a uniformly chosen earlier vertex of a random order.
inline Graph gen_random_forest(std::size_t n, std::size_t trees, std::uint64_t seed, bool weighted = false) {
  if (trees == 0 && n > 0) throw ConfigError("a non-empty forest needs at least one tree");
  if (trees > n) throw ConfigError("more trees than vertices");
  SplitMix64 rng(hash_coin(seed, Stream::kGenerator, 2, n ^ (static_cast<std::uint64_t>(trees) << 32)));
  const auto order = detail::random_permutation(n, rng);
  std::vector<Edge> edges;
  edges.reserve(n - trees);
  for (std::size_t i = trees; i < n; ++i) edges.push_back({order[i], order[rng.below(i)], 0});
  if (weighted) detail::assign_weights(edges, rng);
  return Graph(n, std::move(edges), weighted);
}

// ---------------------------------------------------------------------------
// Text format: header "n m" or "n m w", then one "u v" or "u v weight" per edge.

inline Graph read_graph(std::istream& in, bool multigraph = false) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first != std::string::npos && line[first] != '#') return true;
    }
    return false;
  };
  if (!next_line()) throw GraphFormatError("missing header line");
  std::istringstream header(line);
  std::uint64_t n = 0, m = 0;
  if (!(header >> n >> m)) throw GraphFormatError("header must be \"n m [w]\"");
  std::string flag;
  bool weighted = false;
  if (header >> flag) {
    if (flag != "w") throw GraphFormatError("unknown header flag '" + flag + "'");
    weighted = true;
  }
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    if (!next_line()) throw GraphFormatError("expected " + std::to_string(m) + " edges, got " + std::to_string(i));
    std::istringstream row(line);
    std::int64_t u = 0, v = 0;
    Weight w = 0;
    if (!(row >> u >> v)) throw GraphFormatError("bad edge line: " + line);
    if (weighted && !(row >> w)) throw GraphFormatError("missing weight: " + line);
    if (u < 0 || v < 0 || static_cast<std::uint64_t>(u) >= n || static_cast<std::uint64_t>(v) >= n) {
      throw GraphFormatError("endpoint out of range: " + line);
    }
    if (u == v) throw GraphFormatError("self-loop: " + line);
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v), w});
  }
  try {
    return Graph(n, std::move(edges), weighted, multigraph ? Graph::Kind::kMultigraph : Graph::Kind::kSimple);
  } catch (const StructureError& e) {
    throw GraphFormatError(e.what());
  }
}

inline void write_graph(std::ostream& out, const Graph& g) {
  out << g.n() << ' ' << g.m() << (g.weighted() ? " w" : "") << '\n';
  for (const Edge& e : g.edges()) {
    out << e.u << ' ' << e.v;
    if (g.weighted()) out << ' ' << e.w;
    out << '\n';
  }
}

}  // namespace ampc
