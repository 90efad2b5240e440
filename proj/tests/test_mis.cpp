#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ampc/mis.hpp"

namespace ampc {
namespace {

Simulator make_sim(const Graph& g, double eps, std::uint64_t seed) {
  return Simulator(ModelConfig::for_problem(g.n(), g.m(), eps, seed));
}

bool independent(const Graph& g, const std::vector<Vertex>& set) {
  std::vector<char> in(g.n(), 0);
  for (Vertex v : set) in[v] = 1;
  for (const Edge& e : g.edges()) {
    if (in[e.u] && in[e.v]) return false;
  }
  return true;
}

bool maximal(const Graph& g, const std::vector<Vertex>& set) {
  std::vector<char> in(g.n(), 0);
  for (Vertex v : set) in[v] = 1;
  for (Vertex v = 0; v < g.n(); ++v) {
    if (in[v]) continue;
    bool covered = false;
    for (const Arc& a : g.arcs(v)) covered = covered || in[a.to];
    if (!covered) return false;
  }
  return true;
}

TEST(Permutation, RankIsBijectionSortedByPriority) {
  const auto p = Permutation::random(1000, 5);
  std::vector<Vertex> by(1000, kNoVertex);
  for (Vertex v = 0; v < 1000; ++v) {
    ASSERT_LT(p.rank[v], 1000u);
    ASSERT_EQ(by[p.rank[v]], kNoVertex);
    by[p.rank[v]] = v;
  }
  for (std::size_t i = 1; i < by.size(); ++i) EXPECT_LT(p.priority[by[i - 1]], p.priority[by[i]]);
  const std::vector<Vertex> order{2, 0, 1};
  EXPECT_EQ(Permutation::from_order(order).rank, (std::vector<std::uint32_t>{1, 2, 0}));
}

TEST(LfmisOracle, Examples) {
  const Graph path(3, {{0, 1, 0}, {1, 2, 0}});
  const std::vector<Vertex> abc{0, 1, 2};
  EXPECT_EQ(lfmis_oracle(path, Permutation::from_order(abc).rank), (std::vector<Vertex>{0, 2}));
  const Graph star(5, {{4, 0, 0}, {4, 1, 0}, {4, 2, 0}, {4, 3, 0}});
  const std::vector<Vertex> center_first{4, 0, 1, 2, 3};
  EXPECT_EQ(lfmis_oracle(star, Permutation::from_order(center_first).rank), (std::vector<Vertex>{4}));
  const Graph tri(3, {{0, 1, 0}, {1, 2, 0}, {0, 2, 0}});
  const std::vector<Vertex> order{1, 2, 0};
  EXPECT_EQ(lfmis_oracle(tri, Permutation::from_order(order).rank), (std::vector<Vertex>{1}));
}

TEST(Membership, Examples) {
  const Graph lone(1, {});
  const std::vector<std::uint32_t> r0{0};
  const auto m = membership_query(lone, r0, 0);
  EXPECT_TRUE(m.in_mis);
  EXPECT_EQ(m.calls, 1u);
  const Graph edge(2, {{0, 1, 0}});
  const std::vector<std::uint32_t> rank{0, 1};  // a = 0 ranks first
  const auto a = membership_query(edge, rank, 0);
  const auto b = membership_query(edge, rank, 1);
  EXPECT_TRUE(a.in_mis);
  EXPECT_EQ(a.calls, 1u);
  EXPECT_FALSE(b.in_mis);
  EXPECT_EQ(b.calls, 2u);
}

TEST(Membership, AgreesWithGreedy) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Graph g = gen_random_graph(120, 300, seed);
    const auto p = Permutation::random(g.n(), seed);
    const auto want = lfmis_oracle(g, p.rank);
    std::vector<char> in(g.n(), 0);
    for (Vertex v : want) in[v] = 1;
    const auto by_rank = neighbors_by_rank(g, p.rank);
    for (Vertex v = 0; v < g.n(); ++v) ASSERT_EQ(membership_query(by_rank, p.rank, v).in_mis, in[v] != 0);
  }
}

TEST(Membership, ExpectedTotalQueriesLinear) {
  const Graph g = gen_random_graph(500, 2000, 1);
  double sum = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = Permutation::random(g.n(), seed);
    const auto by_rank = neighbors_by_rank(g, p.rank);
    for (Vertex v = 0; v < g.n(); ++v) sum += static_cast<double>(membership_query(by_rank, p.rank, v).calls);
  }
  EXPECT_LE(sum / 50.0, 1.25 * static_cast<double>(g.m() + g.n()));
}

TEST(TruncatedQuery, Examples) {
  const Graph lone(1, {});
  const std::vector<std::uint32_t> r0{0};
  MisStatus s1(1);
  EXPECT_EQ(truncated_query(lone, r0, 0, 1, s1), 1u);
  EXPECT_EQ(s1.get(0), MisState::kIn);

  const Graph edge(2, {{0, 1, 0}});
  const std::vector<std::uint32_t> rank{0, 1};
  MisStatus s0(2);
  EXPECT_EQ(truncated_query(edge, rank, 1, 0, s0), 0u);
  EXPECT_EQ(s0.get(1), MisState::kUnknown);

  MisStatus s2(2);
  EXPECT_EQ(truncated_query(edge, rank, 1, 10, s2), 2u);
  EXPECT_EQ(s2.get(1), MisState::kOut);
  EXPECT_EQ(s2.get(0), MisState::kIn);
}

TEST(TruncatedQuery, CapacityOneCannotRecurse) {
  const Graph edge(2, {{0, 1, 0}});
  const std::vector<std::uint32_t> rank{0, 1};
  MisStatus s(2);
  EXPECT_EQ(truncated_query(edge, rank, 1, 1, s), 1u);
  EXPECT_EQ(s.get(1), MisState::kUnknown);
  EXPECT_EQ(s.get(0), MisState::kUnknown);
}

TEST(TruncatedQuery, SettlesOnlyAgreeWithGreedy) {
  SplitMix64 rng(4);
  for (int c = 0; c < 300; ++c) {
    const std::size_t n = 10 + rng.below(100);
    const Graph g = gen_random_graph(n, rng.below(3 * n), rng());
    const auto p = Permutation::random(n, rng());
    const auto want = lfmis_oracle(g, p.rank);
    std::vector<char> in(n, 0);
    for (Vertex v : want) in[v] = 1;
    MisStatus status(n);
    const auto by_rank = neighbors_by_rank(g, p.rank);
    for (int q = 0; q < 20; ++q) {
      const auto v = static_cast<Vertex>(rng.below(n));
      if (status.get(v) != MisState::kUnknown) continue;
      const auto cap = rng.below(8);
      const auto used = truncated_query(by_rank, p.rank, v, cap, status);
      ASSERT_LE(used, cap);
    }
    for (Vertex v = 0; v < n; ++v) {
      if (status.get(v) == MisState::kUnknown) continue;
      ASSERT_EQ(status.get(v) == MisState::kIn, in[v] != 0) << "case " << c << " vertex " << v;
    }
  }
}

TEST(Mis, EdgelessTakesAllInOneIteration) {
  const Graph g(40, {});
  auto sim = make_sim(g, 0.5, 1);
  const auto r = maximal_independent_set(g, sim);
  EXPECT_EQ(r.members.size(), 40u);
  EXPECT_EQ(r.iterations, 1u);
}

TEST(Mis, CompleteGraphTakesPiMinimum) {
  const Graph g = gen_random_graph(50, 50 * 49 / 2, 1);
  auto sim = make_sim(g, 0.5, 9);
  const auto r = maximal_independent_set(g, sim);
  ASSERT_EQ(r.members.size(), 1u);
  const auto first = std::min_element(r.order.rank.begin(), r.order.rank.end()) - r.order.rank.begin();
  EXPECT_EQ(r.members[0], static_cast<Vertex>(first));
}

TEST(Mis, RandomGraphsMatchGreedy) {
  SplitMix64 rng(12);
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 50 + rng.below(1951);
    const std::size_t m = std::min<std::size_t>(rng.below(10001), n * (n - 1) / 2);
    const Graph g = gen_random_graph(n, m, rng());
    const double eps = (c % 3 == 0) ? 0.4 : (c % 3 == 1 ? 0.5 : 0.66);
    auto sim = make_sim(g, eps, rng());
    const auto r = maximal_independent_set(g, sim);
    ASSERT_EQ(r.members, lfmis_oracle(g, r.order.rank)) << "case " << c;
    ASSERT_TRUE(independent(g, r.members));
    ASSERT_TRUE(maximal(g, r.members));
    EXPECT_LE(r.iterations, static_cast<std::size_t>(std::ceil(2 / eps)) + 2);
    // At least one vertex settles per iteration.
    for (std::size_t i = 1; i < r.remaining.size(); ++i) EXPECT_LT(r.remaining[i], r.remaining[i - 1]);
    EXPECT_EQ(sim.summary().violations, 0u);
  }
}

TEST(Mis, SharedPermutationIsHonored) {
  const Graph g = gen_random_graph(300, 900, 3);
  const auto p = Permutation::random(300, 77);
  auto sim = make_sim(g, 0.5, 1);
  const auto r = maximal_independent_set(g, sim, &p);
  EXPECT_EQ(r.members, lfmis_oracle(g, p.rank));
}

TEST(Mis, IterationCapRaisesNonTermination) {
  // A path ranked left to right with capacity 1 settles two vertices per
  // iteration, far beyond a cap of 3.
  std::vector<Edge> edges;
  for (Vertex v = 0; v + 1 < 100; ++v) edges.push_back({v, v + 1, 0});
  const Graph path(100, std::move(edges));
  std::vector<Vertex> order(100);
  std::iota(order.begin(), order.end(), Vertex{0});
  const auto p = Permutation::from_order(order);
  auto sim = make_sim(path, 0.1, 1);
  EXPECT_THROW(maximal_independent_set(path, sim, &p, 3), NonTerminationError);
  auto again = make_sim(path, 0.1, 1);
  const auto r = maximal_independent_set(path, again, &p);
  EXPECT_EQ(r.members, lfmis_oracle(path, p.rank));
}

}  // namespace
}  // namespace ampc
