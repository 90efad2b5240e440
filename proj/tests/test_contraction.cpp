#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "ampc/contraction.hpp"
#include "ampc/oracles.hpp"

namespace ampc {
namespace {

Graph ring(std::size_t n) {
  std::vector<Edge> edges;
  for (Vertex v = 0; v < n; ++v) edges.push_back({v, static_cast<Vertex>((v + 1) % n), 0});
  return Graph(n, std::move(edges));
}

Simulator make_sim(std::size_t n, double eps, std::uint64_t seed) {
  return Simulator(ModelConfig::for_problem(n, n, eps, seed));
}

TEST(CycleGraph, RejectsNonCycles) {
  EXPECT_THROW(CycleGraph::from_graph(Graph(3, {{0, 1, 0}, {1, 2, 0}})), StructureError);
  EXPECT_THROW(CycleGraph::from_graph(Graph(4, {{0, 1, 0}, {0, 2, 0}, {0, 3, 0}, {1, 2, 0}})), StructureError);
  const auto c = CycleGraph::from_graph(gen_cycles(12, 2, 3));
  EXPECT_EQ(c.count_cycles(), 2u);
}

TEST(CycleGraph, ParallelEdgesFormATwoCycle) {
  const Graph two(2, {{0, 1, 0}, {0, 1, 0}}, false, Graph::Kind::kMultigraph);
  const auto c = CycleGraph::from_graph(two);
  EXPECT_EQ(c.count_cycles(), 1u);
}

TEST(Shrink, ForcedSamplesOnSixCycle) {
  auto sim = make_sim(6, 0.5, 1);
  ShrinkOptions opt;
  opt.iterations = 1;
  opt.sampler = [](std::size_t, Vertex v) { return v == 0 || v == 3; };
  const auto r = shrink(CycleGraph::from_graph(ring(6)), opt, sim);
  EXPECT_EQ(r.graph.vertices(), (std::vector<Vertex>{0, 3}));
  for (unsigned side = 0; side < 2; ++side) {
    EXPECT_EQ(port_vertex(r.graph.link(0, side)), 3u);
    EXPECT_EQ(port_vertex(r.graph.link(3, side)), 0u);
  }
  EXPECT_EQ(r.sample_map[0], (std::array<Vertex, 2>{3, 3}));
  EXPECT_EQ(r.graph.count_cycles(), 1u);
  EXPECT_EQ(r.iteration_sizes, (std::vector<std::size_t>{6, 2}));
  for (Vertex v : {1u, 2u, 4u, 5u}) EXPECT_TRUE(r.representative[v] == 0 || r.representative[v] == 3);
  EXPECT_EQ(r.representative[0], 0u);
  EXPECT_EQ(r.representative[3], 3u);
}

TEST(Shrink, SampleEverythingIsIdentity) {
  auto sim = make_sim(40, 0.5, 1);
  const Graph g = gen_cycles(40, 2, 9);
  ShrinkOptions opt;
  opt.iterations = 2;
  opt.sampler = [](std::size_t, Vertex) { return true; };
  const auto r = shrink(CycleGraph::from_graph(g), opt, sim);
  EXPECT_EQ(r.graph.size(), 40u);
  for (Vertex v = 0; v < 40; ++v) {
    std::multiset<Vertex> want;
    for (const Arc& a : g.arcs(v)) want.insert(a.to);
    EXPECT_EQ(std::multiset<Vertex>(r.sample_map[v].begin(), r.sample_map[v].end()), want);
    EXPECT_EQ(r.representative[v], v);
  }
}

TEST(Shrink, EmptySampleFallsBackToMinimum) {
  auto sim = make_sim(18, 0.5, 1);
  const Graph g = gen_cycles(18, 2, 4);
  ShrinkOptions opt;
  opt.iterations = 1;
  opt.sampler = [](std::size_t, Vertex) { return false; };
  const auto r = shrink(CycleGraph::from_graph(g), opt, sim);
  EXPECT_EQ(r.fallback_samples, 2u);
  EXPECT_EQ(r.graph.size(), 2u);
  const auto mins = CycleGraph::from_graph(g).cycle_minimum();
  for (Vertex v = 0; v < 18; ++v) EXPECT_EQ(r.representative[v], mins[v]);
}

TEST(Shrink, InvariantsOnEveryLevel) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 4096;
    const int pieces = 1 + static_cast<int>(seed % 2);
    const Graph g = gen_cycles(n, pieces, seed);
    auto sim = make_sim(n, 0.4, seed);
    ShrinkOptions opt;
    opt.delta = 0.4;
    opt.iterations = 4;
    const auto r = shrink(CycleGraph::from_graph(g), opt, sim);
    ASSERT_EQ(r.levels.size(), 4u);
    for (const auto& level : r.levels) {
      EXPECT_NO_THROW(level.validate());  // every vertex keeps two matched ports
      EXPECT_EQ(level.count_cycles(), static_cast<std::size_t>(pieces));
    }
    EXPECT_EQ(r.graph.count_cycles(), static_cast<std::size_t>(pieces));
    // Representatives stay inside their own cycle.
    const auto label = oracle::uf_components(g);
    for (Vertex v = 0; v < n; ++v) ASSERT_EQ(label[r.representative[v]], label[v]);
    EXPECT_EQ(sim.summary().violations, 0u);
  }
}

TEST(Shrink, FinalSizeBound) {
  const std::size_t n = 1 << 14;
  const double eps = 0.5;
  const auto t = static_cast<std::size_t>(std::ceil(2 * (1 - eps) / eps));
  const double bound = 8 * std::pow(static_cast<double>(n), eps);
  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto sim = make_sim(n, eps, seed);
    ShrinkOptions opt;
    opt.delta = 0.5;
    opt.iterations = t;
    const auto r = shrink(CycleGraph::from_graph(gen_cycles(n, 1, seed)), opt, sim);
    within += static_cast<double>(r.graph.size()) <= bound;
  }
  EXPECT_GE(within, 95);
}

TEST(TwoCycle, SmallExamples) {
  EXPECT_EQ(two_cycle(gen_cycles(16, 1, 1), ModelConfig::for_problem(16, 16, 0.5, 1)).cycles, 1);
  EXPECT_EQ(two_cycle(gen_cycles(16, 2, 1), ModelConfig::for_problem(16, 16, 0.5, 1)).cycles, 2);
}

TEST(TwoCycle, SeededInstances) {
  const std::size_t n = 1 << 14;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int pieces = 1 + static_cast<int>(seed % 2);
    auto cfg = ModelConfig::for_problem(n, n, 0.5, seed);
    Simulator sim(cfg);
    const auto r = two_cycle(gen_cycles(n, pieces, seed), sim);
    EXPECT_EQ(r.cycles, pieces) << "seed " << seed;
    EXPECT_LE(r.shrink_iterations, 2u + 1u);
    EXPECT_LE(static_cast<double>(r.residual), 8 * std::sqrt(static_cast<double>(n)));
    EXPECT_EQ(sim.summary().violations, 0u);
  }
}

TEST(TwoCycle, ResidualTooLargeIsCapacityError) {
  const std::size_t n = 1 << 14;
  Simulator sim(ModelConfig::for_problem(n, n, 0.5, 1));
  EXPECT_THROW(two_cycle(gen_cycles(n, 1, 1), sim, [](std::size_t, Vertex) { return true; }), CapacityError);
}

TEST(CycleSearch, LabelIsLowestPriorityVertex) {
  auto sim = make_sim(50, 0.5, 21);
  const auto c = CycleGraph::from_graph(ring(50));
  const auto r = cycle_search(c, sim, 5);
  Vertex best = 0;
  for (Vertex v = 1; v < 50; ++v) {
    if (vertex_priority(21, 5, v) < vertex_priority(21, 5, best)) best = v;
  }
  for (Vertex v = 0; v < 50; ++v) EXPECT_EQ(r.label[v], best);
  EXPECT_EQ(r.steps[best], 50u);  // the minimum walks all the way around
}

TEST(CycleConn, DisjointTriangles) {
  std::vector<Edge> edges;
  for (Vertex t = 0; t < 7; ++t) {
    edges.push_back({3 * t, 3 * t + 1, 0});
    edges.push_back({3 * t + 1, 3 * t + 2, 0});
    edges.push_back({3 * t + 2, 3 * t, 0});
  }
  const Graph g(21, std::move(edges));
  auto sim = make_sim(21, 0.5, 3);
  const auto label = cycle_conn(g, sim);
  EXPECT_EQ(oracle::count_components(label), 7u);
  EXPECT_TRUE(oracle::same_partition(label, oracle::uf_components(g)));
}

TEST(CycleConn, MatchesUnionFind) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 2000 + 2 * seed;
    const Graph g = gen_cycles(n, 1 + static_cast<int>(seed % 2), seed);
    for (double eps : {0.4, 0.66}) {
      auto sim = make_sim(n, eps, seed);
      ASSERT_TRUE(oracle::same_partition(cycle_conn(g, sim), oracle::uf_components(g)));
      EXPECT_EQ(sim.summary().violations, 0u);
    }
  }
}

TEST(CycleSearch, MeanSearchLengthLogarithmic) {
  const std::size_t k = 1 << 12;
  double harmonic = 0;
  for (std::size_t i = 1; i <= k; ++i) harmonic += 1.0 / static_cast<double>(i);
  const auto c = CycleGraph::from_graph(ring(k));
  double total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto sim = make_sim(k, 0.5, seed);
    const auto r = cycle_search(c, sim, 0);
    total += static_cast<double>(std::accumulate(r.steps.begin(), r.steps.end(), std::uint64_t{0})) /
             static_cast<double>(k);
  }
  EXPECT_LE(total / 50.0, 2 * harmonic);
}

TEST(ListRanking, Examples) {
  auto sim = make_sim(4, 0.5, 1);
  const std::vector<Vertex> one{kNoVertex};
  EXPECT_EQ(list_ranking(one, 0, sim).rank, (std::vector<std::uint64_t>{0}));
  // a=0 -> b=1 -> c=2 -> d=3
  const std::vector<Vertex> four{1, 2, 3, kNoVertex};
  const auto r = list_ranking(four, 0, sim);
  EXPECT_EQ(r.rank, (std::vector<std::uint64_t>{0, 1, 2, 3}));
  EXPECT_EQ(r.order, (std::vector<Vertex>{0, 1, 2, 3}));
}

TEST(ListRanking, BrokenChainIsStructureError) {
  auto sim = make_sim(4, 0.5, 1);
  EXPECT_THROW(list_ranking(std::vector<Vertex>{1, kNoVertex, 3, kNoVertex}, 0, sim), StructureError);
  EXPECT_THROW(list_ranking(std::vector<Vertex>{1, 2, 1}, 0, sim), StructureError);
  EXPECT_THROW(list_ranking(std::vector<Vertex>{1, kNoVertex}, 1, sim), StructureError);
  EXPECT_THROW(list_ranking(std::vector<Vertex>{1, kNoVertex}, 5, sim), DomainError);
}

std::vector<Vertex> random_list(std::size_t n, std::uint64_t seed, Vertex& head) {
  SplitMix64 rng(seed);
  const auto order = detail::random_permutation(n, rng);
  std::vector<Vertex> succ(n, kNoVertex);
  for (std::size_t i = 0; i + 1 < n; ++i) succ[order[i]] = order[i + 1];
  head = order[0];
  return succ;
}

TEST(ListRanking, RandomListsMatchScan) {
  const std::size_t n = 1 << 14;
  for (double eps : {0.4, 0.5, 0.66}) {
    const auto bound = static_cast<std::size_t>(std::ceil(2 * (1 - eps) / eps - 1e-9)) + 1;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Vertex head = 0;
      const auto succ = random_list(n, seed, head);
      auto sim = make_sim(n, eps, seed);
      const auto r = list_ranking(succ, head, sim);
      ASSERT_EQ(r.rank, oracle::seq_list_rank(succ, head));
      EXPECT_LE(r.iterations, bound) << "eps " << eps;
      EXPECT_EQ(sim.summary().violations, 0u);
      // Weight is conserved at every level, and the head is always sampled.
      for (const auto& level : r.levels) {
        std::uint64_t total = 0;
        for (Vertex v : level.active) total += level.weight[v];
        EXPECT_EQ(total, n);
        EXPECT_TRUE(std::find(level.active.begin(), level.active.end(), head) != level.active.end());
      }
    }
  }
}

TEST(ListRanking, ManyLists) {
  const std::size_t n = 5000;
  SplitMix64 rng(3);
  const auto order = detail::random_permutation(n, rng);
  std::vector<Vertex> succ(n, kNoVertex), heads;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 700 == 0) heads.push_back(order[i]);
    if ((i + 1) % 700 != 0 && i + 1 < n) succ[order[i]] = order[i + 1];
  }
  auto sim = make_sim(n, 0.5, 4);
  const auto r = rank_lists(succ, heads, sim);
  for (Vertex h : heads) {
    const auto want = oracle::seq_list_rank(succ, h);
    for (Vertex v = 0; v < n; ++v) {
      if (want[v] == UINT64_MAX) continue;
      ASSERT_EQ(r.rank[v], want[v]);
      ASSERT_EQ(r.head[v], h);
    }
  }
}

}  // namespace
}  // namespace ampc
