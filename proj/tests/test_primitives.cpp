#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "ampc/oracles.hpp"
#include "ampc/primitives.hpp"

namespace ampc {
namespace {

constexpr double kEps = 0.5;
constexpr int kCases = 1000;

std::vector<int> random_ints(SplitMix64& rng, std::size_t max_len, int range) {
  std::vector<int> v(rng.below(max_len + 1));
  for (int& x : v) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(range))) - range / 2;
  return v;
}

TEST(Sort, Examples) {
  EXPECT_EQ(mpc_sort(std::vector<int>{3, 1, 2}, kEps).value, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(mpc_sort(std::vector<int>{1, 2, 3}, kEps).value, (std::vector<int>{1, 2, 3}));
  EXPECT_TRUE(mpc_sort(std::vector<int>{}, kEps).value.empty());
}

TEST(Sort, ChargedRounds) {
  EXPECT_EQ(mpc_sort(std::vector<int>{1}, 0.5).rounds_charged, 2);
  EXPECT_EQ(mpc_sort(std::vector<int>{1}, 0.4).rounds_charged, 3);
  EXPECT_EQ(mpc_sort(std::vector<int>{1}, 0.66).rounds_charged, 2);
  EXPECT_EQ(mpc_sort(std::vector<int>{1}, 1.0 / 3.0).rounds_charged, 3);
  const auto r = mpc_sort(std::vector<int>(100, 0), 0.5);
  EXPECT_GE(r.communication_charged, 100);
}

TEST(Sort, TenThousandKeysMatchOracle) {
  SplitMix64 rng(1);
  std::vector<std::uint64_t> keys(10000);
  for (auto& k : keys) k = rng();
  auto want = keys;
  std::sort(want.begin(), want.end());
  EXPECT_EQ(mpc_sort(keys, kEps).value, want);
}

TEST(Sort, StableOnRandomPairs) {
  SplitMix64 rng(2);
  for (int c = 0; c < kCases; ++c) {
    std::vector<std::pair<int, int>> v(rng.below(200));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = {static_cast<int>(rng.below(10)), static_cast<int>(i)};
    auto want = v;
    std::stable_sort(want.begin(), want.end(), [](auto a, auto b) { return a.first < b.first; });
    const auto got = mpc_sort(v, kEps, [](auto a, auto b) { return a.first < b.first; }).value;
    ASSERT_EQ(got, want) << "case " << c;
  }
}

TEST(Filter, Examples) {
  const std::vector<int> v{1, 2, 3, 4};
  EXPECT_EQ(mpc_filter<int>(v, [](int x) { return x % 2 == 0; }, kEps).value, (std::vector<int>{2, 4}));
  EXPECT_TRUE(mpc_filter<int>(v, [](int) { return false; }, kEps).value.empty());
  EXPECT_EQ(mpc_filter<int>(v, [](int) { return true; }, kEps).rounds_charged, 2);
}

TEST(Filter, RandomMatchesOracle) {
  SplitMix64 rng(3);
  for (int c = 0; c < kCases; ++c) {
    const auto v = random_ints(rng, 300, 100);
    const int mod = 2 + static_cast<int>(rng.below(5));
    auto keep = [mod](int x) { return ((x % mod) + mod) % mod == 0; };
    std::vector<int> want;
    std::copy_if(v.begin(), v.end(), std::back_inserter(want), keep);
    ASSERT_EQ(mpc_filter<int>(v, keep, kEps).value, want) << "case " << c;
  }
}

TEST(PrefixSum, Examples) {
  const std::vector<int> v{1, 2, 3};
  const auto r = mpc_prefix_sum<int>(v, std::plus<>{}, 0, kEps).value;
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], std::make_pair(1, 0));
  EXPECT_EQ(r[1], std::make_pair(2, 1));
  EXPECT_EQ(r[2], std::make_pair(3, 3));
  EXPECT_TRUE(mpc_prefix_sum<int>(std::vector<int>{}, std::plus<>{}, 0, kEps).value.empty());
}

TEST(PrefixSum, RunningMaxMatchesOracle) {
  SplitMix64 rng(4);
  const int lowest = std::numeric_limits<int>::min();
  for (int c = 0; c < kCases; ++c) {
    const auto v = random_ints(rng, 300, 1000);
    const auto got = mpc_prefix_sum<int>(v, [](int a, int b) { return std::max(a, b); }, lowest, kEps).value;
    int run = lowest;
    ASSERT_EQ(got.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      ASSERT_EQ(got[i].first, v[i]);
      ASSERT_EQ(got[i].second, run) << "case " << c << " position " << i;
      run = std::max(run, v[i]);
    }
  }
}

TEST(PrefixSum, RandomSumsMatchOracle) {
  SplitMix64 rng(5);
  for (int c = 0; c < kCases; ++c) {
    const auto v = random_ints(rng, 300, 1000);
    const auto got = mpc_prefix_sum<int>(v, std::plus<>{}, 0, kEps).value;
    std::vector<int> want(v.size());
    std::exclusive_scan(v.begin(), v.end(), want.begin(), 0);
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_EQ(got[i].second, want[i]);
  }
}

std::vector<std::optional<std::size_t>> nearest_flag_oracle(const std::vector<bool>& flags) {
  std::vector<std::optional<std::size_t>> out(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) {
    for (std::size_t j = i; j-- > 0;) {
      if (flags[j]) {
        out[i] = j;
        break;
      }
    }
  }
  return out;
}

std::vector<std::optional<std::size_t>> predecessor(const std::vector<bool>& flags) {
  // vector<bool> is packed, so copy into a plain array for the span.
  std::unique_ptr<bool[]> b(new bool[flags.size()]);
  for (std::size_t i = 0; i < flags.size(); ++i) b[i] = flags[i];
  return mpc_predecessor(std::span<const bool>(b.get(), flags.size()), kEps).value;
}

TEST(Predecessor, Examples) {
  using O = std::optional<std::size_t>;
  EXPECT_EQ(predecessor({true, false, false, true, false}), (std::vector<O>{{}, 0, 0, 0, 3}));
  EXPECT_EQ(predecessor({false, false, false}), (std::vector<O>{{}, {}, {}}));
  EXPECT_EQ(predecessor({true, true, true, true}), (std::vector<O>{{}, 0, 1, 2}));
}

TEST(Predecessor, RandomMatchesScan) {
  SplitMix64 rng(6);
  for (int c = 0; c < kCases; ++c) {
    std::vector<bool> flags(rng.below(200));
    const double p = rng.uniform();
    for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = rng.uniform() < p;
    ASSERT_EQ(predecessor(flags), nearest_flag_oracle(flags)) << "case " << c;
  }
}

TEST(Dedup, Examples) {
  EXPECT_EQ(mpc_dedup(std::vector<char>{'a', 'b', 'a'}, kEps).value, (std::vector<char>{'a', 'b'}));
  EXPECT_EQ(mpc_dedup(std::vector<int>{3, 1, 2}, kEps).value, (std::vector<int>{1, 2, 3}));
}

TEST(Dedup, RandomMultisetMatchesSet) {
  SplitMix64 rng(7);
  for (int c = 0; c < kCases; ++c) {
    const auto v = random_ints(rng, 300, 40);
    const std::set<int> want(v.begin(), v.end());
    ASSERT_EQ(mpc_dedup(v, kEps).value, std::vector<int>(want.begin(), want.end()));
  }
}

TEST(RangeMinMax, Examples) {
  const auto idx = rmq_build(std::vector<int>{3, 1, 4, 1, 5}, kEps);
  EXPECT_EQ(idx.rounds_charged, 2);
  EXPECT_EQ(rmq_query(idx.value, 1, 3).value, 1);
  EXPECT_EQ(rmq_query(idx.value, 1, 3).rounds_charged, 1);
  EXPECT_EQ(rmq_query_max(idx.value, 1, 3).value, 4);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(rmq_query(idx.value, k, k).value, (std::vector<int>{3, 1, 4, 1, 5})[k]);
  }
}

TEST(RangeMinMax, OutOfRangeThrows) {
  const auto idx = rmq_build(std::vector<int>{3, 1, 4}, kEps).value;
  EXPECT_THROW(idx.min(0, 3), std::out_of_range);
  EXPECT_THROW(idx.max(2, 1), std::out_of_range);
  const auto empty = rmq_build(std::vector<int>{}, kEps).value;
  EXPECT_THROW(empty.min(0, 0), std::out_of_range);
}

TEST(RangeMinMax, RandomQueriesMatchNaiveScan) {
  SplitMix64 rng(8);
  for (int c = 0; c < kCases; ++c) {
    std::vector<std::int64_t> a(1 + rng.below(500));
    for (auto& x : a) x = static_cast<std::int64_t>(rng.below(1000));
    const auto idx = rmq_build(a, kEps).value;
    for (int q = 0; q < 5; ++q) {
      std::size_t i = rng.below(a.size()), j = rng.below(a.size());
      if (i > j) std::swap(i, j);
      const auto lo = *std::min_element(a.begin() + i, a.begin() + j + 1);
      const auto hi = *std::max_element(a.begin() + i, a.begin() + j + 1);
      ASSERT_EQ(idx.min(i, j), lo);
      ASSERT_EQ(idx.max(i, j), hi);
    }
  }
}

TEST(Contract, TriangleToSingleVertex) {
  const Graph tri(3, {{0, 1, 0}, {1, 2, 0}, {0, 2, 0}});
  const std::vector<Vertex> f{0, 0, 0};
  const auto r = contract_graph(tri, f);
  EXPECT_EQ(r.rounds_charged, 1);
  EXPECT_EQ(r.value.graph.m(), 0u);
  EXPECT_EQ(r.value.vertices, (std::vector<Vertex>{0}));
}

TEST(Contract, IdentityKeepsGraph) {
  const Graph g = gen_random_graph(50, 200, 9);
  std::vector<Vertex> f(50);
  std::iota(f.begin(), f.end(), Vertex{0});
  const auto r = contract_graph(g, f).value;
  EXPECT_EQ(r.graph.m(), g.m());
  std::set<std::pair<Vertex, Vertex>> a, b;
  for (const Edge& e : g.edges()) a.insert(std::minmax(e.u, e.v));
  for (const Edge& e : r.graph.edges()) b.insert(std::minmax(e.u, e.v));
  EXPECT_EQ(a, b);
}

TEST(Contract, UndefinedMapThrows) {
  const Graph g(3, {{0, 1, 0}});
  EXPECT_THROW(contract_graph(g, std::vector<Vertex>{0, 1}), DomainError);
  EXPECT_THROW(contract_graph(g, std::vector<Vertex>{0, 1, 7}), DomainError);
}

TEST(Contract, RandomCoarseningMatchesSetConstruction) {
  SplitMix64 rng(10);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = 2 + rng.below(40);
    const std::size_t m = rng.below(n * (n - 1) / 2 + 1);
    const Graph g = gen_random_graph(n, m, rng(), true);
    std::vector<Vertex> f(n);
    for (auto& x : f) x = static_cast<Vertex>(rng.below(n));
    std::set<std::pair<Vertex, Vertex>> want;
    std::map<std::pair<Vertex, Vertex>, Weight> lightest;
    std::size_t multi = 0;
    for (const Edge& e : g.edges()) {
      if (f[e.u] == f[e.v]) continue;
      const auto key = std::minmax(f[e.u], f[e.v]);
      want.insert(key);
      ++multi;
      auto [it, fresh] = lightest.emplace(key, e.w);
      if (!fresh) it->second = std::min(it->second, e.w);
    }
    const auto simple = contract_graph(g, f).value;
    std::set<std::pair<Vertex, Vertex>> got;
    for (const Edge& e : simple.graph.edges()) got.insert(std::minmax(e.u, e.v));
    ASSERT_EQ(got, want) << "case " << c;
    ASSERT_EQ(simple.graph.m(), want.size());
    ASSERT_EQ(contract_graph(g, f, ContractMode::kMultigraph).value.graph.m(), multi);
    const auto light = contract_graph(g, f, ContractMode::kMinWeight).value;
    for (std::size_t i = 0; i < light.graph.m(); ++i) {
      const Edge& e = light.graph.edge(i);
      ASSERT_EQ(e.w, lightest.at(std::minmax(e.u, e.v)));
      ASSERT_EQ(g.edge(light.origin[i]).w, e.w);
    }
  }
}

TEST(Settle, ChargesSimulator) {
  Simulator sim(ModelConfig::for_problem(100, 0, 0.5, 1));
  const auto v = settle(sim, "sort", mpc_sort(std::vector<int>{2, 1}, 0.5));
  EXPECT_EQ(v, (std::vector<int>{1, 2}));
  EXPECT_EQ(sim.charged_rounds(), 2);
  ASSERT_EQ(sim.charges().size(), 1u);
  EXPECT_EQ(sim.charges()[0].label, "sort");
}

}  // namespace
}  // namespace ampc
