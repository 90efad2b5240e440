#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "ampc/harness.hpp"

namespace ampc::harness {
namespace {

ExperimentSpec small(const std::string& algorithm) {
  ExperimentSpec s;
  s.algorithm = algorithm;
  s.n = 256;
  s.trees = 4;
  s.trials = 3;
  s.seed = 5;
  return s;
}

TEST(ExperimentSpec, Validation) {
  auto s = small("connectivity");
  s.trials = 0;
  EXPECT_THROW(run_experiment(s), ConfigError);
  auto u = small("no-such-thing");
  EXPECT_THROW(u.validate(), ConfigError);
  auto two = small("two-cycle");
  two.pieces = 2;
  two.n = 7;
  EXPECT_THROW(two.validate(), ConfigError);
  auto eps = small("mis");
  eps.epsilon = 1.5;
  EXPECT_THROW(eps.validate(), ConfigError);
  auto dense = small("mis");
  dense.m = 256 * 255;
  EXPECT_THROW(dense.validate(), ConfigError);
  EXPECT_EQ(small("mis").edges(), 1024u);
}

TEST(Experiment, EveryAlgorithmRunsCorrectly) {
  for (const auto& a : algorithms()) {
    const auto report = run_experiment(small(a));
    ASSERT_EQ(report.records.size(), 3u) << a;
    for (const auto& r : report.records) EXPECT_TRUE(r.correct) << a << ": " << r.error;
    EXPECT_EQ(report.summary.correct, 3u) << a;
    EXPECT_EQ(report.summary.violations, 0u) << a;
  }
}

TEST(Experiment, ReportsAreByteIdenticalAcrossRunsAndThreads) {
  for (const auto& a : {"connectivity", "msf", "two-cycle", "bridges"}) {
    auto s = small(a);
    s.trials = 4;
    const auto one = run_experiment(s).jsonl();
    EXPECT_EQ(one, run_experiment(s).jsonl()) << a;
    s.threads = 3;
    EXPECT_EQ(one, run_experiment(s).jsonl()) << a;
  }
  auto s = small("connectivity");
  auto t = s;
  t.seed = 6;
  EXPECT_NE(run_experiment(s).jsonl(), run_experiment(t).jsonl());
}

TEST(Summary, AccumulatorMatchesBatchAndSurvivesJsonRoundTrip) {
  auto s = small("mis");
  s.trials = 7;
  const auto report = run_experiment(s);
  std::vector<TrialRecord> parsed;
  std::istringstream lines(report.jsonl());
  for (std::string line; std::getline(lines, line);) parsed.push_back(TrialRecord::from_json(nlohmann::json::parse(line)));
  ASSERT_EQ(parsed.size(), 7u);
  for (std::size_t i = 0; i < parsed.size(); ++i) EXPECT_EQ(parsed[i].to_json(), report.records[i].to_json());
  SummaryAccumulator acc;
  for (const auto& r : parsed) acc.add(r);
  EXPECT_EQ(acc.result(), report.summary);
  EXPECT_EQ(summarize(parsed), report.summary);
  const double mean =
      std::accumulate(parsed.begin(), parsed.end(), 0.0, [](double x, const TrialRecord& r) { return x + r.rounds; }) /
      7.0;
  EXPECT_DOUBLE_EQ(report.summary.mean_rounds, mean);
}

TEST(Summary, CsvShape) {
  const auto report = run_experiment(small("list-rank"));
  auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  EXPECT_EQ(count(ExperimentSummary::csv_header()), count(report.summary.csv_row()));
  EXPECT_EQ(report.summary.csv_row().rfind("list-rank,256,", 0), 0u);
}

TEST(Summary, P99IsNearestRank) {
  std::vector<TrialRecord> rs(200);
  for (std::size_t i = 0; i < rs.size(); ++i) rs[i].max_queries_per_machine = i + 1;
  // ceil(0.99 * 200) = 198th smallest.
  EXPECT_EQ(summarize(rs).p99_max_queries, 198u);
}

TEST(DefaultGrid, Shape) {
  EXPECT_EQ(default_grid("connectivity").size(), 9u);
  const auto grid = default_grid("two-cycle", 10, 3);
  EXPECT_EQ(grid.size(), 18u);
  for (const auto& s : grid) {
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(s.trials, 10u);
  }
}

TEST(Contention, ProfileWeights) {
  const auto uni = profile_weights(16, 4, WeightProfile::kUniform);
  EXPECT_EQ(std::accumulate(uni.begin(), uni.end(), 0u), 16u);
  const auto adv = profile_weights(16, 4, WeightProfile::kAdversarial);
  EXPECT_EQ(std::count(adv.begin(), adv.end(), 4u), 4);
  EXPECT_EQ(std::accumulate(adv.begin(), adv.end(), 0u), 16u);
  const auto heavy = profile_weights(16, 4, WeightProfile::kSingleHeavy);
  EXPECT_EQ(heavy[0], 4u);
  EXPECT_EQ(std::count(heavy.begin(), heavy.end(), 1u), 12);
  EXPECT_THROW(profile_weights(15, 4, WeightProfile::kUniform), DomainError);
  EXPECT_THROW(parse_profile("zipf"), ConfigError);
  EXPECT_EQ(parse_profile("single-heavy"), WeightProfile::kSingleHeavy);
}

TEST(Contention, LoadsStayNearExpectation) {
  const auto uni = contention_sim(256 * 1024, 256, WeightProfile::kUniform, 50, 1);
  EXPECT_EQ(uni.space, 1024u);
  for (auto x : uni.max_load) {
    EXPECT_GE(x, 1024u);
    EXPECT_LE(x, 2048u);
  }
  const auto adv = contention_sim(256 * 1024, 256, WeightProfile::kAdversarial, 200, 2);
  EXPECT_EQ(adv.exceedance.size(), 3u);
  EXPECT_DOUBLE_EQ(adv.exceedance[2].first, 4.0);
  EXPECT_LE(adv.exceedance[2].second, 0.01);
  for (auto x : adv.max_load) EXPECT_EQ(x % 256, 0u);
  // With T = P the heavy ball is the only ball, so the max load is exactly P.
  const auto lone = contention_sim(16, 16, WeightProfile::kSingleHeavy, 20, 4);
  for (auto x : lone.max_load) EXPECT_EQ(x, 16u);
  const auto heavy = contention_sim(256 * 1024, 256, WeightProfile::kSingleHeavy, 50, 3);
  for (auto x : heavy.max_load) EXPECT_GE(x, 256u);
  const auto j = adv.to_json();
  EXPECT_EQ(j.at("P"), 256);
  EXPECT_EQ(j.at("max_load").size(), 200u);
}

TEST(Contention, Deterministic) {
  EXPECT_EQ(contention_sim(4096, 16, WeightProfile::kAdversarial, 20, 9).max_load,
            contention_sim(4096, 16, WeightProfile::kAdversarial, 20, 9).max_load);
}

}  // namespace
}  // namespace ampc::harness
