#pragma once

// Experiment driver: builds seeded instances, runs one algorithm per trial
// on a fresh simulator, checks the answer against a sequential reference,
// and reports per-trial records (JSON lines) plus a CSV summary. Also hosts
// the balls-into-bins contention simulation.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "ampc/biconnectivity.hpp"
#include "ampc/connectivity.hpp"
#include "ampc/contraction.hpp"
#include "ampc/errors.hpp"
#include "ampc/graph.hpp"
#include "ampc/mis.hpp"
#include "ampc/oracles.hpp"
#include "ampc/random.hpp"
#include "ampc/runtime.hpp"
#include "ampc/trees.hpp"

namespace ampc::harness {

inline const std::vector<std::string>& algorithms() {
  static const std::vector<std::string> ids = {"two-cycle",  "mis",       "connectivity", "msf",     "spanning-forest",
                                               "forest-conn", "list-rank", "tree-ops",     "bridges", "2ecc"};
  return ids;
}

struct ExperimentSpec {
  std::string algorithm = "connectivity";
  std::size_t n = 1024;
  std::size_t m = 0;       // 0: 4n, clamped to the number of vertex pairs
  int pieces = 1;          // two-cycle: one or two cycles
  std::size_t trees = 1;   // forest-conn, tree-ops, list-rank: trees or lists
  double epsilon = 0.5;
  double space_multiplier = 1.0;
  double budget_slack = 16.0;
  bool strict_budget = false;
  bool strict_leaders = false;
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  bool wall_time = false;  // off by default so reports are reproducible
  std::size_t threads = 1;

  /// Edge count actually used for graph instances.
  std::size_t edges() const {
    const std::size_t pairs = n < 2 ? 0 : n * (n - 1) / 2;
    return std::min(m == 0 ? 4 * n : m, pairs);
  }

  void validate() const {
    if (std::find(algorithms().begin(), algorithms().end(), algorithm) == algorithms().end()) {
      throw ConfigError("unknown algorithm '" + algorithm + "'");
    }
    if (trials < 1) throw ConfigError("trial count must be at least 1");
    if (n < 1) throw ConfigError("n must be at least 1");
    if (threads < 1) throw ConfigError("thread count must be at least 1");
    if (algorithm == "two-cycle") {
      if (pieces != 1 && pieces != 2) throw ConfigError("two-cycle needs one or two pieces");
      if (pieces == 1 && n < 3) throw ConfigError("a single cycle needs n >= 3");
      if (pieces == 2 && (n < 6 || n % 2 != 0)) throw ConfigError("two cycles need an even n >= 6");
    }
    if (trees < 1 || trees > n) throw ConfigError("tree count must lie in [1, n]");
    if (m > 0 && n >= 2 && m > n * (n - 1) / 2) throw ConfigError("more edges than vertex pairs");
    // Trips the same checks the model configuration applies.
    (void)ModelConfig::for_problem(n, edges(), epsilon, seed, space_multiplier, budget_slack);
  }

  nlohmann::json to_json() const {
    return {{"algorithm", algorithm}, {"n", n},
            {"m", edges()},           {"pieces", pieces},
            {"trees", trees},         {"epsilon", epsilon},
            {"space_multiplier", space_multiplier}, {"budget_slack", budget_slack},
            {"strict_budget", strict_budget},       {"strict_leaders", strict_leaders},
            {"seed", seed},           {"trials", trials}};
  }
};

struct TrialRecord {
  std::string algorithm;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  double epsilon = 0;
  bool correct = false;
  std::uint64_t rounds = 0;
  std::uint64_t executed_rounds = 0;
  std::uint64_t max_queries_per_machine = 0;
  std::uint64_t max_writes_per_machine = 0;
  std::uint64_t budget = 0;
  std::uint64_t violations = 0;
  std::uint64_t total_communication = 0;
  std::uint64_t retries = 0;
  std::string error;
  nlohmann::json detail = nlohmann::json::object();
  std::optional<double> wall_time;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"algorithm", algorithm},
                        {"trial", trial},
                        {"seed", seed},
                        {"n", n},
                        {"m", m},
                        {"epsilon", epsilon},
                        {"correct", correct},
                        {"rounds", rounds},
                        {"executed_rounds", executed_rounds},
                        {"max_queries_per_machine", max_queries_per_machine},
                        {"max_writes_per_machine", max_writes_per_machine},
                        {"budget", budget},
                        {"violations", violations},
                        {"total_communication", total_communication},
                        {"retries", retries},
                        {"detail", detail}};
    if (!error.empty()) j["error"] = error;
    if (wall_time) j["wall_time"] = *wall_time;
    return j;
  }

  static TrialRecord from_json(const nlohmann::json& j) {
    TrialRecord r;
    r.algorithm = j.at("algorithm").get<std::string>();
    r.trial = j.at("trial").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n = j.at("n").get<std::size_t>();
    r.m = j.at("m").get<std::size_t>();
    r.epsilon = j.at("epsilon").get<double>();
    r.correct = j.at("correct").get<bool>();
    r.rounds = j.at("rounds").get<std::uint64_t>();
    r.executed_rounds = j.at("executed_rounds").get<std::uint64_t>();
    r.max_queries_per_machine = j.at("max_queries_per_machine").get<std::uint64_t>();
    r.max_writes_per_machine = j.at("max_writes_per_machine").get<std::uint64_t>();
    r.budget = j.at("budget").get<std::uint64_t>();
    r.violations = j.at("violations").get<std::uint64_t>();
    r.total_communication = j.at("total_communication").get<std::uint64_t>();
    r.retries = j.at("retries").get<std::uint64_t>();
    r.detail = j.at("detail");
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    if (j.contains("wall_time")) r.wall_time = j.at("wall_time").get<double>();
    return r;
  }
};

struct ExperimentSummary {
  std::string algorithm;
  std::size_t n = 0;
  std::size_t m = 0;
  double epsilon = 0;
  std::size_t trials = 0;
  std::size_t correct = 0;
  double mean_rounds = 0;
  std::uint64_t max_rounds = 0;
  std::uint64_t p99_max_queries = 0;
  std::uint64_t max_queries = 0;
  std::uint64_t budget = 0;
  std::uint64_t violations = 0;
  double mean_communication = 0;

  friend bool operator==(const ExperimentSummary&, const ExperimentSummary&) = default;

  static std::string csv_header() {
    return "algorithm,n,m,epsilon,trials,correct,mean_rounds,max_rounds,p99_max_queries,max_queries,budget,"
           "violations,mean_communication";
  }

  std::string csv_row() const {
    std::ostringstream out;
    out << algorithm << ',' << n << ',' << m << ',' << epsilon << ',' << trials << ',' << correct << ','
        << mean_rounds << ',' << max_rounds << ',' << p99_max_queries << ',' << max_queries << ',' << budget << ','
        << violations << ',' << mean_communication;
    return out.str();
  }
};

/// Folds records one at a time; result() matches summarize() on the same
/// records.
class SummaryAccumulator {
 public:
  void add(const TrialRecord& r) {
    if (s_.trials == 0) {
      s_.algorithm = r.algorithm;
      s_.n = r.n;
      s_.m = r.m;
      s_.epsilon = r.epsilon;
      s_.budget = r.budget;
    }
    ++s_.trials;
    s_.correct += r.correct;
    rounds_sum_ += r.rounds;
    s_.max_rounds = std::max(s_.max_rounds, r.rounds);
    s_.max_queries = std::max(s_.max_queries, r.max_queries_per_machine);
    s_.violations += r.violations;
    communication_sum_ += r.total_communication;
    queries_.push_back(r.max_queries_per_machine);
  }

  ExperimentSummary result() const {
    ExperimentSummary out = s_;
    if (out.trials == 0) return out;
    const double k = static_cast<double>(out.trials);
    out.mean_rounds = static_cast<double>(rounds_sum_) / k;
    out.mean_communication = static_cast<double>(communication_sum_) / k;
    std::vector<std::uint64_t> q = queries_;
    std::sort(q.begin(), q.end());
    // Nearest-rank percentile.
    const auto idx = static_cast<std::size_t>(std::ceil(0.99 * k)) - 1;
    out.p99_max_queries = q[std::min(idx, q.size() - 1)];
    return out;
  }

 private:
  ExperimentSummary s_;
  std::uint64_t rounds_sum_ = 0;
  std::uint64_t communication_sum_ = 0;
  std::vector<std::uint64_t> queries_;
};

inline ExperimentSummary summarize(const std::vector<TrialRecord>& records) {
  SummaryAccumulator acc;
  for (const auto& r : records) acc.add(r);
  return acc.result();
}

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<TrialRecord> records;  // by trial index
  ExperimentSummary summary;

  bool all_correct() const {
    return std::all_of(records.begin(), records.end(), [](const TrialRecord& r) { return r.correct; });
  }

  std::string jsonl() const {
    std::string out;
    for (const auto& r : records) {
      out += r.to_json().dump();
      out += '\n';
    }
    return out;
  }
};

namespace detail {

struct Outcome {
  bool correct = false;
  nlohmann::json detail = nlohmann::json::object();
};

/// Random disjoint lists over 0..n-1: a shuffled order cut into `lists`
/// nonempty runs.
inline std::pair<std::vector<Vertex>, std::vector<Vertex>> random_lists(std::size_t n, std::size_t lists,
                                                                        std::uint64_t seed) {
  SplitMix64 rng(hash_coin(seed, Stream::kGenerator, 0, n));
  const auto order = ampc::detail::random_permutation(n, rng);
  std::vector<Vertex> successor(n, kNoVertex), heads;
  const std::size_t len = n / lists;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t list = std::min(i / len, lists - 1);
    const bool first = i == 0 || std::min((i - 1) / len, lists - 1) != list;
    if (first) heads.push_back(order[i]);
    if (i + 1 < n && std::min((i + 1) / len, lists - 1) == list) successor[order[i]] = order[i + 1];
  }
  return {std::move(successor), std::move(heads)};
}

inline bool check_tree_ops(const Graph& forest, Simulator& sim, nlohmann::json& detail) {
  const RootedTree t = root_forest(forest, sim);
  const auto pn = preorder_number(t, sim);
  const auto size = subtree_sizes(t, sim);
  const auto want = oracle::seq_dfs_tree(forest, t.forest.roots);
  std::vector<Vertex> parent = t.forest.parent;
  for (Vertex r : t.forest.roots) parent[r] = r;
  std::vector<Vertex> want_parent = want.parent;
  bool ok = parent == want_parent && pn == want.preorder && size == want.size;
  // Subtree min/max of a seeded value against a walk over each subtree.
  std::vector<std::int64_t> values(forest.n());
  for (Vertex v = 0; v < forest.n(); ++v) {
    values[v] = static_cast<std::int64_t>(hash_coin(sim.config().seed, Stream::kGenerator, 1, v) % 1000003);
  }
  const auto got = SubtreeMinMax(t, values, sim).query_all(sim);
  std::vector<std::int64_t> lo(values), hi(values);
  std::vector<Vertex> by_depth(forest.n());
  std::iota(by_depth.begin(), by_depth.end(), Vertex{0});
  // Children before parents: descending preorder within each tree.
  std::sort(by_depth.begin(), by_depth.end(), [&](Vertex a, Vertex b) { return want.preorder[a] > want.preorder[b]; });
  for (Vertex v : by_depth) {
    const Vertex p = want.parent[v];
    if (p == v) continue;
    lo[p] = std::min(lo[p], lo[v]);
    hi[p] = std::max(hi[p], hi[v]);
  }
  for (Vertex v = 0; v < forest.n(); ++v) ok = ok && got[v].first == lo[v] && got[v].second == hi[v];
  detail["list_iterations"] = t.list_iterations;
  return ok;
}

inline Outcome run_trial(const ExperimentSpec& spec, Simulator& sim, std::uint64_t seed) {
  Outcome out;
  const std::string& a = spec.algorithm;
  ConnectivityOptions opts;
  opts.strict_leaders = spec.strict_leaders;
  if (a == "two-cycle") {
    const Graph g = gen_cycles(spec.n, spec.pieces, seed);
    const auto r = two_cycle(g, sim);
    out.correct = r.cycles == spec.pieces;
    out.detail = {{"cycles", r.cycles}, {"shrink_iterations", r.shrink_iterations}, {"residual", r.residual}};
  } else if (a == "mis") {
    const Graph g = gen_random_graph(spec.n, spec.edges(), seed);
    const auto r = maximal_independent_set(g, sim);
    out.correct = r.members == lfmis_oracle(g, r.order.rank);
    out.detail = {{"iterations", r.iterations}, {"size", r.members.size()}};
  } else if (a == "connectivity") {
    const Graph g = gen_random_graph(spec.n, spec.edges(), seed);
    const auto r = connectivity(g, sim, opts);
    out.correct = oracle::same_partition(r.labels.label, oracle::uf_components(g)).match;
    std::size_t leaderless = 0;
    for (const auto& p : r.phases) leaderless += p.leaderless;
    out.detail = {{"iterations", r.iterations},
                  {"reduction_steps", r.reduction.size()},
                  {"leaderless", leaderless},
                  {"components", r.labels.count()}};
  } else if (a == "msf") {
    const Graph g = gen_random_graph(spec.n, spec.edges(), seed, true);
    const auto r = msf(g, sim, opts);
    auto want = oracle::kruskal_msf(g);
    std::sort(want.begin(), want.end());
    out.correct = r.edges == want;
    out.detail = {{"iterations", r.iterations}, {"reduction_steps", r.reduction.size()}, {"edges", r.edges.size()}};
  } else if (a == "spanning-forest") {
    const Graph g = gen_random_graph(spec.n, spec.edges(), seed);
    const auto r = spanning_forest(g, sim, opts);
    const auto want = oracle::uf_components(g);
    std::vector<Edge> chosen;
    for (std::uint32_t e : r.edges) chosen.push_back(g.edge(e));
    const Graph forest(g.n(), std::move(chosen));
    out.correct = r.edges.size() + oracle::count_components(want) == g.n() &&
                  oracle::same_partition(oracle::uf_components(forest), want).match &&
                  oracle::same_partition(r.labels.label, want).match;
    out.detail = {{"edges", r.edges.size()}};
  } else if (a == "forest-conn") {
    const Graph g = gen_random_forest(spec.n, spec.trees, seed);
    const auto label = forest_connectivity(g, sim);
    out.correct = oracle::same_partition(label, oracle::uf_components(g)).match;
    out.detail = {{"trees", spec.trees}};
  } else if (a == "list-rank") {
    const auto [successor, heads] = random_lists(spec.n, spec.trees, seed);
    const auto r = rank_lists(successor, heads, sim);
    bool ok = true;
    for (Vertex h : heads) {
      const auto want = oracle::seq_list_rank(successor, h);
      for (Vertex v = 0; v < spec.n; ++v) {
        if (want[v] != UINT64_MAX) ok = ok && r.rank[v] == want[v] && r.head[v] == h;
      }
    }
    out.correct = ok;
    out.detail = {{"iterations", r.iterations}, {"lists", heads.size()}};
  } else if (a == "tree-ops") {
    const Graph g = gen_random_forest(spec.n, spec.trees, seed);
    out.correct = check_tree_ops(g, sim, out.detail);
  } else if (a == "bridges") {
    const Graph g = gen_random_graph(spec.n, spec.edges(), seed);
    const auto bc = bc_labeling(g, sim, opts);
    const auto want = oracle::tarjan_bridges_aps(g);
    const auto got_bridges = bridges(bc);
    const auto got_points = articulation_points(bc);
    out.correct = got_bridges == want.bridges && got_points == want.articulation;
    out.detail = {{"bridges", got_bridges.size()}, {"articulation_points", got_points.size()}};
  } else if (a == "2ecc") {
    const Graph g = gen_random_graph(spec.n, spec.edges(), seed);
    const auto label = two_edge_components(g, sim, opts);
    out.correct = oracle::same_partition(label.label, oracle::two_edge_components(g)).match;
    out.detail = {{"components", label.count()}};
  }
  return out;
}

inline std::size_t instance_edges(const ExperimentSpec& spec) {
  const std::string& a = spec.algorithm;
  if (a == "two-cycle") return spec.n;
  if (a == "forest-conn" || a == "tree-ops") return spec.n - spec.trees;
  if (a == "list-rank") return spec.n - spec.trees;
  return spec.edges();
}

}  // namespace detail

/// Runs trial `index` of an experiment. Trial seeds are spec.seed + index; a
/// leader-sampling failure (strict mode only) reruns the trial on the next
/// seed derived from it.
inline TrialRecord run_trial(const ExperimentSpec& spec, std::size_t index) {
  TrialRecord rec;
  rec.algorithm = spec.algorithm;
  rec.trial = index;
  rec.seed = spec.seed + index;
  rec.n = spec.n;
  rec.m = detail::instance_edges(spec);
  rec.epsilon = spec.epsilon;
  const auto start = std::chrono::steady_clock::now();
  constexpr std::uint64_t kMaxRetries = 8;
  for (std::uint64_t attempt = 0;; ++attempt) {
    ModelConfig cfg = ModelConfig::for_problem(spec.n, rec.m, spec.epsilon,
                                               attempt == 0 ? rec.seed : hash_coin(rec.seed, Stream::kLeader, attempt, 0),
                                               spec.space_multiplier, spec.budget_slack);
    cfg.strict_budget = spec.strict_budget;
    Simulator sim(cfg);
    try {
      const auto outcome = detail::run_trial(spec, sim, rec.seed);
      rec.correct = outcome.correct;
      rec.detail = outcome.detail;
      rec.error.clear();
    } catch (const LeaderSamplingFailure& e) {
      if (attempt + 1 < kMaxRetries) {
        ++rec.retries;
        continue;
      }
      rec.correct = false;
      rec.error = e.what();
    } catch (const Error& e) {
      rec.correct = false;
      rec.error = e.what();
    }
    const RunSummary s = sim.summary();
    rec.rounds = s.rounds;
    rec.executed_rounds = s.executed_rounds;
    rec.max_queries_per_machine = s.max_queries;
    rec.max_writes_per_machine = s.max_writes;
    rec.budget = s.budget;
    rec.violations = s.violations;
    rec.total_communication = s.total_communication;
    break;
  }
  if (spec.wall_time) {
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return rec;
}

inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentReport report;
  report.spec = spec;
  report.records.resize(spec.trials);
  const std::size_t workers = std::min(spec.threads, spec.trials);
  if (workers <= 1) {
    for (std::size_t i = 0; i < spec.trials; ++i) report.records[i] = run_trial(spec, i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < spec.trials; i = next++) report.records[i] = run_trial(spec, i);
      });
    }
    for (auto& t : pool) t.join();
  }
  report.summary = summarize(report.records);
  return report;
}

/// n in {2^10, 2^12, 2^14} by eps in {0.4, 0.5, 0.66}; two-cycle also
/// crosses pieces in {1, 2}.
inline std::vector<ExperimentSpec> default_grid(const std::string& algorithm, std::size_t trials = 100,
                                                std::uint64_t seed = 1) {
  std::vector<ExperimentSpec> out;
  for (std::size_t n : {std::size_t{1} << 10, std::size_t{1} << 12, std::size_t{1} << 14}) {
    for (double eps : {0.4, 0.5, 0.66}) {
      for (int pieces : {1, 2}) {
        if (pieces == 2 && algorithm != "two-cycle") continue;
        ExperimentSpec s;
        s.algorithm = algorithm;
        s.n = n;
        s.epsilon = eps;
        s.pieces = pieces;
        s.trees = std::max<std::size_t>(1, n / 256);
        s.trials = trials;
        s.seed = seed;
        out.push_back(s);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Contention

enum class WeightProfile { kUniform, kAdversarial, kSingleHeavy };

inline WeightProfile parse_profile(const std::string& name) {
  if (name == "uniform") return WeightProfile::kUniform;
  if (name == "adversarial") return WeightProfile::kAdversarial;
  if (name == "single-heavy") return WeightProfile::kSingleHeavy;
  throw ConfigError("unknown weight profile '" + name + "'");
}

/// T ball weights in [0, P] summing to T.
///   uniform:      every ball weighs 1
///   adversarial:  T/P balls weigh P, the rest 0
///   single-heavy: one ball weighs P, T - P balls weigh 1, the rest 0
inline std::vector<std::uint32_t> profile_weights(std::uint64_t total, std::uint64_t bins, WeightProfile profile) {
  if (bins < 1 || total < 1) throw DomainError("contention needs at least one ball and one bin");
  if (total % bins != 0) throw DomainError("total weight must be a multiple of the bin count");
  if (bins > std::numeric_limits<std::uint32_t>::max()) throw DomainError("too many bins");
  std::vector<std::uint32_t> w(total, 0);
  switch (profile) {
    case WeightProfile::kUniform:
      std::fill(w.begin(), w.end(), 1);
      break;
    case WeightProfile::kAdversarial:
      std::fill(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(total / bins), static_cast<std::uint32_t>(bins));
      break;
    case WeightProfile::kSingleHeavy:
      if (total < bins) throw DomainError("a ball of weight P needs T >= P");
      w[0] = static_cast<std::uint32_t>(bins);
      std::fill(w.begin() + 1, w.begin() + 1 + static_cast<std::ptrdiff_t>(total - bins), 1);
      break;
  }
  return w;
}

struct ContentionReport {
  std::uint64_t total = 0;  // T
  std::uint64_t bins = 0;   // P
  std::uint64_t space = 0;  // S = T / P, the expected load of a bin
  std::vector<std::uint64_t> max_load;  // per trial
  std::vector<std::pair<double, double>> exceedance;  // (c, fraction of trials with max load > c S)

  nlohmann::json to_json() const {
    nlohmann::json ex = nlohmann::json::array();
    for (const auto& [c, f] : exceedance) ex.push_back({{"c", c}, {"fraction", f}});
    return {{"T", total}, {"P", bins}, {"S", space}, {"max_load", max_load}, {"exceedance", ex}};
  }
};

/// Throws each ball into a uniform bin, `trials` times, and records the
/// heaviest bin per trial.
inline ContentionReport contention_sim(std::uint64_t total, std::uint64_t bins, WeightProfile profile,
                                       std::size_t trials, std::uint64_t seed,
                                       std::vector<double> thresholds = {1.0, 2.0, 4.0}) {
  const auto weights = profile_weights(total, bins, profile);
  std::vector<std::pair<std::uint64_t, std::uint32_t>> balls;  // (index, weight), zero weights dropped
  for (std::uint64_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0) balls.emplace_back(i, weights[i]);
  }
  ContentionReport r;
  r.total = total;
  r.bins = bins;
  r.space = total / bins;
  std::vector<std::uint64_t> load(bins);
  for (std::size_t t = 0; t < trials; ++t) {
    std::fill(load.begin(), load.end(), 0);
    for (const auto& [i, w] : balls) load[bounded(hash_coin(seed, Stream::kContention, t, i), bins)] += w;
    r.max_load.push_back(*std::max_element(load.begin(), load.end()));
  }
  for (double c : thresholds) {
    const auto over = std::count_if(r.max_load.begin(), r.max_load.end(),
                                    [&](std::uint64_t x) { return static_cast<double>(x) > c * static_cast<double>(r.space); });
    r.exceedance.emplace_back(c, trials == 0 ? 0.0 : static_cast<double>(over) / static_cast<double>(trials));
  }
  return r;
}

}  // namespace ampc::harness
