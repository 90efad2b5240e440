#pragma once

// Simulated AMPC execution: machines, rounds, and the generational
// distributed data store (DDS). Round i reads the sealed generation i-1 and
// writes generation i. Every read and write is metered per machine.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ampc/errors.hpp"
#include "ampc/random.hpp"

namespace ampc {

using MachineId = std::uint32_t;
using Word = std::int64_t;

namespace detail {

// n^e rounded, with a guard against pow() landing a hair above an integer.
inline double power(double n, double e) { return std::pow(n, e); }

inline std::uint64_t ceil_power(std::uint64_t n, double e) {
  const double p = power(static_cast<double>(n), e);
  const double r = std::round(p);
  if (std::abs(p - r) <= 1e-9 * std::max(1.0, p)) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::ceil(p));
}

inline std::uint64_t floor_power(std::uint64_t n, double e) {
  const double p = power(static_cast<double>(n), e);
  const double r = std::round(p);
  if (std::abs(p - r) <= 1e-9 * std::max(1.0, p)) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::floor(p));
}

}  // namespace detail

/// Problem sizes and machine parameters of one simulated AMPC run.
struct ModelConfig {
  std::uint64_t n = 0;           // vertices (or list elements)
  std::uint64_t m = 0;           // edges
  std::uint64_t input_size = 0;  // N
  double epsilon = 0.5;
  std::uint64_t space = 2;        // S, per machine
  std::uint64_t machines = 1;     // P
  std::uint64_t total_space = 2;  // T = S * P
  double space_multiplier = 1.0;
  double budget_slack = 16.0;
  std::uint64_t seed = 0;
  bool strict_budget = false;
  // Experiments may leave the rounds charged by MPC primitives out of their
  // round totals.
  bool count_primitive_rounds = true;

  /// S = max(2, ceil(n^eps)), N = n + m, P = ceil(multiplier * N / S).
  static ModelConfig for_problem(std::uint64_t n, std::uint64_t m, double epsilon,
                                 std::uint64_t seed, double space_multiplier = 1.0,
                                 double budget_slack = 16.0) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
      throw ConfigError("epsilon must lie strictly between 0 and 1");
    }
    if (!(space_multiplier >= 1.0)) throw ConfigError("space_multiplier must be >= 1");
    if (!(budget_slack >= 1.0)) throw ConfigError("budget_slack must be >= 1");
    ModelConfig c;
    c.n = n;
    c.m = m;
    c.input_size = std::max<std::uint64_t>(1, n + m);
    c.epsilon = epsilon;
    c.space = std::max<std::uint64_t>(2, detail::ceil_power(std::max<std::uint64_t>(n, 1), epsilon));
    const double wanted = space_multiplier * static_cast<double>(c.input_size);
    c.machines = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::ceil(wanted / static_cast<double>(c.space))));
    c.total_space = c.space * c.machines;
    c.space_multiplier = space_multiplier;
    c.budget_slack = budget_slack;
    c.seed = seed;
    c.validate();
    return c;
  }

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
      throw ConfigError("epsilon must lie strictly between 0 and 1");
    }
    if (space < 2) throw ConfigError("space_S must be at least 2");
    if (machines < 1) throw ConfigError("machines_P must be at least 1");
    if (total_space != space * machines) throw ConfigError("total_T must equal S * P");
    if (total_space < input_size) throw ConfigError("total space is smaller than the input");
    if (!(space_multiplier >= 1.0)) throw ConfigError("space_multiplier must be >= 1");
    if (!(budget_slack >= 1.0)) throw ConfigError("budget_slack must be >= 1");
  }

  /// Per-machine, per-round limit on queries and on writes.
  std::uint64_t budget() const {
    return static_cast<std::uint64_t>(std::floor(budget_slack * static_cast<double>(space)));
  }

  /// ceil(1/eps): rounds charged for sort, filter, prefix sums and friends.
  std::int64_t primitive_rounds() const {
    return static_cast<std::int64_t>(std::ceil(1.0 / epsilon - 1e-12));
  }
};

// ---------------------------------------------------------------------------
// Data store

struct Key {
  std::uint32_t table = 0;
  std::uint64_t id = 0;

  friend bool operator==(const Key&, const Key&) = default;
  friend auto operator<=>(const Key&, const Key&) = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    return static_cast<std::size_t>(splitmix64(k.id ^ (static_cast<std::uint64_t>(k.table) << 48)));
  }
};

/// A constant-size value: at most four machine words.
class Record {
 public:
  static constexpr std::size_t kMaxWords = 4;

  Record() = default;
  Record(std::initializer_list<Word> words) : Record(std::span<const Word>(words.begin(), words.size())) {}
  explicit Record(std::span<const Word> words) {
    if (words.size() > kMaxWords) {
      throw CapacityError("record of " + std::to_string(words.size()) +
                          " words exceeds the constant-size limit of 4");
    }
    std::copy(words.begin(), words.end(), words_.begin());
    size_ = static_cast<std::uint8_t>(words.size());
  }

  std::size_t size() const { return size_; }
  Word operator[](std::size_t i) const { return words_[i]; }
  std::span<const Word> words() const { return {words_.data(), size_}; }

  friend bool operator==(const Record& a, const Record& b) {
    return a.size_ == b.size_ && std::equal(a.words_.begin(), a.words_.begin() + a.size_, b.words_.begin());
  }

 private:
  std::array<Word, kMaxWords> words_{};
  std::uint8_t size_ = 0;
};

/// One sealed DDS generation. Values under a key keep the canonical merge
/// order (writing machine id, then per-machine write sequence).
class Generation {
 public:
  Generation() = default;

  std::uint64_t index() const { return index_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  /// Number of values stored under `key`.
  std::size_t count(const Key& key) const {
    auto it = slots_.find(key);
    return it == slots_.end() ? 0 : it->second.second;
  }

  /// The `index`-th value (1-based) under `key`, or empty.
  std::optional<Record> find(const Key& key, std::uint64_t index = 1) const {
    auto it = slots_.find(key);
    if (it == slots_.end() || index == 0 || index > it->second.second) return std::nullopt;
    return values_[it->second.first + index - 1];
  }

  std::span<const Record> values(const Key& key) const {
    auto it = slots_.find(key);
    if (it == slots_.end()) return {};
    return {values_.data() + it->second.first, it->second.second};
  }

  /// Keys in ascending order.
  std::vector<Key> keys() const {
    std::vector<Key> out;
    out.reserve(slots_.size());
    for (const auto& [k, _] : slots_) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Order-independent fingerprint of the full contents, for determinism checks.
  std::uint64_t digest() const {
    std::uint64_t h = splitmix64(index_);
    for (const Key& k : keys()) {
      h = splitmix64(h ^ k.table);
      h = splitmix64(h ^ k.id);
      for (const Record& r : values(k)) {
        h = splitmix64(h ^ r.size());
        for (Word w : r.words()) h = splitmix64(h ^ static_cast<std::uint64_t>(w));
      }
    }
    return h;
  }

 private:
  friend class Simulator;

  using Write = std::pair<Key, Record>;

  // Buffers are visited in machine order, each in write order.
  static Generation seal(std::uint64_t index, std::span<const std::vector<Write>> buffers) {
    Generation g;
    g.index_ = index;
    std::size_t total = 0;
    for (const auto& b : buffers) total += b.size();
    g.values_.resize(total);
    g.slots_.reserve(total);
    for (const auto& b : buffers) {
      for (const auto& [k, _] : b) ++g.slots_[k].second;
    }
    std::size_t offset = 0;
    for (auto& [k, slot] : g.slots_) {
      slot.first = offset;
      offset += slot.second;
      slot.second = 0;
    }
    for (const auto& b : buffers) {
      for (const auto& [k, r] : b) {
        auto& slot = g.slots_[k];
        g.values_[slot.first + slot.second++] = r;
      }
    }
    return g;
  }

  std::uint64_t index_ = 0;
  std::vector<Record> values_;
  std::unordered_map<Key, std::pair<std::size_t, std::size_t>, KeyHash> slots_;
};

// ---------------------------------------------------------------------------
// Metrics

struct RoundMetrics {
  std::uint64_t round = 0;
  std::string label;
  std::vector<std::uint64_t> queries_per_machine;
  std::vector<std::uint64_t> writes_per_machine;
  std::uint64_t max_queries = 0;
  std::uint64_t max_writes = 0;
  std::uint64_t total_communication = 0;
  std::vector<MachineId> violations;  // machines over budget

  nlohmann::json to_json() const {
    return nlohmann::json{{"round", round},
                          {"label", label},
                          {"max_queries", max_queries},
                          {"max_writes", max_writes},
                          {"total_communication", total_communication},
                          {"machines", queries_per_machine.size()}};
  }
};

/// Cost charged by a centrally computed MPC primitive.
struct Charge {
  std::int64_t rounds = 0;
  std::int64_t communication = 0;
};

struct ChargeEntry {
  std::string label;
  Charge charge;
};

/// Roll-up of one simulator's history.
struct RunSummary {
  std::uint64_t executed_rounds = 0;
  std::int64_t charged_rounds = 0;
  std::uint64_t rounds = 0;  // executed + charged (when counted)
  std::uint64_t max_queries = 0;
  std::uint64_t max_writes = 0;
  std::uint64_t total_communication = 0;
  std::uint64_t budget = 0;
  std::uint64_t violations = 0;
};

// ---------------------------------------------------------------------------
// Machines

/// The view a simulated machine has of one round: read-only previous
/// generation, a private write buffer, a private RNG and its counters.
class MachineContext {
 public:
  MachineContext(MachineId id, std::uint64_t round, std::uint64_t seed, const Generation& previous,
                 std::vector<std::pair<Key, Record>>& buffer)
      : id_(id),
        round_(round),
        rng_(hash_coin(seed, Stream::kMachine, round, id)),
        previous_(&previous),
        buffer_(&buffer) {}

  MachineId id() const { return id_; }
  std::uint64_t round() const { return round_; }
  SplitMix64& rng() { return rng_; }

  /// Query for a key; a key holding several values answers with the first.
  std::optional<Record> query(const Key& key) { return query(key, 1); }

  /// Query for (key, index), 1-based.
  std::optional<Record> query(const Key& key, std::uint64_t index) {
    ++queries_;
    return previous_->find(key, index);
  }

  void write(const Key& key, Record value) {
    ++writes_;
    buffer_->emplace_back(key, value);
  }
  void write(const Key& key, std::initializer_list<Word> words) { write(key, Record(words)); }

  std::uint64_t queries() const { return queries_; }
  std::uint64_t writes() const { return writes_; }

 private:
  MachineId id_;
  std::uint64_t round_;
  SplitMix64 rng_;
  const Generation* previous_;
  std::vector<std::pair<Key, Record>>* buffer_;
  std::uint64_t queries_ = 0;
  std::uint64_t writes_ = 0;
};

/// Maps each item independently and uniformly to a machine. The choice is a
/// function of (seed, round, item) only.
inline std::vector<MachineId> assign_to_machines(std::span<const std::uint64_t> items,
                                                 const ModelConfig& config, std::uint64_t round) {
  std::vector<MachineId> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    out[i] = static_cast<MachineId>(
        bounded(hash_coin(config.seed, Stream::kMachineAssignment, round, items[i]), config.machines));
  }
  return out;
}

class Simulator {
 public:
  explicit Simulator(ModelConfig config) : config_(std::move(config)) { config_.validate(); }

  const ModelConfig& config() const { return config_; }
  const Generation& store() const { return current_; }
  /// Number of rounds executed so far; the next round has this index + 1.
  std::uint64_t round() const { return current_.index(); }

  /// Runs `program(MachineContext&)` once per machine against the sealed
  /// generation, then seals the union of all writes as the next generation.
  template <class Program>
  const RoundMetrics& run_round(std::string_view label, Program&& program) {
    const std::uint64_t next = current_.index() + 1;
    const std::size_t p = config_.machines;
    std::vector<std::vector<std::pair<Key, Record>>> buffers(p);
    RoundMetrics metrics;
    metrics.round = next;
    metrics.label = std::string(label);
    metrics.queries_per_machine.assign(p, 0);
    metrics.writes_per_machine.assign(p, 0);
    for (std::size_t id = 0; id < p; ++id) {
      MachineContext ctx(static_cast<MachineId>(id), next, config_.seed, current_, buffers[id]);
      program(ctx);
      metrics.queries_per_machine[id] = ctx.queries();
      metrics.writes_per_machine[id] = ctx.writes();
    }
    return finish(std::move(metrics), buffers);
  }

  /// Distributes `items` uniformly at random over the machines and runs
  /// `fn(MachineContext&, item)` for every item on its machine.
  template <class Fn>
  const RoundMetrics& run_items(std::string_view label, std::span<const std::uint64_t> items, Fn&& fn) {
    const std::uint64_t next = current_.index() + 1;
    const auto owner = assign_to_machines(items, config_, next);
    std::vector<std::size_t> start(config_.machines + 1, 0);
    for (MachineId m : owner) ++start[m + 1];
    for (std::size_t i = 1; i < start.size(); ++i) start[i] += start[i - 1];
    std::vector<std::uint64_t> order(items.size());
    {
      auto fill = start;
      for (std::size_t i = 0; i < items.size(); ++i) order[fill[owner[i]]++] = items[i];
    }
    return run_round(label, [&](MachineContext& ctx) {
      for (std::size_t i = start[ctx.id()]; i < start[ctx.id() + 1]; ++i) fn(ctx, order[i]);
    });
  }

  /// Convenience for items 0..count-1.
  template <class Fn>
  const RoundMetrics& run_range(std::string_view label, std::uint64_t count, Fn&& fn) {
    std::vector<std::uint64_t> items(count);
    for (std::uint64_t i = 0; i < count; ++i) items[i] = i;
    return run_items(label, items, std::forward<Fn>(fn));
  }

  void charge(std::string_view label, Charge c) {
    charges_.push_back({std::string(label), c});
    charged_rounds_ += c.rounds;
    charged_communication_ += c.communication;
  }

  const std::vector<RoundMetrics>& rounds() const { return history_; }
  const std::vector<ChargeEntry>& charges() const { return charges_; }
  std::int64_t charged_rounds() const { return charged_rounds_; }

  RunSummary summary() const {
    RunSummary s;
    s.executed_rounds = history_.size();
    s.charged_rounds = charged_rounds_;
    s.rounds = s.executed_rounds +
               (config_.count_primitive_rounds ? static_cast<std::uint64_t>(charged_rounds_) : 0);
    s.budget = config_.budget();
    s.total_communication = static_cast<std::uint64_t>(charged_communication_);
    for (const auto& r : history_) {
      s.max_queries = std::max(s.max_queries, r.max_queries);
      s.max_writes = std::max(s.max_writes, r.max_writes);
      s.total_communication += r.total_communication;
      s.violations += r.violations.size();
    }
    return s;
  }

  /// One JSON line per executed round.
  std::string metrics_jsonl() const {
    std::string out;
    for (const auto& r : history_) {
      out += r.to_json().dump();
      out += '\n';
    }
    return out;
  }

 private:
  const RoundMetrics& finish(RoundMetrics metrics,
                             std::span<const std::vector<std::pair<Key, Record>>> buffers) {
    const std::uint64_t limit = config_.budget();
    for (std::size_t id = 0; id < metrics.queries_per_machine.size(); ++id) {
      const auto q = metrics.queries_per_machine[id];
      const auto w = metrics.writes_per_machine[id];
      metrics.max_queries = std::max(metrics.max_queries, q);
      metrics.max_writes = std::max(metrics.max_writes, w);
      metrics.total_communication += q + w;
      if (q > limit || w > limit) metrics.violations.push_back(static_cast<MachineId>(id));
    }
    current_ = Generation::seal(metrics.round, buffers);
    history_.push_back(std::move(metrics));
    const RoundMetrics& r = history_.back();
    if (config_.strict_budget && !r.violations.empty()) {
      const MachineId bad = r.violations.front();
      throw BudgetViolation("round " + std::to_string(r.round) + " (" + r.label + "): machine " +
                                std::to_string(bad) + " made " +
                                std::to_string(r.queries_per_machine[bad]) + " queries and " +
                                std::to_string(r.writes_per_machine[bad]) + " writes; budget is " +
                                std::to_string(limit),
                            bad);
    }
    return r;
  }

  ModelConfig config_;
  Generation current_;
  std::vector<RoundMetrics> history_;
  std::vector<ChargeEntry> charges_;
  std::int64_t charged_rounds_ = 0;
  std::int64_t charged_communication_ = 0;
};

}  // namespace ampc
