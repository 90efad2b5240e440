#pragma once

#include <cstdint>
#include <limits>

namespace ampc {

// Counter-based randomness. Every random decision in the library is a pure
// function of (seed, stream, round, item) so results never depend on the
// order machines are simulated in.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

enum class Stream : std::uint64_t {
  kMachineAssignment = 1,
  kMachine = 2,
  kVertexSample = 3,
  kPriority = 4,
  kLeader = 5,
  kEdgeSample = 6,
  kGenerator = 7,
  kWeights = 8,
  kContention = 9,
};

constexpr std::uint64_t hash_coin(std::uint64_t seed, Stream stream,
                                  std::uint64_t round, std::uint64_t item) {
  std::uint64_t h = splitmix64(seed ^ 0x5851F42D4C957F2DULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ round);
  return splitmix64(h ^ item);
}

/// Uniform double in [0, 1) from 53 high bits.
constexpr double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by multiply-shift.
constexpr std::uint64_t bounded(std::uint64_t bits, std::uint64_t bound) {
  __extension__ using u128 = unsigned __int128;
  return static_cast<std::uint64_t>((static_cast<u128>(bits) * bound) >> 64);
}

constexpr bool bernoulli(std::uint64_t bits, double p) {
  return unit_interval(bits) < p;
}

/// SplitMix64 as a UniformRandomBitGenerator; used for per-machine streams
/// and by the instance generators.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t below(std::uint64_t bound) {
    return bounded((*this)(), bound);
  }
  constexpr double uniform() { return unit_interval((*this)()); }

 private:
  std::uint64_t state_;
};

}  // namespace ampc
