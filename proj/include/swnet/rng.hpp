#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace swnet {

/// SplitMix64 step (Steele, Lea, Flood 2014). Used only to derive stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for the stream addressed by `path` under `master`. Order-independent across
/// replications: the result depends only on (master, path).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Replication stream: std::mt19937_64 seeded from a derived seed. Conversions to
/// doubles and bounded integers are done here rather than through <random>
/// distributions so that outputs are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n), rejection sampled.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace swnet
