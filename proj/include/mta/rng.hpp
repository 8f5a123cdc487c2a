#pragma once

#include <cstdint>
#include <random>

namespace mta {

/// Portable pseudo-random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Stream splitting: stream `k` of seed `s` seeds the engine through
/// std::seed_seq with four 32-bit words drawn from SplitMix64 started at
/// mix(s, k), so streams are reproducible regardless of how work is scheduled.
///
/// The std::*_distribution classes are implementation-defined, so the variate
/// transforms below are written out to keep results bit-identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential(double rate);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace mta
