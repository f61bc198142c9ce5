#pragma once

#include <cstdint>
#include <random>

namespace bartsens {

/// Seeded pseudo-random stream with hand-rolled variate transforms so that a
/// given (seed, call sequence) produces the same draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); never returns an exact endpoint.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  int uniform_int(int n);

  /// Standard normal via the Marsaglia polar method (one spare cached).
  double normal();

  double exponential() { return -std::log(uniform_open()); }

  /// Independent stream derived from this generator's seed and a stream id.
  Rng fork(std::uint64_t stream) const;

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 finalizer; used to derive per-chain seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

/// Draw X ~ N(mean, 1) conditioned on X > lower. Tail-robust: switches to
/// Robert's exponential rejection when the truncation point is deep in the
/// upper tail.
double truncated_normal_above(Rng& rng, double mean, double lower);

/// Draw X ~ N(mean, 1) conditioned on X <= upper.
double truncated_normal_below(Rng& rng, double mean, double upper);

}  // namespace bartsens
