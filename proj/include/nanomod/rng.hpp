#pragma once

#include <cstdint>

namespace nanomod {

/// splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// One-shot splitmix64 finalizer of a single value.
std::uint64_t mix64(std::uint64_t value);

/// xoshiro256** seeded by four splitmix64 outputs. Every stochastic stage
/// draws from this generator so seeds are portable across implementations.
class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (cosine branch only; the sine branch is
  /// discarded so each call consumes exactly two uniforms).
  double normal();

 private:
  std::uint64_t s_[4];
};

/// Independent generator for (seed, stream). Used for per-component and
/// per-trial draws so results never depend on iteration schedule.
Xoshiro256ss substream(std::uint64_t seed, std::uint64_t stream);

/// Poisson variate. Knuth multiplication below 30, PTRS (Hormann 1993) above.
std::uint64_t poisson(Xoshiro256ss& rng, double lambda);

/// Normal sample clamped to +/- limit standard deviations.
double clamped_normal(Xoshiro256ss& rng, double sigma, double limit = 3.0);

}  // namespace nanomod
