#pragma once

#include <cstdint>
#include <random>

namespace augtest {

/// Seeded 64-bit generator. Two generators built from the same (seed, stream)
/// pair produce identical sequences on every platform that ships the same
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., bound - 1}; bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Independent child stream; consumes one draw from this generator.
  Rng fork();

  /// Deterministic child for (seed, stream) that does not touch this generator.
  Rng derive(std::uint64_t stream) const { return Rng(seed_, stream); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser, used to decorrelate (seed, stream) pairs.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for trial `index` under `base_seed`.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t index) noexcept;

/// Poisson draw: inversion below mean 30, transformed rejection (PTRS) above.
/// Throws std::invalid_argument for a negative or non-finite mean.
std::uint64_t poisson(double mean, Rng& rng);

}  // namespace augtest
