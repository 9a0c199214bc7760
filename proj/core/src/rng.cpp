#include "augtest/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace augtest {

__extension__ using u128 = unsigned __int128;

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  return mix64(mix64(base_seed) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_index: bound must be positive");
  // Lemire's multiply-shift with rejection of the biased low range.
  std::uint64_t x = engine_();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = engine_();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

Rng Rng::fork() { return Rng(engine_(), engine_()); }

namespace {

std::uint64_t poisson_inversion(double mean, Rng& rng) {
  const double u = rng.uniform();
  double term = std::exp(-mean);
  double cdf = term;
  std::uint64_t k = 0;
  // The tail beyond ~mean + 40 sd is below double resolution; cap the walk.
  const auto limit = static_cast<std::uint64_t>(mean + 40.0 * std::sqrt(mean) + 40.0);
  while (u >= cdf && k < limit) {
    ++k;
    term *= mean / static_cast<double>(k);
    cdf += term;
  }
  return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables".
std::uint64_t poisson_ptrs(double mean, Rng& rng) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

std::uint64_t poisson(double mean, Rng& rng) {
  if (!std::isfinite(mean) || mean < 0.0) {
    throw std::invalid_argument("poisson: mean must be finite and non-negative");
  }
  if (mean == 0.0) return 0;
  return mean < 30.0 ? poisson_inversion(mean, rng) : poisson_ptrs(mean, rng);
}

}  // namespace augtest
