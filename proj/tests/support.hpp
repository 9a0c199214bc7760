#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "augtest/domain.hpp"

namespace augtest::testing {

// Random strictly positive table; `zero_frac` of entries are zeroed first.
inline JointDistribution random_distribution(const std::vector<std::size_t>& dims, Rng& rng,
                                             double zero_frac = 0.0) {
  ProductDomain dom(dims);
  std::vector<double> w(dom.size());
  for (auto& x : w) x = rng.uniform() < zero_frac ? 0.0 : rng.uniform() + 1e-3;
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total == 0.0) {
    w[0] = 1.0;
    total = 1.0;
  }
  for (auto& x : w) x /= total;
  return {dom, std::move(w)};
}

// Outer product of explicit marginals, row-major.
inline JointDistribution outer(const std::vector<std::vector<double>>& marginals) {
  std::vector<std::size_t> dims;
  for (const auto& m : marginals) dims.push_back(m.size());
  ProductDomain dom(dims);
  std::vector<double> probs(dom.size());
  for (Index i = 0; i < dom.size(); ++i) {
    double v = 1.0;
    for (std::size_t a = 0; a < dims.size(); ++a) v *= marginals[a][dom.coordinate(i, a)];
    probs[i] = v;
  }
  return {dom, std::move(probs)};
}

inline std::vector<double> random_simplex(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  for (auto& x : w) x = rng.uniform() + 1e-3;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

// Independent l1 oracle, no library calls.
inline double l1_half(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s / 2.0;
}

inline std::vector<double> to_vec(const JointDistribution& p) { return {p.probs().begin(), p.probs().end()}; }

// Binomial 5-sigma half-width for frequency p over n draws.
inline double five_sigma(double p, double n) { return 5.0 * std::sqrt(p * (1.0 - p) / n); }

}  // namespace augtest::testing
