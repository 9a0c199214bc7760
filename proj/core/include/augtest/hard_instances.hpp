#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "augtest/domain.hpp"

namespace augtest {

/// Largest eps for which the 192 eps perturbation argument applies.
inline constexpr double kHardEpsMax = 1.0 / 192.0;

struct HardParams {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;       // sample budget the instance is built against
  double alpha = 0.0;      // prediction error target, (0, 1]
  double eps = 0.0;        // farness target, (0, 1/192]
  std::optional<int> forced_x;
  /// Expert override: raw (eps', alpha') instead of (192 eps, 2 alpha / 3).
  /// Validity guarantees are void when set or when eps leaves the regime.
  std::optional<double> eps_meas_override;
  std::optional<double> alpha_meas_override;
};

/// Heavy/light-row family over [n] x [m]. Heavy rows carry c_i = 1/k and stay
/// uniform; light rows carry c_i = 1/n and, when X = 1, entries (1 +- eps')/m.
struct HardInstance {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  double eps = 0.0;
  double alpha = 0.0;
  double eps_meas = 0.0;
  double alpha_meas = 0.0;
  int x = 0;
  std::vector<double> c;          // per-row weight, 1/k or 1/n
  std::vector<std::size_t> heavy;  // rows with c_i = 1/k, ascending
  /// +1 / -1 per cell of a light row when x = 1, 0 otherwise. Row-major n x m.
  std::vector<std::int8_t> signs;
  std::vector<double> row_measure;  // P(i, j), row-major
  std::vector<double> measure;      // Q(i, j) = c_i P(i, j)
  std::vector<double> row_sums;     // s_i
  double c_total = 0.0;             // C = sum c_i
  JointDistribution p = JointDistribution::uniform(ProductDomain({2}));
  JointDistribution prediction = p;  // uniform on [n] x [m]
  bool guarantees_void = false;
  std::vector<std::string> warnings;

  bool is_heavy(std::size_t row) const { return c[row] > 1.0 / static_cast<double>(n); }
  double measure_mass() const;  // ||Q||_1
};

/// Draws X (unless forced), the row weights, the sign matrix, and normalizes
/// p(i, j) = Q(i, j) / (s_i C). Throws when k > n/2, alpha' k / n > 1, or the
/// parameters leave their ranges without an override.
HardInstance gen_hard_2d(const HardParams& params, Rng& rng);

struct CountMatrix {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<std::uint64_t> a;  // row-major
  std::uint64_t total = 0;
};

/// a_ij ~ Poi(k Q(i, j)), independently.
CountMatrix poissonized_counts(const HardInstance& inst, Rng& rng);

struct ValidityReport {
  bool row_sums_ok = false;     // every light row: |sum_j eps_ij / m| within target
  bool column_sums_ok = false;  // every column: |sum_{i light} eps_ij / n| within target
  bool heavy_count_ok = false;  // |H| <= 3/2 alpha' k
  bool sample_size_ok = false;  // |S| >= k / 100
  bool valid = false;

  std::size_t heavy_rows = 0;
  double max_row_deviation = 0.0;
  double max_column_deviation = 0.0;
  double row_target = 0.0;
  double column_target = 0.0;
  std::uint64_t sample_size = 0;
  /// Informational: both sign-sum deviations within eps/2. Not part of `valid`.
  bool half_eps_sums_ok = false;

  /// Exact oracles: tv(p, prediction) and tv(p, p1 x p2).
  double tv_to_prediction = 0.0;
  double tv_to_product = 0.0;
  /// X = 0: p is a product and tv(p, prediction) <= alpha.
  /// X = 1: tv(p, p1 x p2) >= 3 eps, hence eps-far from every product.
  bool conclusion_holds = false;
};

/// Row and column targets eps' sqrt((2/m) ln(50 n)) and eps' sqrt((2/n) ln(50 m)).
/// An eps/2 target is unreachable for X = 1 since a row sum has standard
/// deviation eps'/sqrt(m).
double hard_row_target(const HardInstance& inst);
double hard_column_target(const HardInstance& inst);

ValidityReport validity_check(const HardInstance& inst, const CountMatrix& counts);

struct EmbeddedInstance {
  JointDistribution p;
  JointDistribution prediction;
};

/// Splits the second axis into `factors` (product must equal m), last factor
/// fastest.
EmbeddedInstance embed_hard_to_d(const HardInstance& inst, const std::vector<std::size_t>& factors);

}  // namespace augtest
