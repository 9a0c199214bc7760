#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "augtest/domain.hpp"

namespace augtest {

/// One draw from a distribution over [M].
using DrawFn = std::function<Index(Rng&)>;

/// Multipliers hidden inside the asymptotic sample bounds of the two
/// statistical subroutines. Defaults are frozen from tools/calibrate.
struct EstimatorConfig {
  double norm_sample_mult = 4.0;          // batch size = mult * ceil(sqrt(M))
  double closeness_sample_mult = 2.0;     // lambda = mult * M * sqrt(b) / eps^2
  double closeness_threshold_mult = 1.5;  // reject iff Z > mult * lambda^2 eps^2 / M
  double repetition_mult = 8.0;           // repetitions = ceil(mult * ln(1/delta))

  void validate() const;
};

/// ceil(repetition_mult * ln(1/delta)), at least 1.
std::size_t repetitions(double delta, const EstimatorConfig& cfg);

struct NormEstimate {
  double value = 0.0;
  std::uint64_t samples = 0;
};

/// Median over repetitions of the unbiased collision statistic
/// sum_i X_i (X_i - 1) / (T (T - 1)) on batches of T = norm_sample_mult *
/// ceil(sqrt(M)) draws.
NormEstimate estimate_l2_squared(const DrawFn& draw, std::size_t domain_size, double delta,
                                 const EstimatorConfig& cfg, Rng& rng);

/// Collision statistic of one batch of counts.
double collision_statistic(std::span<const std::uint64_t> counts, std::uint64_t batch);

enum class TestOutcome { Accept, Reject };

struct ClosenessResult {
  TestOutcome outcome = TestOutcome::Accept;
  std::uint64_t draws_p = 0;
  std::uint64_t draws_q = 0;
  std::size_t reject_votes = 0;
  std::size_t repetitions = 0;
};

/// Z = sum_i [(X_i - Y_i)^2 - X_i - Y_i] for Poissonized count vectors.
double closeness_statistic(std::span<const std::uint64_t> x, std::span<const std::uint64_t> y);

/// Poissonization rate lambda = closeness_sample_mult * M * sqrt(min(b, 1)) / eps^2.
double closeness_rate(std::size_t domain_size, double b, double eps, const EstimatorConfig& cfg);

/// Reject threshold on Z for rate lambda.
double closeness_threshold(double lambda, std::size_t domain_size, double eps, const EstimatorConfig& cfg);

/// Tests p = q against tv(p, q) > eps given b >= min(|p|_2^2, |q|_2^2).
/// Each repetition draws Poi(lambda) samples from both streams; the outcome is
/// the strict majority vote over repetitions.
ClosenessResult closeness_test(const DrawFn& draw_p, const DrawFn& draw_q, std::size_t domain_size, double b,
                               double eps, double delta, const EstimatorConfig& cfg, Rng& rng);

/// Histogram of t draws divided by t.
JointDistribution learn_empirical(const DrawFn& draw, const ProductDomain& domain, std::uint64_t t, Rng& rng);

/// tv(p_emp, product of its marginals under `grouping`); singleton blocks by default.
double empirical_tv_to_product(const JointDistribution& p_emp);
double empirical_tv_to_product(const JointDistribution& p_emp, const Grouping& grouping);

}  // namespace augtest
