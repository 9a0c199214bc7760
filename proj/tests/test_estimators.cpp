#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "augtest/estimators.hpp"
#include "support.hpp"

using namespace augtest;
using namespace augtest::testing;

namespace {

DrawFn drawer(const JointDistribution& p) {
  TableSampler ts(p);
  return [ts](Rng& r) { return ts(r); };
}

JointDistribution on_line(std::vector<double> probs) {
  const std::size_t n = probs.size();
  return {ProductDomain({n}), std::move(probs)};
}

}  // namespace

TEST(EstimatorConfig, Validation) {
  EstimatorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.closeness_threshold_mult = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(repetitions(0.05, EstimatorConfig{}), static_cast<std::size_t>(std::ceil(8.0 * std::log(20.0))));
}

TEST(NormEstimator, PointMassIsExact) {
  auto p = JointDistribution::point_mass(ProductDomain({5}), 2);
  Rng r(1);
  for (int t = 0; t < 500; ++t) {
    EXPECT_DOUBLE_EQ(estimate_l2_squared(drawer(p), 5, 0.05, EstimatorConfig{}, r).value, 1.0);
  }
}

TEST(NormEstimator, SkewedThreeSymbols) {
  auto p = on_line({0.5, 0.25, 0.25});
  EXPECT_DOUBLE_EQ(p.l2_squared(), 0.375);
  Rng r(2);
  std::vector<double> est;
  for (int t = 0; t < 200; ++t) est.push_back(estimate_l2_squared(drawer(p), 3, 0.05, EstimatorConfig{}, r).value);
  std::nth_element(est.begin(), est.begin() + 100, est.end());
  EXPECT_GE(est[100], 0.1875);
  EXPECT_LE(est[100], 0.5625);
}

TEST(NormEstimator, ConsumesConfiguredSamples) {
  auto p = JointDistribution::uniform(ProductDomain({50}));
  EstimatorConfig c;
  Rng r(3);
  std::uint64_t used = 0;
  DrawFn counted = [&, d = drawer(p)](Rng& g) {
    ++used;
    return d(g);
  };
  const auto est = estimate_l2_squared(counted, 50, 0.05, c, r);
  const std::uint64_t batch = static_cast<std::uint64_t>(std::ceil(c.norm_sample_mult * std::ceil(std::sqrt(50.0))));
  EXPECT_EQ(est.samples, batch * repetitions(0.05, c));
  EXPECT_EQ(used, est.samples);
}

TEST(NormEstimator, Errors) {
  auto d = drawer(JointDistribution::uniform(ProductDomain({2})));
  Rng r(4);
  EXPECT_THROW(estimate_l2_squared(d, 0, 0.1, EstimatorConfig{}, r), std::invalid_argument);
  EXPECT_THROW(estimate_l2_squared(d, 2, 0.0, EstimatorConfig{}, r), std::invalid_argument);
  EXPECT_THROW(estimate_l2_squared(d, 2, 1.0, EstimatorConfig{}, r), std::invalid_argument);
}

// E[sum X_i (X_i - 1) / (T (T - 1))] = ||p||^2 for a fixed batch of T draws.
TEST(CollisionStatistic, Unbiased) {
  Rng r(5);
  for (int inst = 0; inst < 3; ++inst) {
    auto p = random_distribution({6}, r);
    TableSampler ts(p);
    const std::uint64_t T = 5;
    const int reps = 10000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < reps; ++k) {
      std::vector<std::uint64_t> counts(6, 0);
      for (std::uint64_t i = 0; i < T; ++i) ++counts[ts(r)];
      const double v = collision_statistic(counts, T);
      s += v;
      s2 += v * v;
    }
    const double mean = s / reps, se = std::sqrt((s2 / reps - mean * mean) / reps);
    EXPECT_NEAR(mean, p.l2_squared(), 3.0 * se + 1e-12);
  }
  const std::vector<std::uint64_t> one{1};
  EXPECT_THROW(collision_statistic(one, 1), std::invalid_argument);
}

TEST(ClosenessStatistic, IdenticalCountsAreNegative) {
  const std::vector<std::uint64_t> x{3, 0, 5, 1};
  EXPECT_DOUBLE_EQ(closeness_statistic(x, x), -18.0);
  const std::vector<std::uint64_t> y{1, 2};
  EXPECT_THROW(closeness_statistic(x, y), std::invalid_argument);
}

// E[Z] = lambda^2 ||p - q||^2 under per-symbol Poissonization.
TEST(ClosenessStatistic, FirstMoment) {
  Rng r(6);
  for (int inst = 0; inst < 3; ++inst) {
    const std::size_t n = 3 + r.uniform_index(8);
    auto p = random_distribution({n}, r), q = random_distribution({n}, r);
    const double lambda = 20.0;
    double expect = 0.0;
    for (std::size_t i = 0; i < n; ++i) expect += (p[i] - q[i]) * (p[i] - q[i]);
    expect *= lambda * lambda;
    const int reps = 20000;
    double s = 0.0, s2 = 0.0;
    std::vector<std::uint64_t> x(n), y(n);
    for (int k = 0; k < reps; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = poisson(lambda * p[i], r);
        y[i] = poisson(lambda * q[i], r);
      }
      const double z = closeness_statistic(x, y);
      s += z;
      s2 += z * z;
    }
    const double mean = s / reps, se = std::sqrt((s2 / reps - mean * mean) / reps);
    EXPECT_NEAR(mean, expect, 4.0 * se);
  }
}

TEST(ClosenessTest, NullAccepts) {
  auto u = JointDistribution::uniform(ProductDomain({50}));
  Rng r(7);
  int accepts = 0;
  for (int t = 0; t < 200; ++t) {
    accepts += closeness_test(drawer(u), drawer(u), 50, 1.0 / 50, 0.3, 0.05, EstimatorConfig{}, r).outcome ==
               TestOutcome::Accept;
  }
  EXPECT_GE(accepts, 190);
}

TEST(ClosenessTest, FarPairRejects) {
  auto p = on_line({1.0, 0.0}), q = on_line({0.5, 0.5});
  Rng r(8);
  int rejects = 0;
  for (int t = 0; t < 200; ++t) {
    rejects += closeness_test(drawer(p), drawer(q), 2, 1.0, 0.3, 0.05, EstimatorConfig{}, r).outcome ==
               TestOutcome::Reject;
  }
  EXPECT_GE(rejects, 190);
}

TEST(ClosenessTest, AccountingAndErrors) {
  auto u = JointDistribution::uniform(ProductDomain({10}));
  Rng r(9);
  std::uint64_t used_p = 0, used_q = 0;
  DrawFn dp = [&, d = drawer(u)](Rng& g) {
    ++used_p;
    return d(g);
  };
  DrawFn dq = [&, d = drawer(u)](Rng& g) {
    ++used_q;
    return d(g);
  };
  const auto res = closeness_test(dp, dq, 10, 0.1, 0.5, 0.1, EstimatorConfig{}, r);
  EXPECT_EQ(res.draws_p, used_p);
  EXPECT_EQ(res.draws_q, used_q);
  EXPECT_EQ(res.repetitions, repetitions(0.1, EstimatorConfig{}));
  const auto d = drawer(u);
  EXPECT_THROW(closeness_test(d, d, 10, 0.1, 0.0, 0.1, EstimatorConfig{}, r), std::invalid_argument);
  EXPECT_THROW(closeness_test(d, d, 10, 0.1, 1.0, 0.1, EstimatorConfig{}, r), std::invalid_argument);
  EXPECT_THROW(closeness_test(d, d, 10, 0.0, 0.5, 0.1, EstimatorConfig{}, r), std::invalid_argument);
}

TEST(ClosenessRate, CapsBoundAtOne) {
  EstimatorConfig c;
  EXPECT_DOUBLE_EQ(closeness_rate(10, 4.0, 0.5, c), closeness_rate(10, 1.0, 0.5, c));
  EXPECT_DOUBLE_EQ(closeness_rate(10, 0.25, 0.5, c), c.closeness_sample_mult * 10 * 0.5 / 0.25);
}

TEST(LearnEmpirical, PointMass) {
  ProductDomain d({3, 2});
  auto p = JointDistribution::point_mass(d, 4);
  Rng r(10);
  auto e = learn_empirical(drawer(p), d, 17, r);
  EXPECT_EQ(to_vec(e), to_vec(p));
  EXPECT_THROW(learn_empirical(drawer(p), d, 0, r), std::invalid_argument);
}

TEST(LearnEmpirical, SampleBoundGivesEtaAccuracy) {
  const double eta = 0.2, delta = 0.1;
  const std::size_t M = 12;
  const auto t = static_cast<std::uint64_t>(std::ceil((M + std::log(1.0 / delta)) / (eta * eta)));
  Rng r(11);
  int good = 0;
  for (int k = 0; k < 200; ++k) {
    auto p = random_distribution({M}, r);
    good += tv_distance(learn_empirical(drawer(p), p.domain(), t, r), p) <= eta;
  }
  EXPECT_GE(good, 180);
}

TEST(LearnEmpirical, MarginalsMatchProjectedSamples) {
  Rng r(12);
  auto p = random_distribution({3, 4}, r);
  Rng a(99), b(99);
  auto emp = learn_empirical(drawer(p), p.domain(), 500, a);
  TableSampler ts(p);
  std::vector<double> rows(3, 0.0);
  for (int k = 0; k < 500; ++k) rows[p.domain().coordinate(ts(b), 0)] += 1.0 / 500;
  auto m = marginal(emp, {0});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(m[i], rows[i], 1e-12);
}

TEST(EmpiricalTvToProduct, Examples) {
  Rng r(13);
  auto prod = outer({random_simplex(3, r), random_simplex(2, r)});
  EXPECT_NEAR(empirical_tv_to_product(prod), 0.0, 1e-15);
  JointDistribution diag(ProductDomain({2, 2}), {0.5, 0.0, 0.0, 0.5});
  EXPECT_DOUBLE_EQ(empirical_tv_to_product(diag), 0.5);
  for (int t = 0; t < 50; ++t) {
    auto p = random_distribution({3, 3}, r);
    std::vector<double> rows(3, 0.0), cols(3, 0.0), prod_tab(9);
    for (int i = 0; i < 9; ++i) {
      rows[i / 3] += p[i];
      cols[i % 3] += p[i];
    }
    for (int i = 0; i < 9; ++i) prod_tab[i] = rows[i / 3] * cols[i % 3];
    EXPECT_NEAR(empirical_tv_to_product(p), l1_half(to_vec(p), prod_tab), 1e-15);
  }
}
