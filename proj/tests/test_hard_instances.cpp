#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "augtest/hard_instances.hpp"
#include "support.hpp"

using namespace augtest;
using namespace augtest::testing;

namespace {

HardParams params(std::size_t n, std::size_t m, std::size_t k, double alpha, double eps,
                  std::optional<int> x = std::nullopt) {
  HardParams hp;
  hp.n = n;
  hp.m = m;
  hp.k = k;
  hp.alpha = alpha;
  hp.eps = eps;
  hp.forced_x = x;
  return hp;
}

}  // namespace

TEST(GenHard, Errors) {
  Rng r(1);
  EXPECT_THROW(gen_hard_2d(params(100, 10, 51, 0.3, 0.005), r), std::invalid_argument);  // k > n/2
  EXPECT_THROW(gen_hard_2d(params(10, 20, 5, 0.3, 0.005), r), std::invalid_argument);   // n < m
  EXPECT_THROW(gen_hard_2d(params(100, 10, 10, 0.0, 0.005), r), std::invalid_argument);
  EXPECT_THROW(gen_hard_2d(params(100, 10, 10, 0.3, 0.01), r), std::invalid_argument);  // eps > 1/192
  auto hp = params(100, 10, 10, 0.3, 0.005);
  hp.alpha_meas_override = 1.5;
  EXPECT_THROW(gen_hard_2d(hp, r), std::invalid_argument);
  EXPECT_THROW(gen_hard_2d(params(100, 10, 10, 0.3, 0.005, 2), r), std::invalid_argument);
}

TEST(GenHard, OverrideVoidsGuarantees) {
  Rng r(2);
  auto hp = params(100, 10, 20, 0.3, 0.05);
  hp.eps_meas_override = 0.5;
  const auto inst = gen_hard_2d(hp, r);
  EXPECT_TRUE(inst.guarantees_void);
  EXPECT_EQ(inst.eps_meas, 0.5);
  EXPECT_FALSE(inst.warnings.empty());
}

TEST(GenHard, WarnsWhenLogNExceedsM) {
  Rng r(3);
  const auto inst = gen_hard_2d(params(200, 4, 10, 0.3, 0.005, 0), r);
  EXPECT_FALSE(inst.warnings.empty());
}

TEST(GenHard, XZeroWithoutHeavyRowsIsUniform) {
  // alpha' k / n is tiny, so no heavy rows for this seed.
  Rng r(4);
  const auto inst = gen_hard_2d(params(1000, 10, 1, 0.003, 0.005, 0), r);
  ASSERT_TRUE(inst.heavy.empty());
  EXPECT_DOUBLE_EQ(inst.c_total, 1.0);
  for (double s : inst.row_sums) EXPECT_DOUBLE_EQ(s, 1.0);
  const auto u = JointDistribution::uniform(inst.p.domain());
  EXPECT_NEAR(tv_distance(inst.p, u), 0.0, 1e-15);
}

TEST(GenHard, ConstructionInvariants) {
  Rng r(5);
  for (int t = 0; t < 40; ++t) {
    const auto inst = gen_hard_2d(params(300, 20, 100, 0.5, 1.0 / 192), r);
    EXPECT_NEAR(std::accumulate(inst.p.probs().begin(), inst.p.probs().end(), 0.0), 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(inst.eps_meas, 1.0);
    EXPECT_DOUBLE_EQ(inst.alpha_meas, 0.5 * 2.0 / 3.0);
    const auto u = JointDistribution::uniform(inst.p.domain());
    EXPECT_EQ(to_vec(inst.prediction), to_vec(u));
    for (std::size_t i = 0; i < inst.n; ++i) {
      const bool heavy = std::find(inst.heavy.begin(), inst.heavy.end(), i) != inst.heavy.end();
      EXPECT_EQ(heavy, inst.is_heavy(i));
      EXPECT_TRUE(inst.c[i] == 1.0 / 100 || inst.c[i] == 1.0 / 300);
      for (std::size_t j = 0; j < inst.m; ++j) {
        const double q = inst.c[i] * inst.row_measure[i * inst.m + j];
        EXPECT_DOUBLE_EQ(inst.measure[i * inst.m + j], q);
        EXPECT_DOUBLE_EQ(inst.p[i * inst.m + j], q / (inst.row_sums[i] * inst.c_total));
        if (heavy || inst.x == 0) {
          EXPECT_EQ(inst.p[i * inst.m + j], inst.p[i * inst.m]);  // exactly uniform row
          EXPECT_EQ(inst.signs[i * inst.m + j], 0);
        } else {
          EXPECT_EQ(std::abs(inst.signs[i * inst.m + j]), 1);
        }
      }
    }
  }
}

TEST(GenHard, XZeroIsExactlyProduct) {
  Rng r(6);
  for (int t = 0; t < 20; ++t) {
    const auto inst = gen_hard_2d(params(200, 10, 60, 0.6, 0.005, 0), r);
    std::vector<double> rows(inst.n, 0.0), cols(inst.m, 0.0);
    for (std::size_t i = 0; i < inst.n; ++i) {
      for (std::size_t j = 0; j < inst.m; ++j) {
        rows[i] += inst.p[i * inst.m + j];
        cols[j] += inst.p[i * inst.m + j];
      }
    }
    for (std::size_t i = 0; i < inst.n; ++i) {
      for (std::size_t j = 0; j < inst.m; ++j) EXPECT_NEAR(inst.p[i * inst.m + j], rows[i] * cols[j], 1e-12);
    }
  }
}

TEST(PoissonizedCounts, TotalsAndMean) {
  Rng r(7);
  const auto inst = gen_hard_2d(params(400, 20, 200, 0.3, 0.005, 1), r);
  const double mass = inst.measure_mass();
  double sum = 0.0;
  const int reps = 300;
  for (int t = 0; t < reps; ++t) {
    const auto c = poissonized_counts(inst, r);
    std::uint64_t total = 0;
    for (auto a : c.a) total += a;
    EXPECT_EQ(total, c.total);
    sum += static_cast<double>(c.total);
  }
  // |S| ~ Poi(k ||Q||_1).
  const double expect = 200.0 * mass;
  EXPECT_NEAR(sum / reps, expect, 5.0 * std::sqrt(expect / reps));
}

TEST(Validity, XZeroNoHeavyRowsLargeKPasses) {
  Rng r(8);
  const auto inst = gen_hard_2d(params(1000, 10, 500, 0.003, 0.005, 0), r);
  // alpha' k = 1 heavy row expected.
  EXPECT_LE(inst.heavy.size(), 6u);
  const auto rep = validity_check(inst, poissonized_counts(inst, r));
  EXPECT_TRUE(rep.valid);
  EXPECT_TRUE(rep.conclusion_holds);
  EXPECT_TRUE(rep.half_eps_sums_ok);
}

TEST(Validity, TooManyHeavyRowsFails) {
  Rng r(9);
  auto inst = gen_hard_2d(params(400, 20, 100, 0.3, 0.005, 0), r);
  // Force |H| = 2 alpha' k by promoting light rows.
  const auto target = static_cast<std::size_t>(2.0 * inst.alpha_meas * inst.k);
  for (std::size_t i = 0; i < inst.n && inst.heavy.size() < target; ++i) {
    if (!inst.is_heavy(i)) {
      inst.c[i] = 1.0 / inst.k;
      inst.heavy.push_back(i);
    }
  }
  const auto rep = validity_check(inst, poissonized_counts(inst, r));
  EXPECT_FALSE(rep.heavy_count_ok);
  EXPECT_FALSE(rep.valid);
}

TEST(Validity, ValidIsConjunction) {
  Rng r(10);
  for (int t = 0; t < 50; ++t) {
    const auto inst = gen_hard_2d(params(200, 20, 100, 0.3, 0.005), r);
    const auto rep = validity_check(inst, poissonized_counts(inst, r));
    EXPECT_EQ(rep.valid, rep.row_sums_ok && rep.column_sums_ok && rep.heavy_count_ok && rep.sample_size_ok);
    EXPECT_DOUBLE_EQ(rep.row_target, inst.eps_meas * std::sqrt(2.0 / 20 * std::log(50.0 * 200)));
    EXPECT_DOUBLE_EQ(rep.column_target, inst.eps_meas * std::sqrt(2.0 / 200 * std::log(50.0 * 20)));
    if (rep.valid) {
      // Under validity ||Q||_1 lies in [0.9, 2.6].
      EXPECT_GE(inst.measure_mass(), 0.9);
      EXPECT_LE(inst.measure_mass(), 2.6);
    }
  }
  auto inst = gen_hard_2d(params(200, 20, 100, 0.3, 0.005), r);
  CountMatrix wrong;
  wrong.n = 3;
  wrong.m = 3;
  EXPECT_THROW(validity_check(inst, wrong), std::invalid_argument);
}

TEST(Validity, ExactOraclesOnPassingInstances) {
  Rng r(11);
  int x0 = 0, x1 = 0;
  for (int t = 0; t < 100; ++t) {
    const auto inst = gen_hard_2d(params(400, 20, 200, 0.3, 0.005), r);
    const auto rep = validity_check(inst, poissonized_counts(inst, r));
    if (!rep.valid) continue;
    // Oracles recomputed here from the raw table.
    const auto u = JointDistribution::uniform(inst.p.domain());
    const double tv_u = l1_half(to_vec(inst.p), to_vec(u));
    const double tv_prod = l1_half(to_vec(inst.p), to_vec(product_of_marginals(inst.p)));
    EXPECT_NEAR(rep.tv_to_prediction, tv_u, 1e-12);
    EXPECT_NEAR(rep.tv_to_product, tv_prod, 1e-12);
    if (inst.x == 0) {
      ++x0;
      EXPECT_LE(tv_u, inst.alpha);
    } else {
      ++x1;
      EXPECT_GE(tv_prod, 3.0 * inst.eps);
    }
    EXPECT_TRUE(rep.conclusion_holds);
  }
  EXPECT_GT(x0, 20);
  EXPECT_GT(x1, 20);
}

TEST(Embed, PreservesTvAndFarness) {
  Rng r(12);
  const auto inst = gen_hard_2d(params(32, 16, 16, 0.3, 0.005, 1), r);
  const auto emb = embed_hard_to_d(inst, {2, 2, 2, 2});
  EXPECT_EQ(emb.p.domain().dims(), (std::vector<std::size_t>{32, 2, 2, 2, 2}));
  EXPECT_EQ(tv_distance(emb.p, emb.prediction), tv_distance(inst.p, inst.prediction));
  const double far2d = tv_distance(inst.p, product_of_marginals(inst.p));
  const double block = tv_distance(emb.p, product_of_marginals(emb.p, Grouping{{0}, {1, 2, 3, 4}}));
  EXPECT_NEAR(block, far2d, 1e-12);
  EXPECT_GE(tv_distance(emb.p, product_of_marginals(emb.p)), inst.eps);
  EXPECT_THROW(embed_hard_to_d(inst, {3, 5}), std::invalid_argument);
  EXPECT_THROW(embed_hard_to_d(inst, {}), std::invalid_argument);
}

TEST(Embed, XZeroWithoutHeavyRowsIsUniformProduct) {
  Rng r(13);
  const auto inst = gen_hard_2d(params(1000, 8, 1, 0.003, 0.005, 0), r);
  ASSERT_TRUE(inst.heavy.empty());
  const auto emb = embed_hard_to_d(inst, {2, 4});
  EXPECT_NEAR(tv_distance(emb.p, product_of_marginals(emb.p)), 0.0, 1e-12);
  EXPECT_NEAR(tv_distance(emb.p, emb.prediction), 0.0, 1e-12);
}
