#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "augtest/flattening.hpp"
#include "support.hpp"

using namespace augtest;
using namespace augtest::testing;

namespace {

std::vector<std::size_t> random_buckets(std::size_t n, Rng& r) {
  std::vector<std::size_t> b(n);
  for (auto& x : b) x = 1 + r.uniform_index(5);
  return b;
}

ProductFlattening single_axis(std::vector<std::size_t> b) {
  std::vector<AxisFlattening> axes;
  axes.emplace_back(std::move(b));
  return ProductFlattening(std::move(axes));
}

}  // namespace

TEST(BuildAxisFlattening, Examples) {
  auto u4 = JointDistribution::uniform(ProductDomain({4}));
  const std::vector<std::size_t> counts{2, 0, 0, 0};
  auto f = build_axis_flattening(u4, counts, 0.25);
  EXPECT_EQ(f.buckets(), (std::vector<std::size_t>{4, 2, 2, 2}));
  EXPECT_EQ(f.flat_size(), 10u);

  auto point = JointDistribution::point_mass(ProductDomain({3}), 0);
  const std::vector<std::size_t> zeros{0, 0, 0};
  EXPECT_EQ(build_axis_flattening(point, zeros).buckets(), (std::vector<std::size_t>{4, 1, 1}));
}

TEST(BuildAxisFlattening, Errors) {
  auto u = JointDistribution::uniform(ProductDomain({3}));
  const std::vector<std::size_t> three{0, 0, 0}, two{0, 0};
  EXPECT_THROW(build_axis_flattening(u, three, 0.0), std::invalid_argument);
  EXPECT_THROW(build_axis_flattening(u, three, -1.0), std::invalid_argument);
  EXPECT_THROW(build_axis_flattening(u, two), std::invalid_argument);
}

TEST(BuildAxisFlattening, FlatSizeAtMostThreeNPlusS) {
  Rng r(1);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + r.uniform_index(30);
    auto pred = random_distribution({n}, r, 0.3);
    std::vector<std::size_t> counts(n, 0);
    const std::size_t s = r.uniform_index(50);
    for (std::size_t i = 0; i < s; ++i) ++counts[r.uniform_index(n)];
    auto f = build_axis_flattening(pred, counts);
    EXPECT_LE(f.flat_size(), 3 * n + s);
    // Default granularity 1/n.
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(f.buckets(i), static_cast<std::size_t>(std::floor(n * pred[i] + 1e-9)) + counts[i] + 1);
    }
  }
}

TEST(AxisFlattening, OffsetsAndInverse) {
  AxisFlattening f({3, 1, 2});
  EXPECT_EQ(f.flat_size(), 6u);
  EXPECT_EQ(f.offset(0), 0u);
  EXPECT_EQ(f.offset(1), 3u);
  EXPECT_EQ(f.offset(2), 4u);
  const std::vector<Index> owner{0, 0, 0, 1, 2, 2};
  for (Index k = 0; k < 6; ++k) EXPECT_EQ(f.base_of(k), owner[k]);
  EXPECT_THROW(AxisFlattening({1, 0}), std::invalid_argument);
}

TEST(FlattenDistribution, DefinitionExample) {
  JointDistribution p(ProductDomain({2}), {1.0, 0.0});
  auto pf = flatten_distribution_explicit(p, single_axis({2, 1}));
  EXPECT_EQ(to_vec(pf), (std::vector<double>{0.5, 0.5, 0.0}));
}

TEST(FlattenDistribution, PreservesTv) {
  Rng r(2);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + r.uniform_index(19);
    auto p = random_distribution({n}, r, 0.2), q = random_distribution({n}, r, 0.2);
    const auto F = single_axis(random_buckets(n, r));
    const double before = tv_distance(p, q);
    const double after = tv_distance(flatten_distribution_explicit(p, F), flatten_distribution_explicit(q, F));
    EXPECT_NEAR(after, before, 1e-12);
  }
}

TEST(FlattenDistribution, ProductFactorizes) {
  Rng r(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + r.uniform_index(7), m = 2 + r.uniform_index(7);
    auto a = random_simplex(n, r), b = random_simplex(m, r);
    auto p = outer({a, b});
    const auto ba = random_buckets(n, r), bb = random_buckets(m, r);
    ProductFlattening F({AxisFlattening(ba), AxisFlattening(bb)});
    auto pf = flatten_distribution_explicit(p, F);
    auto fa = flatten_distribution_explicit(JointDistribution(ProductDomain({n}), a), single_axis(ba));
    auto fb = flatten_distribution_explicit(JointDistribution(ProductDomain({m}), b), single_axis(bb));
    auto expect = outer({to_vec(fa), to_vec(fb)});
    ASSERT_EQ(pf.size(), expect.size());
    for (Index i = 0; i < pf.size(); ++i) EXPECT_NEAR(pf[i], expect[i], 1e-12);
  }
}

TEST(FlattenDistribution, DomainMismatch) {
  auto p = JointDistribution::uniform(ProductDomain({3}));
  EXPECT_THROW(flatten_distribution_explicit(p, single_axis({1, 1})), std::invalid_argument);
}

TEST(FlattenSample, IdentityFlattening) {
  ProductFlattening F({AxisFlattening::identity(4), AxisFlattening::identity(3)});
  Rng r(4);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 3; ++j) {
      const std::vector<Index> base{i, j};
      EXPECT_EQ(flatten_sample(F, base, r), (Tuple{i, j}));
    }
  }
  const std::vector<Index> bad{4, 0};
  EXPECT_THROW(flatten_sample(F, bad, r), std::out_of_range);
}

TEST(FlattenSample, SubBucketsUniform) {
  ProductFlattening F({AxisFlattening({1, 3}), AxisFlattening({1, 1})});
  Rng r(5);
  const int n = 100000;
  std::vector<int> freq(4, 0);
  const std::vector<Index> base{1, 0};
  for (int s = 0; s < n; ++s) {
    const auto t = flatten_sample(F, base, r);
    ++freq[t[0]];
    EXPECT_EQ(t[1], 0u);
  }
  EXPECT_EQ(freq[0], 0);
  for (int k = 1; k <= 3; ++k) EXPECT_NEAR(freq[k] / double(n), 1.0 / 3.0, five_sigma(1.0 / 3.0, n));
}

TEST(FlattenSample, StreamMatchesExplicitTable) {
  Rng r(6);
  auto p = random_distribution({3, 2}, r);
  ProductFlattening F({AxisFlattening({2, 1, 3}), AxisFlattening({1, 2})});
  auto pf = flatten_distribution_explicit(p, F);
  TableSampler base(p);
  const int n = 200000;
  std::vector<int> freq(pf.size(), 0);
  for (int s = 0; s < n; ++s) ++freq[F.flatten(base(r), r)];
  for (Index i = 0; i < pf.size(); ++i) EXPECT_NEAR(freq[i] / double(n), pf[i], five_sigma(pf[i], n) + 1e-12);
}

TEST(SampleFlattenedProduct, MatchesFlattenedProductOfMarginals) {
  Rng r(7);
  auto p = random_distribution({3, 3}, r);  // correlated in general
  ProductFlattening F({AxisFlattening({1, 2, 1}), AxisFlattening({3, 1, 1})});
  auto target = flatten_distribution_explicit(product_of_marginals(p), F);
  std::uint64_t draws = 0;
  TableSampler ts(p);
  Sampler counted{p.domain(), [&](Rng& g) {
                    ++draws;
                    return ts(g);
                  }};
  const int n = 100000;
  std::vector<int> freq(target.size(), 0);
  for (int s = 0; s < n; ++s) ++freq[sample_flattened_product(counted, F, r)];
  EXPECT_EQ(draws, 2u * n);
  for (Index i = 0; i < target.size(); ++i) {
    EXPECT_NEAR(freq[i] / double(n), target[i], five_sigma(target[i], n) + 1e-12);
  }
}

TEST(SampleFlattenedProduct, ThreeAxesUseThreeDraws) {
  auto p = JointDistribution::uniform(ProductDomain({2, 2, 2}));
  ProductFlattening F({AxisFlattening::identity(2), AxisFlattening::identity(2), AxisFlattening::identity(2)});
  std::uint64_t draws = 0;
  TableSampler ts(p);
  Sampler counted{p.domain(), [&](Rng& g) {
                    ++draws;
                    return ts(g);
                  }};
  Rng r(8);
  for (int s = 0; s < 100; ++s) sample_flattened_product(counted, F, r);
  EXPECT_EQ(draws, 300u);
}

TEST(SampleFlattenedProduct, PointMassIsDeterministicUpToSubBucket) {
  ProductDomain d({3, 2});
  const std::vector<Index> at{2, 1};
  auto p = JointDistribution::point_mass(d, d.linear(at));
  ProductFlattening F({AxisFlattening({1, 1, 2}), AxisFlattening({1, 3})});
  Sampler s = make_sampler(p);
  Rng r(9);
  for (int k = 0; k < 200; ++k) {
    const auto t = F.flat_domain().tuple(sample_flattened_product(s, F, r));
    EXPECT_EQ(F.axis(0).base_of(t[0]), 2u);
    EXPECT_EQ(F.axis(1).base_of(t[1]), 1u);
  }
}

// E ||p^(F)||^2 <= 2 alpha / s + 4 nu with Poi(s) samples and nu = 1/n.
TEST(AugmentedFlattening, ExpectedNormBound) {
  const std::size_t n = 40;
  const double alpha = 0.2, s = 8.0;
  // Prediction uniform; p moves alpha of mass onto symbol 0.
  std::vector<double> probs(n, (1.0 - alpha) / n);
  probs[0] += alpha;
  JointDistribution p(ProductDomain({n}), probs);
  auto pred = JointDistribution::uniform(p.domain());
  ASSERT_LE(tv_distance(p, pred), alpha + 1e-12);
  Rng r(10);
  TableSampler ts(p);
  const int reps = 1500;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < reps; ++k) {
    std::vector<std::size_t> counts(n, 0);
    const auto draws = poisson(s, r);
    for (std::uint64_t i = 0; i < draws; ++i) ++counts[ts(r)];
    const auto F = build_axis_flattening(pred, counts);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += probs[i] * probs[i] / static_cast<double>(F.buckets(i));
    sum += norm;
    sum2 += norm * norm;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
  EXPECT_LE(mean, 2.0 * alpha / s + 4.0 / n + 3.0 * se);
}
