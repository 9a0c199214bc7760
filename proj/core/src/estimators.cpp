#include "augtest/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace augtest {

void EstimatorConfig::validate() const {
  if (!(norm_sample_mult > 0.0) || !(closeness_sample_mult > 0.0) || !(closeness_threshold_mult > 0.0) ||
      !(repetition_mult > 0.0)) {
    throw std::invalid_argument("EstimatorConfig: all multipliers must be positive");
  }
}

std::size_t repetitions(double delta, const EstimatorConfig& cfg) {
  const double r = std::ceil(cfg.repetition_mult * std::log(1.0 / delta));
  return std::max<std::size_t>(1, static_cast<std::size_t>(r));
}

double collision_statistic(std::span<const std::uint64_t> counts, std::uint64_t batch) {
  if (batch < 2) throw std::invalid_argument("collision_statistic: batch needs at least two draws");
  double pairs = 0.0;
  for (auto c : counts) pairs += static_cast<double>(c) * static_cast<double>(c > 0 ? c - 1 : 0);
  const auto t = static_cast<double>(batch);
  return pairs / (t * (t - 1.0));
}

NormEstimate estimate_l2_squared(const DrawFn& draw, std::size_t domain_size, double delta,
                                 const EstimatorConfig& cfg, Rng& rng) {
  if (domain_size == 0) throw std::invalid_argument("estimate_l2_squared: empty domain");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("estimate_l2_squared: delta must lie in (0, 1)");
  cfg.validate();

  const auto root = static_cast<double>(static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(domain_size)))));
  const auto batch = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::ceil(cfg.norm_sample_mult * root)));
  const std::size_t reps = repetitions(delta, cfg);

  std::vector<std::uint64_t> counts(domain_size, 0);
  std::vector<Index> touched;
  std::vector<double> stats;
  stats.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    touched.clear();
    for (std::uint64_t s = 0; s < batch; ++s) {
      const Index x = draw(rng);
      if (counts[x]++ == 0) touched.push_back(x);
    }
    double pairs = 0.0;
    for (auto x : touched) {
      pairs += static_cast<double>(counts[x]) * static_cast<double>(counts[x] - 1);
      counts[x] = 0;
    }
    const auto t = static_cast<double>(batch);
    stats.push_back(pairs / (t * (t - 1.0)));
  }
  // Lower median for even counts.
  auto mid = stats.begin() + static_cast<std::ptrdiff_t>((stats.size() - 1) / 2);
  std::nth_element(stats.begin(), mid, stats.end());
  return {*mid, batch * reps};
}

double closeness_statistic(std::span<const std::uint64_t> x, std::span<const std::uint64_t> y) {
  if (x.size() != y.size()) throw std::invalid_argument("closeness_statistic: length mismatch");
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = static_cast<double>(x[i]);
    const double yi = static_cast<double>(y[i]);
    z += (xi - yi) * (xi - yi) - xi - yi;
  }
  return z;
}

double closeness_rate(std::size_t domain_size, double b, double eps, const EstimatorConfig& cfg) {
  // Every distribution has squared l2 norm at most 1.
  const double bound = std::min(b, 1.0);
  return cfg.closeness_sample_mult * static_cast<double>(domain_size) * std::sqrt(bound) / (eps * eps);
}

double closeness_threshold(double lambda, std::size_t domain_size, double eps, const EstimatorConfig& cfg) {
  return cfg.closeness_threshold_mult * lambda * lambda * eps * eps / static_cast<double>(domain_size);
}

ClosenessResult closeness_test(const DrawFn& draw_p, const DrawFn& draw_q, std::size_t domain_size, double b,
                               double eps, double delta, const EstimatorConfig& cfg, Rng& rng) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("closeness_test: eps must lie in (0, 1)");
  if (!(b > 0.0)) throw std::invalid_argument("closeness_test: b must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("closeness_test: delta must lie in (0, 1)");
  if (domain_size == 0) throw std::invalid_argument("closeness_test: empty domain");
  cfg.validate();

  const double lambda = closeness_rate(domain_size, b, eps, cfg);
  const double threshold = closeness_threshold(lambda, domain_size, eps, cfg);

  ClosenessResult res;
  res.repetitions = repetitions(delta, cfg);
  std::vector<std::uint64_t> x(domain_size), y(domain_size);
  for (std::size_t r = 0; r < res.repetitions; ++r) {
    std::fill(x.begin(), x.end(), 0);
    std::fill(y.begin(), y.end(), 0);
    const auto kp = poisson(lambda, rng);
    const auto kq = poisson(lambda, rng);
    for (std::uint64_t s = 0; s < kp; ++s) ++x[draw_p(rng)];
    for (std::uint64_t s = 0; s < kq; ++s) ++y[draw_q(rng)];
    res.draws_p += kp;
    res.draws_q += kq;
    if (closeness_statistic(x, y) > threshold) ++res.reject_votes;
  }
  res.outcome = 2 * res.reject_votes > res.repetitions ? TestOutcome::Reject : TestOutcome::Accept;
  return res;
}

JointDistribution learn_empirical(const DrawFn& draw, const ProductDomain& domain, std::uint64_t t, Rng& rng) {
  if (t == 0) throw std::invalid_argument("learn_empirical: need at least one sample");
  std::vector<std::uint64_t> counts(domain.size(), 0);
  for (std::uint64_t s = 0; s < t; ++s) ++counts[draw(rng)];
  std::vector<double> probs(domain.size());
  const auto total = static_cast<double>(t);
  for (std::size_t i = 0; i < counts.size(); ++i) probs[i] = static_cast<double>(counts[i]) / total;
  return {domain, std::move(probs)};
}

double empirical_tv_to_product(const JointDistribution& p_emp) {
  return tv_distance(p_emp, product_of_marginals(p_emp));
}

double empirical_tv_to_product(const JointDistribution& p_emp, const Grouping& grouping) {
  return tv_distance(p_emp, product_of_marginals(p_emp, grouping));
}

}  // namespace augtest
