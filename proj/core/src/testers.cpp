#include "augtest/testers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "augtest/flattening.hpp"

namespace augtest {

__extension__ using u128 = unsigned __int128;

std::string_view to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::Accept: return "accept";
    case Outcome::Reject: return "reject";
    case Outcome::InaccurateInformation: return "inaccurate_information";
  }
  return "?";
}

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::PoissonCap: return "poisson_cap";
    case Stage::NormGate: return "norm_gate";
    case Stage::JointNorm: return "joint_norm";
    case Stage::Closeness: return "closeness";
    case Stage::Learning: return "learning";
  }
  return "?";
}

std::string_view to_string(Profile p) noexcept { return p == Profile::Theory ? "theory" : "practical"; }

Outcome outcome_from_string(std::string_view s) {
  for (auto o : {Outcome::Accept, Outcome::Reject, Outcome::InaccurateInformation}) {
    if (to_string(o) == s) return o;
  }
  throw std::invalid_argument("unknown outcome '" + std::string(s) + "'");
}

Stage stage_from_string(std::string_view s) {
  for (auto st : {Stage::PoissonCap, Stage::NormGate, Stage::JointNorm, Stage::Closeness, Stage::Learning}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown stage '" + std::string(s) + "'");
}

Profile profile_from_string(std::string_view s) {
  if (s == "theory") return Profile::Theory;
  if (s == "practical") return Profile::Practical;
  throw std::invalid_argument("unknown profile '" + std::string(s) + "'");
}

TesterConfig TesterConfig::make(double eps, double alpha, Profile profile, double delta) {
  TesterConfig cfg;
  cfg.eps = eps;
  cfg.alpha = alpha;
  cfg.delta = delta;
  cfg.profile = profile;
  if (profile == Profile::Theory) {
    cfg.constants = TesterConstants::theory();
  } else {
    cfg.constants = TesterConstants::practical();
    cfg.estimators.repetition_mult = kPracticalRepetitionMult;
  }
  cfg.validate();
  return cfg;
}

void TesterConfig::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("TesterConfig: eps must lie in (0, 1)");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("TesterConfig: alpha must lie in [0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("TesterConfig: delta must lie in (0, 1)");
  const auto& c = constants;
  if (!(c.norm_gate_2d > 0 && c.poisson_cap_2d > 0 && c.norm_gate_3d > 0 && c.poisson_cap_3d > 0)) {
    throw std::invalid_argument("TesterConfig: constants must be positive");
  }
  estimators.validate();
}

std::uint64_t Subroutines::poisson_draw(double mean, Rng& rng) { return poisson(mean, rng); }

NormEstimate Subroutines::estimate_norm(const DrawFn& draw, std::size_t domain_size, double delta,
                                        const EstimatorConfig& cfg, Rng& rng) {
  return estimate_l2_squared(draw, domain_size, delta, cfg, rng);
}

ClosenessResult Subroutines::closeness(const DrawFn& draw_p, const DrawFn& draw_q, std::size_t domain_size,
                                       double b, double eps, double delta, const EstimatorConfig& cfg, Rng& rng) {
  return closeness_test(draw_p, draw_q, domain_size, b, eps, delta, cfg, rng);
}

Subroutines& default_subroutines() {
  static Subroutines subs;
  return subs;
}

double first_axis_sample_size_2d(std::size_t n, std::size_t m, double alpha, double eps) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  const double s = std::min(std::cbrt(nn * nn * mm * alpha) / std::pow(eps, 4.0 / 3.0), nn * alpha);
  return std::max(s, 1.0);
}

double first_axis_sample_size_3d(std::size_t n1, std::size_t n2, std::size_t n3, double alpha, double eps) {
  const double a = static_cast<double>(n1), b = static_cast<double>(n2), c = static_cast<double>(n3);
  const double s = std::min(a * alpha, std::cbrt(a * a * b * c * alpha) / std::pow(eps, 4.0 / 3.0));
  return std::max(s, 1.0);
}

double other_axis_sample_size(std::size_t n, double alpha) {
  return std::max(static_cast<double>(n) * alpha, 1.0);
}

double norm_budget(double alpha, double s, std::size_t n) { return 2.0 * alpha / s + 4.0 / static_cast<double>(n); }

double sample_bound_2d(std::size_t n, std::size_t m, double alpha, double eps) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return std::max(std::sqrt(nn * mm) / (eps * eps),
                  std::cbrt(nn * nn * mm * alpha) / std::pow(eps, 4.0 / 3.0));
}

namespace {

struct GatePlan {
  std::vector<double> sizes;  // s_l per axis
  double cap = 0.0;           // Poisson cap multiplier
  double norm_gate = 0.0;     // per-axis gate multiplier
  double joint_factor = 0.0;  // joint norm gate = joint_factor * prod tau
  double bound_factor = 0.0;  // closeness bound b = bound_factor * prod tau
  double norm_delta = 0.0;
  double closeness_delta = 0.0;
};

void check_shapes(const Sampler& sampler, const Prediction& pred) {
  if (!(sampler.domain == pred.domain())) {
    throw std::invalid_argument("prediction domain does not match the sampled domain");
  }
}

// Shared body of the 2D and 3D testers: Poisson cap, augmented flattening of
// each axis, marginal norm gate, joint norm gate, closeness on the flattened
// joint against the product of flattened marginals.
Verdict run_flattened_tester(const Sampler& sampler, const Prediction& pred, const GatePlan& plan,
                             const TesterConfig& cfg, Rng& rng, Subroutines& subs) {
  const auto& dom = sampler.domain;
  const std::size_t rank = dom.rank();
  std::uint64_t draws = 0;
  const Sampler counted{dom, [&](Rng& r) {
                          ++draws;
                          return sampler.draw(r);
                        }};
  Verdict v;

  std::vector<std::uint64_t> poisson_sizes(rank);
  for (std::size_t a = 0; a < rank; ++a) poisson_sizes[a] = subs.poisson_draw(plan.sizes[a], rng);
  v.stage_log.push_back(Stage::PoissonCap);
  for (std::size_t a = 0; a < rank; ++a) {
    if (static_cast<double>(poisson_sizes[a]) > plan.cap * plan.sizes[a]) {
      v.outcome = Outcome::Reject;
      return v;
    }
  }

  // Each axis gets its own set of joint draws, projected.
  std::vector<AxisFlattening> axes;
  std::vector<double> tau(rank);
  for (std::size_t a = 0; a < rank; ++a) {
    std::vector<std::size_t> counts(dom.dim(a), 0);
    for (std::uint64_t s = 0; s < poisson_sizes[a]; ++s) ++counts[dom.coordinate(counted.draw(rng), a)];
    axes.push_back(build_axis_flattening(marginal(pred, {a}), counts));
    tau[a] = norm_budget(cfg.alpha, plan.sizes[a], dom.dim(a));
  }
  v.account.flatten = draws;

  const ProductFlattening flat(std::move(axes));
  std::uint64_t before = draws;
  std::vector<double> norms(rank);
  for (std::size_t a = 0; a < rank; ++a) {
    const auto& ax = flat.axis(a);
    DrawFn draw_axis = [&, a](Rng& r) { return ax.flatten(dom.coordinate(counted.draw(r), a), r); };
    norms[a] = subs.estimate_norm(draw_axis, ax.flat_size(), plan.norm_delta, cfg.estimators, rng).value;
  }
  v.account.norm = draws - before;
  v.stage_log.push_back(Stage::NormGate);
  for (std::size_t a = 0; a < rank; ++a) {
    if (norms[a] > plan.norm_gate * tau[a]) {
      v.outcome = Outcome::InaccurateInformation;
      return v;
    }
  }

  const double tau_prod = std::accumulate(tau.begin(), tau.end(), 1.0, std::multiplies<>());
  const std::size_t flat_size = flat.flat_domain().size();
  DrawFn draw_joint = [&](Rng& r) { return flat.flatten(counted.draw(r), r); };
  before = draws;
  const double joint = subs.estimate_norm(draw_joint, flat_size, plan.norm_delta, cfg.estimators, rng).value;
  v.account.norm += draws - before;
  v.stage_log.push_back(Stage::JointNorm);
  if (joint > plan.joint_factor * tau_prod) {
    v.outcome = Outcome::Reject;
    return v;
  }

  DrawFn draw_product = [&](Rng& r) { return sample_flattened_product(counted, flat, r); };
  before = draws;
  const auto close = subs.closeness(draw_joint, draw_product, flat_size, plan.bound_factor * tau_prod, cfg.eps,
                                    plan.closeness_delta, cfg.estimators, rng);
  v.account.closeness = draws - before;
  v.stage_log.push_back(Stage::Closeness);
  v.outcome = close.outcome == TestOutcome::Accept ? Outcome::Accept : Outcome::Reject;
  return v;
}

Sampler permuted_sampler(const Sampler& s, std::vector<std::size_t> perm) {
  std::vector<std::size_t> dims;
  for (auto a : perm) dims.push_back(s.domain.dim(a));
  return {ProductDomain(std::move(dims)), [inner = s, perm](Rng& r) {
            return permute_index(inner.draw(r), inner.domain, perm);
          }};
}

// Axis order by non-increasing size; stable, so equal sizes keep their order.
std::vector<std::size_t> descending_order(std::span<const std::size_t> dims) {
  std::vector<std::size_t> order(dims.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dims[a] > dims[b]; });
  return order;
}

bool is_identity(std::span<const std::size_t> perm) {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] != i) return false;
  }
  return true;
}

// Routes a 3-axis problem to the 3D tester after sorting its axes.
Verdict sorted_3d(const Sampler& sampler, const Prediction& pred, const TesterConfig& cfg, Rng& rng,
                  Subroutines& subs) {
  const auto order = descending_order(sampler.domain.dims());
  if (is_identity(order)) return aug_independence_3d(sampler, pred, cfg, rng, subs);
  return aug_independence_3d(permuted_sampler(sampler, order), permute_axes(pred, order), cfg, rng, subs);
}

}  // namespace

Verdict aug_independence_2d(const Sampler& sampler, const Prediction& pred, const TesterConfig& cfg, Rng& rng,
                            Subroutines& subs) {
  cfg.validate();
  check_shapes(sampler, pred);
  if (sampler.domain.rank() != 2) throw std::invalid_argument("aug_independence_2d: domain must have two axes");
  const std::size_t n = sampler.domain.dim(0), m = sampler.domain.dim(1);
  if (n < m) {
    const std::array<std::size_t, 2> swap{1, 0};
    return aug_independence_2d(permuted_sampler(sampler, {1, 0}), permute_axes(pred, swap), cfg, rng, subs);
  }
  const double c = cfg.constants.norm_gate_2d;
  GatePlan plan;
  plan.sizes = {first_axis_sample_size_2d(n, m, cfg.alpha, cfg.eps), other_axis_sample_size(m, cfg.alpha)};
  plan.cap = cfg.constants.poisson_cap_2d;
  plan.norm_gate = c;
  plan.joint_factor = 10.0 * c * c;
  plan.bound_factor = 4.0 * c * c;
  plan.norm_delta = 1.0 / 120.0;
  plan.closeness_delta = 1.0 / 80.0;
  return run_flattened_tester(sampler, pred, plan, cfg, rng, subs);
}

Verdict aug_independence_3d(const Sampler& sampler, const Prediction& pred, const TesterConfig& cfg, Rng& rng,
                            Subroutines& subs) {
  cfg.validate();
  check_shapes(sampler, pred);
  const auto& dom = sampler.domain;
  if (dom.rank() != 3) throw std::invalid_argument("aug_independence_3d: domain must have three axes");
  const std::size_t n1 = dom.dim(0), n2 = dom.dim(1), n3 = dom.dim(2);
  if (n1 < n2 || n2 < n3) throw std::invalid_argument("aug_independence_3d: axes must satisfy n1 >= n2 >= n3");
  const double g = cfg.constants.norm_gate_3d;
  GatePlan plan;
  plan.sizes = {first_axis_sample_size_3d(n1, n2, n3, cfg.alpha, cfg.eps), other_axis_sample_size(n2, cfg.alpha),
                other_axis_sample_size(n3, cfg.alpha)};
  plan.cap = cfg.constants.poisson_cap_3d;
  plan.norm_gate = g;
  plan.joint_factor = 6.0 * g * g * g;
  plan.bound_factor = 6.0 * g * g * g;
  plan.norm_delta = 1.0 / 180.0;
  plan.closeness_delta = 1.0 / 120.0;
  return run_flattened_tester(sampler, pred, plan, cfg, rng, subs);
}

CoordinatePartition partition_coordinates(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw std::invalid_argument("partition_coordinates: need at least two axes");
  CoordinatePartition part;
  part.order = descending_order(dims);
  std::size_t total = 1;
  for (auto d : dims) total *= d;

  // Compare squares to keep the sqrt(N) tests exact.
  const auto at_least_root = [total](std::size_t x) {
    return static_cast<u128>(x) * x >= total;
  };
  const auto& order = part.order;
  part.first = order[0];
  const std::size_t d = dims.size();
  std::size_t t = d;
  if (!at_least_root(dims[order[0]])) {
    std::size_t prefix = 1;
    for (std::size_t i = 0; i < d; ++i) {
      prefix *= dims[order[i]];
      if (at_least_root(prefix)) {
        t = i + 1;
        break;
      }
    }
  }
  for (std::size_t i = 1; i < t; ++i) {
    part.block_b.push_back(order[i]);
    part.size_b *= dims[order[i]];
  }
  for (std::size_t i = t; i < d; ++i) {
    part.block_c.push_back(order[i]);
    part.size_c *= dims[order[i]];
  }
  return part;
}

std::uint64_t learning_budget(const ProductDomain& domain, double eps, double delta) {
  const double delta_axes = delta / static_cast<double>(domain.rank() + 1);
  const double eta = eps / 7.0;
  return static_cast<std::uint64_t>(
      std::ceil((static_cast<double>(domain.size()) + std::log(1.0 / delta_axes)) / (eta * eta)));
}

LearningResult test_independence_by_learning(const Sampler& sampler, double eps, double delta, Rng& rng) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("test_independence_by_learning: eps must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("test_independence_by_learning: delta must lie in (0, 1)");
  }
  LearningResult res;
  if (sampler.domain.rank() == 1) return res;  // one coordinate is trivially a product
  res.budget = learning_budget(sampler.domain, eps, delta);
  const auto empirical = learn_empirical(sampler.draw, sampler.domain, res.budget, rng);
  res.samples = res.budget;
  res.distance = empirical_tv_to_product(empirical);
  res.outcome = res.distance <= 6.0 * eps / 7.0 ? TestOutcome::Accept : TestOutcome::Reject;
  return res;
}

namespace {

// Sampler of the block of `axes` (in the order given) from draws of `joint`.
Sampler projected_sampler(const Sampler& joint, const std::vector<std::size_t>& axes) {
  std::vector<std::size_t> dims;
  for (auto a : axes) dims.push_back(joint.domain.dim(a));
  return {ProductDomain(std::move(dims)), [&joint, axes](Rng& r) {
            const Index x = joint.draw(r);
            Index out = 0;
            for (auto a : axes) out = out * joint.domain.dim(a) + joint.domain.coordinate(x, a);
            return out;
          }};
}

}  // namespace

Verdict aug_independence_d(const Sampler& sampler, const Prediction& pred, const TesterConfig& cfg, Rng& rng,
                           Subroutines& subs) {
  cfg.validate();
  check_shapes(sampler, pred);
  const auto& dom = sampler.domain;
  if (dom.rank() < 2) throw std::invalid_argument("aug_independence_d: need at least two axes");
  if (dom.rank() == 2) return aug_independence_2d(sampler, pred, cfg, rng, subs);
  if (dom.rank() == 3) return sorted_3d(sampler, pred, cfg, rng, subs);

  const auto part = partition_coordinates(dom.dims());
  TesterConfig inner = cfg;
  inner.eps = cfg.eps / 12.0;
  inner.delta = cfg.delta / 5.0;

  std::uint64_t draws = 0;
  const Sampler counted{dom, [&](Rng& r) {
                          ++draws;
                          return sampler.draw(r);
                        }};

  // Sort axes, then merge {first}, B (and C) into a 2- or 3-axis view. Merging
  // contiguous axes keeps the row-major index.
  const Sampler sorted = permuted_sampler(counted, part.order);
  const auto sorted_pred = permute_axes(pred, part.order);
  std::vector<std::size_t> view_dims{dom.dim(part.first), part.size_b};
  if (part.three_groups()) view_dims.push_back(part.size_c);
  const Sampler view{ProductDomain(view_dims), sorted.draw};
  const auto view_pred = reshape(sorted_pred, view_dims);

  Verdict v = part.three_groups() ? sorted_3d(view, view_pred, inner, rng, subs)
                                  : aug_independence_2d(view, view_pred, inner, rng, subs);
  if (v.outcome != Outcome::Accept) return v;

  const std::uint64_t before = draws;
  bool reject = false;
  for (const auto* block : {&part.block_b, &part.block_c}) {
    if (block->empty()) continue;
    const auto res = test_independence_by_learning(projected_sampler(counted, *block), inner.eps, inner.delta, rng);
    if (res.outcome == TestOutcome::Reject) reject = true;
  }
  v.account.learning = draws - before;
  v.stage_log.push_back(Stage::Learning);
  v.outcome = reject ? Outcome::Reject : Outcome::Accept;
  return v;
}

std::size_t amplification_runs(double delta_target) {
  if (!(delta_target > 0.0 && delta_target < 1.0)) {
    throw std::invalid_argument("amplification_runs: delta_target must lie in (0, 1)");
  }
  return 2 * static_cast<std::size_t>(std::ceil(12.0 * std::log(1.0 / delta_target))) + 1;
}

Verdict amplify_runs(const TesterFn& tester, std::size_t runs, Rng& rng) {
  if (runs == 0) throw std::invalid_argument("amplify_runs: need at least one run");
  std::array<std::size_t, 3> tally{};
  std::vector<Verdict> verdicts;
  verdicts.reserve(runs);
  SampleAccount total;
  for (std::size_t i = 0; i < runs; ++i) {
    Rng child = rng.fork();
    verdicts.push_back(tester(child));
    total += verdicts.back().account;
    ++tally[static_cast<std::size_t>(verdicts.back().outcome)];
  }
  const auto top = *std::max_element(tally.begin(), tally.end());
  const auto tied = std::count(tally.begin(), tally.end(), top);
  Outcome winner = Outcome::Reject;
  if (tied == 1) winner = static_cast<Outcome>(std::max_element(tally.begin(), tally.end()) - tally.begin());

  Verdict out;
  out.outcome = winner;
  out.account = total;
  auto match = std::find_if(verdicts.begin(), verdicts.end(), [&](const Verdict& v) { return v.outcome == winner; });
  // A tie between Accept and InaccurateInformation yields Reject with no run
  // behind it; report the closeness stage in that case.
  out.stage_log = match != verdicts.end() ? match->stage_log : std::vector<Stage>{Stage::Closeness};
  return out;
}

Verdict amplify(const TesterFn& tester, double delta_target, Rng& rng) {
  if (!(delta_target > 0.0 && delta_target < 0.1)) {
    throw std::invalid_argument("amplify: delta_target must lie in (0, 0.1)");
  }
  return amplify_runs(tester, amplification_runs(delta_target), rng);
}

}  // namespace augtest
