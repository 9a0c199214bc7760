#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "augtest/domain.hpp"
#include "augtest/estimators.hpp"

namespace augtest {

/// A full table over the tested domain, possibly wrong about p.
using Prediction = JointDistribution;

enum class Outcome { Accept, Reject, InaccurateInformation };

/// Which line of a tester decided (or was evaluated on the way).
enum class Stage { PoissonCap, NormGate, JointNorm, Closeness, Learning };

std::string_view to_string(Outcome o) noexcept;
std::string_view to_string(Stage s) noexcept;
Outcome outcome_from_string(std::string_view s);
Stage stage_from_string(std::string_view s);

struct Verdict {
  Outcome outcome = Outcome::Accept;
  SampleAccount account;
  /// Gates evaluated, in order; the last one decided the outcome.
  std::vector<Stage> stage_log;

  Stage stage() const { return stage_log.back(); }
  bool operator==(const Verdict&) const = default;
};

enum class Profile { Theory, Practical };

std::string_view to_string(Profile p) noexcept;
Profile profile_from_string(std::string_view s);

/// Gate constants. The 2D tester uses c (marginal norm gate, joint gate
/// 10c^2, closeness bound 4c^2) and c' (Poisson cap). The 3D tester uses its
/// own gate constant g (joint gate and closeness bound 6g^3) and cap.
struct TesterConstants {
  double norm_gate_2d = 120.0;
  double poisson_cap_2d = 160.0;
  double norm_gate_3d = 180.0;
  double poisson_cap_3d = 240.0;

  static TesterConstants theory() { return {}; }
  /// Every constant scaled by 1/20; same control flow.
  static TesterConstants practical() { return {6.0, 8.0, 9.0, 12.0}; }
};

struct TesterConfig {
  double eps = 0.1;
  double alpha = 0.0;
  double delta = 0.1;
  Profile profile = Profile::Practical;
  TesterConstants constants = TesterConstants::practical();
  EstimatorConfig estimators;

  static TesterConfig make(double eps, double alpha, Profile profile, double delta = 0.1);
  void validate() const;
};

/// Repetition multiplier of the practical profile's estimators.
inline constexpr double kPracticalRepetitionMult = 2.0;

/// The randomized subroutines a tester calls. Overridable so gate logic can be
/// driven with scripted values.
class Subroutines {
 public:
  virtual ~Subroutines() = default;
  virtual std::uint64_t poisson_draw(double mean, Rng& rng);
  virtual NormEstimate estimate_norm(const DrawFn& draw, std::size_t domain_size, double delta,
                                     const EstimatorConfig& cfg, Rng& rng);
  virtual ClosenessResult closeness(const DrawFn& draw_p, const DrawFn& draw_q, std::size_t domain_size,
                                    double b, double eps, double delta, const EstimatorConfig& cfg, Rng& rng);
};

Subroutines& default_subroutines();

/// Flattening sample sizes s_1 (capped by n alpha) and s_2 = m alpha, each
/// clamped to at least 1.
double first_axis_sample_size_2d(std::size_t n, std::size_t m, double alpha, double eps);
double first_axis_sample_size_3d(std::size_t n1, std::size_t n2, std::size_t n3, double alpha, double eps);
double other_axis_sample_size(std::size_t n, double alpha);
/// tau = 2 alpha / s + 4 / n.
double norm_budget(double alpha, double s, std::size_t n);

/// max(sqrt(nm) / eps^2, n^(2/3) m^(1/3) alpha^(1/3) / eps^(4/3)).
double sample_bound_2d(std::size_t n, std::size_t m, double alpha, double eps);

/// Practical-profile 2D runs stay below this multiple of sample_bound_2d.
/// Measured worst case on [100] x [20] at eps = 0.4 is about 2.3e4.
inline constexpr double kPracticalSampleBoundK = 5e4;

/// Augmented independence tester over [n] x [m]. Axes are swapped internally
/// when n < m.
Verdict aug_independence_2d(const Sampler& sampler, const Prediction& pred, const TesterConfig& cfg, Rng& rng,
                            Subroutines& subs = default_subroutines());

/// Augmented independence tester over [n1] x [n2] x [n3]; requires
/// n1 >= n2 >= n3.
Verdict aug_independence_3d(const Sampler& sampler, const Prediction& pred, const TesterConfig& cfg, Rng& rng,
                            Subroutines& subs = default_subroutines());

/// Coordinate grouping for the d-dimensional tester. `order` lists the
/// original axes by non-increasing size; `first`, `block_b` and `block_c`
/// hold original axis ids. `block_c` is empty in the two-group case.
struct CoordinatePartition {
  std::vector<std::size_t> order;
  std::size_t first = 0;
  std::vector<std::size_t> block_b;
  std::vector<std::size_t> block_c;
  std::size_t size_b = 1;
  std::size_t size_c = 1;

  bool three_groups() const noexcept { return !block_c.empty(); }
};

CoordinatePartition partition_coordinates(std::span<const std::size_t> dims);

struct LearningResult {
  TestOutcome outcome = TestOutcome::Accept;
  std::uint64_t samples = 0;
  std::uint64_t budget = 0;
  double distance = 0.0;
};

/// Sample budget ceil((N + ln(1/delta')) / eta^2) with eta = eps/7 and
/// delta' = delta / (axes + 1).
std::uint64_t learning_budget(const ProductDomain& domain, double eps, double delta);

/// Learns the empirical table and accepts iff its distance to the product of
/// its own marginals is at most 6 eps / 7. One-axis inputs accept at once.
LearningResult test_independence_by_learning(const Sampler& sampler, double eps, double delta, Rng& rng);

/// Augmented tester over any product domain with d >= 2. Rank 2 and 3 route to
/// the dedicated testers; larger ranks regroup into 2 or 3 blocks, test across
/// blocks at eps/12 and within blocks by learning.
Verdict aug_independence_d(const Sampler& sampler, const Prediction& pred, const TesterConfig& cfg, Rng& rng,
                           Subroutines& subs = default_subroutines());

using TesterFn = std::function<Verdict(Rng&)>;

/// 2 * ceil(12 ln(1/delta_target)) + 1.
std::size_t amplification_runs(double delta_target);

/// Runs `runs` independent copies and returns the most frequent outcome; any
/// tie for the top goes to Reject. Sample accounts are summed.
Verdict amplify_runs(const TesterFn& tester, std::size_t runs, Rng& rng);
Verdict amplify(const TesterFn& tester, double delta_target, Rng& rng);

}  // namespace augtest
