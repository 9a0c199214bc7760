#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "augtest/io.hpp"
#include "augtest/testers.hpp"

namespace augtest {

enum class TesterKind { TwoD, ThreeD, D, Learn };

std::string_view to_string(TesterKind k) noexcept;
TesterKind tester_kind_from_string(std::string_view s);

/// Monte-Carlo run description. The instance is either a distribution file or
/// a generator spec:
///   {"kind": "uniform", "dims": [...]}
///   {"kind": "product", "dims": [...]}            random marginals
///   {"kind": "hard", "n", "m", "k", "eps", "x", "factors"?, "require_valid"?}
/// The prediction is "exact", "uniform", or {"file": path}.
struct ExperimentConfig {
  TesterKind tester = TesterKind::TwoD;
  std::size_t trials = 1;
  double eps = 0.1;
  double alpha = 0.1;
  double delta = 0.1;
  Profile profile = Profile::Practical;
  std::uint64_t seed = 0;
  Json instance = Json::object();
  Json prediction = "exact";
  std::optional<EstimatorConfig> estimators;
  std::string output;
  std::size_t jobs = 1;
  /// Record wall time per trial. Off by default so reports are byte-stable.
  bool timing = false;

  void validate() const;
};

/// Parses a config; relative instance and prediction file paths resolve
/// against `base_dir`.
ExperimentConfig experiment_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json to_json(const ExperimentConfig& cfg);

struct ExperimentInstance {
  JointDistribution p;
  JointDistribution prediction;
};

/// Materializes the instance and prediction. Generated instances depend only
/// on the config seed.
ExperimentInstance build_instance(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {});

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Accept;
  std::optional<Stage> stage;
  SampleAccount samples;
  double ms = 0.0;

  bool operator==(const TrialRecord&) const = default;
};

struct RateInterval {
  double rate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval at z = 1.96.
RateInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct Summary {
  std::size_t trials = 0;
  std::size_t accepts = 0;
  std::size_t rejects = 0;
  std::size_t inaccurate = 0;
  RateInterval accept_rate;
  RateInterval reject_rate;
  RateInterval inacc_rate;
  double mean_samples = 0.0;
  double median_samples = 0.0;
  std::uint64_t max_samples = 0;
};

Summary summarize(const std::vector<TrialRecord>& records);

struct TrialReport {
  std::vector<TrialRecord> records;  // sorted by trial index
  Summary summary;
};

/// One trial on an already built instance; the rng stream is
/// trial_seed(cfg.seed, trial).
TrialRecord run_trial(const ExperimentConfig& cfg, const ExperimentInstance& inst, std::size_t trial);

TrialReport run_trials(const ExperimentConfig& cfg, const ExperimentInstance& inst);
TrialReport run_trials(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {});

struct SweepRow {
  double alpha = 0.0;
  Summary summary;
};

std::vector<SweepRow> sweep_alpha(const ExperimentConfig& cfg, const std::vector<double>& alphas,
                                  const std::filesystem::path& base_dir = {});
/// alpha,mean_samples,accept_rate,reject_rate,inacc_rate
std::string sweep_csv(const std::vector<SweepRow>& rows);

enum class ReportFormat { Csv, Json };

/// trial,seed,outcome,stage,samples_total,samples_flatten,samples_norm,samples_closeness,samples_learning,ms
std::string records_to_csv(const std::vector<TrialRecord>& records);
Json records_to_json(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> records_from_json(const Json& j);

void emit_report(const std::vector<TrialRecord>& records, ReportFormat format, const std::filesystem::path& path);

Json to_json(const Summary& s);

}  // namespace augtest
