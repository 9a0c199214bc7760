#include "augtest/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace augtest {

namespace {

// Stream reserved for instance generation so it never collides with trial streams.
constexpr std::uint64_t kInstanceStream = 0x1257A9CEull;
constexpr std::size_t kMaxHardAttempts = 1000;

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

JointDistribution random_product(const std::vector<std::size_t>& dims, Rng& rng) {
  ProductDomain dom(dims);
  std::vector<std::vector<double>> marg;
  for (std::size_t n : dims) {
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) total += (x = 0.5 + rng.uniform());
    for (auto& x : w) x /= total;
    marg.push_back(std::move(w));
  }
  std::vector<double> probs(dom.size());
  for (Index i = 0; i < dom.size(); ++i) {
    double v = 1.0;
    for (std::size_t a = 0; a < dims.size(); ++a) v *= marg[a][dom.coordinate(i, a)];
    probs[i] = v;
  }
  double total = 0.0;
  for (double v : probs) total += v;
  for (double& v : probs) v /= total;
  return JointDistribution(dom, std::move(probs));
}

JointDistribution build_hard(const Json& spec, double alpha, Rng& rng) {
  HardParams hp;
  hp.n = spec.at("n").get<std::size_t>();
  hp.m = spec.at("m").get<std::size_t>();
  hp.k = spec.at("k").get<std::size_t>();
  hp.eps = spec.at("eps").get<double>();
  hp.alpha = spec.value("alpha", alpha);
  if (spec.contains("x")) hp.forced_x = spec.at("x").get<int>();
  const bool require_valid = spec.value("require_valid", true);
  for (std::size_t attempt = 0; attempt < kMaxHardAttempts; ++attempt) {
    auto inst = gen_hard_2d(hp, rng);
    auto counts = poissonized_counts(inst, rng);
    auto report = validity_check(inst, counts);
    if (require_valid && !(report.valid && report.conclusion_holds)) continue;
    if (spec.contains("factors")) {
      return embed_hard_to_d(inst, spec.at("factors").get<std::vector<std::size_t>>()).p;
    }
    return inst.p;
  }
  throw std::runtime_error("hard instance: no valid instance within the attempt limit");
}

}  // namespace

std::string_view to_string(TesterKind k) noexcept {
  switch (k) {
    case TesterKind::TwoD: return "2d";
    case TesterKind::ThreeD: return "3d";
    case TesterKind::D: return "d";
    case TesterKind::Learn: return "learn";
  }
  return "2d";
}

TesterKind tester_kind_from_string(std::string_view s) {
  if (s == "2d") return TesterKind::TwoD;
  if (s == "3d") return TesterKind::ThreeD;
  if (s == "d") return TesterKind::D;
  if (s == "learn") return TesterKind::Learn;
  throw std::invalid_argument("unknown tester '" + std::string(s) + "'");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("experiment: trials must be at least 1");
  if (jobs < 1) throw std::invalid_argument("experiment: jobs must be at least 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("experiment: eps must lie in (0, 1)");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("experiment: alpha must lie in [0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("experiment: delta must lie in (0, 1)");
  if (!instance.is_object() || (!instance.contains("file") && !instance.contains("kind"))) {
    throw std::invalid_argument("experiment: instance needs \"file\" or \"kind\"");
  }
}

ExperimentConfig experiment_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.tester = tester_kind_from_string(j.value("tester", std::string("2d")));
  cfg.trials = j.value("trials", cfg.trials);
  cfg.eps = j.value("eps", cfg.eps);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.delta = j.value("delta", cfg.delta);
  cfg.profile = profile_from_string(j.value("profile", std::string("practical")));
  cfg.seed = j.value("seed", cfg.seed);
  cfg.instance = j.value("instance", Json::object());
  cfg.prediction = j.value("prediction", Json("exact"));
  if (j.contains("estimators")) cfg.estimators = estimator_config_from_json(j.at("estimators"));
  cfg.output = j.value("output", std::string());
  cfg.jobs = j.value("jobs", cfg.jobs);
  cfg.timing = j.value("timing", false);
  if (cfg.instance.contains("file")) {
    cfg.instance["file"] = resolve(base_dir, cfg.instance["file"].get<std::string>()).string();
  }
  if (cfg.prediction.is_object() && cfg.prediction.contains("file")) {
    cfg.prediction["file"] = resolve(base_dir, cfg.prediction["file"].get<std::string>()).string();
  }
  cfg.validate();
  return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
  Json j{{"tester", to_string(cfg.tester)},
         {"trials", cfg.trials},
         {"eps", cfg.eps},
         {"alpha", cfg.alpha},
         {"delta", cfg.delta},
         {"profile", to_string(cfg.profile)},
         {"seed", cfg.seed},
         {"instance", cfg.instance},
         {"prediction", cfg.prediction},
         {"output", cfg.output},
         {"jobs", cfg.jobs},
         {"timing", cfg.timing}};
  if (cfg.estimators) j["estimators"] = to_json(*cfg.estimators);
  return j;
}

ExperimentInstance build_instance(const ExperimentConfig& cfg, const std::filesystem::path& base_dir) {
  const auto& spec = cfg.instance;
  Rng rng(cfg.seed, kInstanceStream);
  auto p = [&]() -> JointDistribution {
    if (spec.contains("file")) return load_distribution(resolve(base_dir, spec.at("file").get<std::string>()));
    const auto kind = spec.at("kind").get<std::string>();
    if (kind == "uniform") return JointDistribution::uniform(ProductDomain(spec.at("dims").get<std::vector<std::size_t>>()));
    if (kind == "product") return random_product(spec.at("dims").get<std::vector<std::size_t>>(), rng);
    if (kind == "hard") return build_hard(spec, cfg.alpha, rng);
    throw std::invalid_argument("unknown generator kind '" + kind + "'");
  }();

  const auto& pred = cfg.prediction;
  if (pred.is_string()) {
    const auto s = pred.get<std::string>();
    if (s == "exact") return {p, p};
    if (s == "uniform") return {p, JointDistribution::uniform(p.domain())};
    throw std::invalid_argument("unknown prediction '" + s + "'");
  }
  if (pred.is_object() && pred.contains("file")) {
    auto q = load_distribution(resolve(base_dir, pred.at("file").get<std::string>()));
    if (!(q.domain() == p.domain())) throw std::invalid_argument("prediction domain differs from the instance");
    return {std::move(p), std::move(q)};
  }
  throw std::invalid_argument("prediction must be \"exact\", \"uniform\" or {\"file\": ...}");
}

RateInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {phat, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

Summary summarize(const std::vector<TrialRecord>& records) {
  Summary s;
  s.trials = records.size();
  std::vector<std::uint64_t> totals;
  totals.reserve(records.size());
  double sum = 0.0;
  for (const auto& r : records) {
    switch (r.outcome) {
      case Outcome::Accept: ++s.accepts; break;
      case Outcome::Reject: ++s.rejects; break;
      case Outcome::InaccurateInformation: ++s.inaccurate; break;
    }
    totals.push_back(r.samples.total());
    sum += static_cast<double>(r.samples.total());
  }
  s.accept_rate = wilson_interval(s.accepts, s.trials);
  s.reject_rate = wilson_interval(s.rejects, s.trials);
  s.inacc_rate = wilson_interval(s.inaccurate, s.trials);
  if (!totals.empty()) {
    std::sort(totals.begin(), totals.end());
    s.mean_samples = sum / static_cast<double>(totals.size());
    const std::size_t mid = totals.size() / 2;
    s.median_samples = totals.size() % 2 == 1
                           ? static_cast<double>(totals[mid])
                           : 0.5 * (static_cast<double>(totals[mid - 1]) + static_cast<double>(totals[mid]));
    s.max_samples = totals.back();
  }
  return s;
}

TrialRecord run_trial(const ExperimentConfig& cfg, const ExperimentInstance& inst, std::size_t trial) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = trial_seed(cfg.seed, trial);
  Rng rng(rec.seed);
  const auto start = std::chrono::steady_clock::now();

  const Sampler sampler = make_sampler(inst.p);
  if (cfg.tester == TesterKind::Learn) {
    auto res = test_independence_by_learning(sampler, cfg.eps, cfg.delta, rng);
    rec.outcome = res.outcome == TestOutcome::Accept ? Outcome::Accept : Outcome::Reject;
    rec.stage = Stage::Learning;
    rec.samples.learning = res.samples;
  } else {
    auto tcfg = TesterConfig::make(cfg.eps, cfg.alpha, cfg.profile, cfg.delta);
    if (cfg.estimators) tcfg.estimators = *cfg.estimators;
    Verdict v;
    switch (cfg.tester) {
      case TesterKind::TwoD: v = aug_independence_2d(sampler, inst.prediction, tcfg, rng); break;
      case TesterKind::ThreeD: v = aug_independence_3d(sampler, inst.prediction, tcfg, rng); break;
      default: v = aug_independence_d(sampler, inst.prediction, tcfg, rng); break;
    }
    rec.outcome = v.outcome;
    if (!v.stage_log.empty()) rec.stage = v.stage();
    rec.samples = v.account;
  }
  if (cfg.timing) {
    rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return rec;
}

TrialReport run_trials(const ExperimentConfig& cfg, const ExperimentInstance& inst) {
  cfg.validate();
  TrialReport report;
  report.records.resize(cfg.trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < cfg.trials;) {
      try {
        report.records[t] = run_trial(cfg, inst, t);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(cfg.trials);
      }
    }
  };
  const std::size_t jobs = std::min(cfg.jobs, cfg.trials);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  report.summary = summarize(report.records);
  return report;
}

TrialReport run_trials(const ExperimentConfig& cfg, const std::filesystem::path& base_dir) {
  return run_trials(cfg, build_instance(cfg, base_dir));
}

std::vector<SweepRow> sweep_alpha(const ExperimentConfig& cfg, const std::vector<double>& alphas,
                                  const std::filesystem::path& base_dir) {
  if (alphas.empty()) throw std::invalid_argument("sweep_alpha: no alphas given");
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("sweep_alpha: every alpha must lie in (0, 1]");
  }
  std::vector<SweepRow> rows;
  for (double a : alphas) {
    ExperimentConfig c = cfg;
    c.alpha = a;
    rows.push_back({a, run_trials(c, base_dir).summary});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "alpha,mean_samples,accept_rate,reject_rate,inacc_rate\n";
  for (const auto& r : rows) {
    out << format_double(r.alpha) << ',' << format_double(r.summary.mean_samples) << ','
        << format_double(r.summary.accept_rate.rate) << ',' << format_double(r.summary.reject_rate.rate) << ','
        << format_double(r.summary.inacc_rate.rate) << '\n';
  }
  return out.str();
}

std::string records_to_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream out;
  out << "trial,seed,outcome,stage,samples_total,samples_flatten,samples_norm,samples_closeness,samples_learning,ms\n";
  for (const auto& r : records) {
    out << r.trial << ',' << r.seed << ',' << to_string(r.outcome) << ','
        << (r.stage ? to_string(*r.stage) : std::string_view{}) << ',' << r.samples.total() << ','
        << r.samples.flatten << ',' << r.samples.norm << ',' << r.samples.closeness << ',' << r.samples.learning
        << ',' << format_double(r.ms) << '\n';
  }
  return out.str();
}

Json records_to_json(const std::vector<TrialRecord>& records) {
  Json arr = Json::array();
  for (const auto& r : records) {
    arr.push_back(Json{{"trial", r.trial},
                       {"seed", r.seed},
                       {"outcome", to_string(r.outcome)},
                       {"stage", r.stage ? Json(to_string(*r.stage)) : Json(nullptr)},
                       {"samples", to_json(r.samples)},
                       {"ms", r.ms}});
  }
  return arr;
}

std::vector<TrialRecord> records_from_json(const Json& j) {
  std::vector<TrialRecord> out;
  for (const auto& e : j) {
    TrialRecord r;
    r.trial = e.at("trial").get<std::size_t>();
    r.seed = e.at("seed").get<std::uint64_t>();
    r.outcome = outcome_from_string(e.at("outcome").get<std::string>());
    if (!e.at("stage").is_null()) r.stage = stage_from_string(e.at("stage").get<std::string>());
    r.samples = account_from_json(e.at("samples"));
    r.ms = e.at("ms").get<double>();
    out.push_back(r);
  }
  return out;
}

void emit_report(const std::vector<TrialRecord>& records, ReportFormat format, const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("emit_report: no records");
  write_text_file(path, format == ReportFormat::Csv ? records_to_csv(records) : records_to_json(records).dump(2) + "\n");
}

Json to_json(const Summary& s) {
  auto rate = [](const RateInterval& r) { return Json{{"rate", r.rate}, {"lo", r.lo}, {"hi", r.hi}}; };
  return Json{{"trials", s.trials},
              {"accepts", s.accepts},
              {"rejects", s.rejects},
              {"inaccurate", s.inaccurate},
              {"accept_rate", rate(s.accept_rate)},
              {"reject_rate", rate(s.reject_rate)},
              {"inacc_rate", rate(s.inacc_rate)},
              {"mean_samples", s.mean_samples},
              {"median_samples", s.median_samples},
              {"max_samples", s.max_samples}};
}

}  // namespace augtest
