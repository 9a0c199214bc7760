// augtest: command-line front end for the augmented independence testers.
//
// Exit codes: 0 accept, 2 reject, 3 inaccurate information, 1 error.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "augtest/experiment.hpp"
#include "augtest/hard_instances.hpp"
#include "augtest/io.hpp"
#include "augtest/testers.hpp"

using namespace augtest;
namespace fs = std::filesystem;

namespace {

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::Accept: return 0;
    case Outcome::Reject: return 2;
    case Outcome::InaccurateInformation: return 3;
  }
  return 1;
}

struct TestArgs {
  std::string dist;
  std::string pred;
  double alpha = 0.1;
  double eps = 0.1;
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::string profile = "practical";
};

void add_test_options(CLI::App* cmd, TestArgs& a) {
  cmd->add_option("--dist", a.dist, "Distribution JSON {dims, probs}")->required()->check(CLI::ExistingFile);
  cmd->add_option("--pred", a.pred, "Prediction JSON {dims, probs}")->required()->check(CLI::ExistingFile);
  cmd->add_option("--alpha", a.alpha, "Claimed prediction error")->required();
  cmd->add_option("--eps", a.eps, "Proximity parameter")->required();
  cmd->add_option("--delta", a.delta, "Failure probability");
  cmd->add_option("--seed", a.seed, "RNG seed");
  cmd->add_option("--profile", a.profile, "Constant profile")->check(CLI::IsMember({"theory", "practical"}));
}

int run_tester(const TestArgs& a, TesterKind kind) {
  const auto p = load_distribution(a.dist);
  const auto pred = load_distribution(a.pred);
  const auto cfg = TesterConfig::make(a.eps, a.alpha, profile_from_string(a.profile), a.delta);
  Rng rng(a.seed);
  const Sampler sampler = make_sampler(p);
  Verdict v;
  switch (kind) {
    case TesterKind::TwoD: v = aug_independence_2d(sampler, pred, cfg, rng); break;
    case TesterKind::ThreeD: v = aug_independence_3d(sampler, pred, cfg, rng); break;
    default: v = aug_independence_d(sampler, pred, cfg, rng); break;
  }
  std::cout << to_json(v, a.seed).dump(2) << "\n";
  return exit_code(v.outcome);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Augmented independence testing"};
  app.require_subcommand(1);

  TestArgs t2, t3, td;
  auto* c2 = app.add_subcommand("test2d", "Two-axis augmented tester");
  add_test_options(c2, t2);
  auto* c3 = app.add_subcommand("test3d", "Three-axis augmented tester (n1 >= n2 >= n3)");
  add_test_options(c3, t3);
  auto* cd = app.add_subcommand("testd", "Augmented tester over any number of axes");
  add_test_options(cd, td);

  struct {
    std::string dist;
    std::vector<std::size_t> axes;
    double eps = 0.1, delta = 0.1;
    std::uint64_t seed = 0;
  } learn;
  auto* cl = app.add_subcommand("learn", "Independence by learning the empirical table");
  cl->add_option("--dist", learn.dist, "Distribution JSON")->required()->check(CLI::ExistingFile);
  cl->add_option("--axes", learn.axes, "Axes to test jointly (default: all)");
  cl->add_option("--eps", learn.eps, "Proximity parameter")->required();
  cl->add_option("--delta", learn.delta, "Failure probability");
  cl->add_option("--seed", learn.seed, "RNG seed");

  HardParams hp;
  std::uint64_t hard_seed = 0;
  std::string hard_out;
  std::optional<int> force_x;
  std::vector<std::size_t> factors;
  std::size_t hard_attempts = 1;
  auto* ch = app.add_subcommand("gen-hard", "Generate a heavy/light-row hard instance");
  ch->add_option("--n", hp.n, "Rows")->required();
  ch->add_option("--m", hp.m, "Columns")->required();
  ch->add_option("--k", hp.k, "Sample budget")->required();
  ch->add_option("--alpha", hp.alpha, "Prediction error")->required();
  ch->add_option("--eps", hp.eps, "Farness target, at most 1/192")->required();
  ch->add_option("--force-x", force_x, "Fix the hidden bit")->check(CLI::IsMember({0, 1}));
  ch->add_option("--eps-meas", hp.eps_meas_override, "Raw eps' override (voids guarantees)");
  ch->add_option("--alpha-meas", hp.alpha_meas_override, "Raw alpha' override (voids guarantees)");
  ch->add_option("--factors", factors, "Split the column axis into these factors");
  ch->add_option("--attempts", hard_attempts, "Regenerate until valid, at most this many times");
  ch->add_option("--seed", hard_seed, "RNG seed")->required();
  ch->add_option("--out", hard_out, "Output JSON path")->required();

  std::string bench_config, bench_out, bench_format = "csv";
  std::size_t bench_jobs = 0;
  bool bench_timing = false;
  auto* cb = app.add_subcommand("bench", "Monte-Carlo trials from an experiment config");
  cb->add_option("--config", bench_config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  cb->add_option("--out", bench_out, "Report path")->required();
  cb->add_option("--jobs", bench_jobs, "Concurrent trials");
  cb->add_option("--format", bench_format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  cb->add_flag("--timing", bench_timing, "Record wall time per trial (output no longer byte-stable)");

  std::string sweep_config, sweep_out;
  std::vector<double> alphas;
  std::size_t sweep_jobs = 0;
  auto* cs = app.add_subcommand("sweep-alpha", "Mean samples and outcome rates per alpha");
  cs->add_option("--config", sweep_config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  cs->add_option("--alphas", alphas, "Alpha values in (0, 1]")->required();
  cs->add_option("--out", sweep_out, "CSV path (default: stdout)");
  cs->add_option("--jobs", sweep_jobs, "Concurrent trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (c2->parsed()) return run_tester(t2, TesterKind::TwoD);
    if (c3->parsed()) return run_tester(t3, TesterKind::ThreeD);
    if (cd->parsed()) return run_tester(td, TesterKind::D);

    if (cl->parsed()) {
      auto p = load_distribution(learn.dist);
      if (!learn.axes.empty()) p = marginal(p, learn.axes);
      Rng rng(learn.seed);
      const auto res = test_independence_by_learning(make_sampler(p), learn.eps, learn.delta, rng);
      const Outcome o = res.outcome == TestOutcome::Accept ? Outcome::Accept : Outcome::Reject;
      std::cout << Json{{"outcome", to_string(o)},
                        {"stage", "learning"},
                        {"samples", res.samples},
                        {"distance", res.distance},
                        {"seed", learn.seed}}
                       .dump(2)
                << "\n";
      return exit_code(o);
    }

    if (ch->parsed()) {
      hp.forced_x = force_x;
      Rng rng(hard_seed);
      std::optional<Json> out;
      for (std::size_t a = 0; a < std::max<std::size_t>(1, hard_attempts); ++a) {
        const auto inst = gen_hard_2d(hp, rng);
        const auto counts = poissonized_counts(inst, rng);
        const auto report = validity_check(inst, counts);
        out = hard_instance_json(inst, report, hard_seed);
        if (!factors.empty()) (*out)["instance"] = to_json(embed_hard_to_d(inst, factors).p);
        for (const auto& w : inst.warnings) std::cerr << "warning: " << w << "\n";
        if (report.valid) break;
      }
      write_text_file(hard_out, out->dump() + "\n");
      return 0;
    }

    if (cb->parsed()) {
      const fs::path cfg_path(bench_config);
      auto cfg = experiment_config_from_json(read_json_file(cfg_path), cfg_path.parent_path());
      if (bench_jobs > 0) cfg.jobs = bench_jobs;
      cfg.timing = cfg.timing || bench_timing;
      const auto report = run_trials(cfg);
      emit_report(report.records, bench_format == "json" ? ReportFormat::Json : ReportFormat::Csv, bench_out);
      std::cout << to_json(report.summary).dump(2) << "\n";
      return 0;
    }

    if (cs->parsed()) {
      const fs::path cfg_path(sweep_config);
      auto cfg = experiment_config_from_json(read_json_file(cfg_path), cfg_path.parent_path());
      if (sweep_jobs > 0) cfg.jobs = sweep_jobs;
      const auto csv = sweep_csv(sweep_alpha(cfg, alphas));
      if (sweep_out.empty()) {
        std::cout << csv;
      } else {
        write_text_file(sweep_out, csv);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "augtest: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
