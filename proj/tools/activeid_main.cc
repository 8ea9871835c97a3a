// Copyright 2026 The activeid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: estimate, plan, trial, sweep, check, config.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "activeid/checks.h"
#include "activeid/config.h"
#include "activeid/harness.h"
#include "activeid/logs.h"

namespace fs = std::filesystem;
using namespace activeid;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool no_estimation = false;
  std::optional<double> theta0;
};

TrialConfig BuildConfig(const CommonOptions& opt) {
  TrialConfig cfg = opt.config.empty() ? TrialConfig{} : LoadConfigFile(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.theta0) cfg.theta0 = *opt.theta0;
  if (opt.no_estimation) cfg.use_estimation = false;
  cfg.Validate();
  return cfg;
}

std::optional<fs::path> OutDir(const CommonOptions& opt) {
  if (opt.out.empty()) return std::nullopt;
  fs::create_directories(opt.out);
  return fs::path(opt.out);
}

TrialSummary Summarize(const TrialResult& r) {
  TrialSummary s;
  s.theta0 = r.theta0;
  s.use_estimation = r.use_estimation;
  s.theta_final = r.theta_final;
  s.success = r.success;
  for (int i = 0; i < 4; ++i) s.terminal_mass[i] = r.terminal_mass(i);
  s.iters_trajopt = r.plan.iterations;
  s.cost_final = r.plan.cost;
  return s;
}

void PrintTrial(const TrialResult& r) {
  std::printf("theta0 %.4f  estimation %s  theta_hat %.5f\n", r.theta0,
              r.use_estimation ? "on" : "off", r.theta_final);
  if (r.use_estimation) {
    for (const EstimateRecord& e : r.estimates) {
      std::printf("  t %.2f  theta_hat %.5f%s\n", e.t, e.theta_hat,
                  e.accepted ? "" : "  (unchanged)");
    }
    std::printf("  Fisher information of the excitation: %.4g\n",
                r.fisher_information);
  }
  std::printf("plan: %d iterations, cost %.6g, |DJ.zeta| %.2e\n",
              r.plan.iterations, r.plan.cost, std::abs(r.plan.dj));
  std::printf("terminal mass (%.4f, %.4f) m, velocity (%.4f, %.4f) m/s, miss "
              "%.4f m\n",
              r.terminal_mass(0), r.terminal_mass(1), r.terminal_mass(2),
              r.terminal_mass(3), r.miss);
  if (r.slack_steps > 0) {
    std::printf("warning: string went slack on %d steps\n", r.slack_steps);
  }
  if (!r.error.empty()) std::printf("error: %s\n", r.error.c_str());
  std::printf("result: %s\n", r.success ? "SUCCESS" : "FAIL");
}

int RunEstimate(const CommonOptions& opt) {
  TrialConfig cfg = BuildConfig(opt);
  const EstimationRun run = RunEstimation(cfg);
  for (const EstimateRecord& e : run.estimates) {
    std::printf("t %.2f  theta_hat %.5f  beta %.6g%s\n", e.t, e.theta_hat,
                e.beta_value, e.accepted ? "" : "  (unchanged)");
  }
  std::printf("final theta_hat %.5f m, Fisher information %.4g, %d SAC "
              "updates (%d null)\n",
              run.theta_final, run.fisher_information, run.sac_updates,
              run.null_actions);
  if (auto dir = OutDir(opt)) WriteCsvFile(run.log, *dir / "estimation.csv");
  return 0;
}

int RunPlan(const CommonOptions& opt, double length) {
  TrialConfig cfg = BuildConfig(opt);
  const SuspendedMass model(cfg.plant, cfg.force_model);
  const TaskPlan plan = OptimizeTask(model, length, cfg.task);
  const Trajectory<4> roll = Rollout(model, cfg.plant.ell, plan);
  const MassState planned = plan.xi.terminal_mass();
  const MassState actual = MassKinematics(roll.back(), cfg.plant.ell);
  std::printf("plan at %.4f m: %d iterations, cost %.6g, |DJ.zeta| %.2e\n",
              length, plan.iterations, plan.cost, std::abs(plan.dj));
  std::printf("planned terminal mass (%.4f, %.4f), on plant at %.4f m: "
              "(%.4f, %.4f), speed %.4f m/s, miss %.4f m\n",
              planned(0), planned(1), cfg.plant.ell, actual(0), actual(1),
              std::hypot(actual(2), actual(3)),
              MissDistance(actual, cfg.task.x_desired));
  std::printf("result: %s\n",
              SuccessCheck(actual, cfg.success) ? "SUCCESS" : "FAIL");
  if (auto dir = OutDir(opt)) {
    RunLog log;
    const Trajectory<4>& t = plan.xi.traj;
    for (std::size_t k = 0; k < t.states.size(); ++k) {
      LogRow r;
      r.t = t.time(k);
      r.xb = t.states[k](kXB);
      r.vb = t.states[k](kVB);
      r.phi = t.states[k](kPhi);
      r.phidot = t.states[k](kPhiDot);
      if (k < t.num_steps()) {
        r.u = t.controls[k];
        r.force_pred = model.Output(t.states[k], t.controls[k], length);
      }
      r.theta_hat = length;
      log.rows.push_back(r);
    }
    WriteCsvFile(log, *dir / "plan.csv");
  }
  return 0;
}

int RunTrialCommand(const CommonOptions& opt) {
  const TrialConfig cfg = BuildConfig(opt);
  const TrialResult r = RunTrial(cfg);
  PrintTrial(r);
  if (auto dir = OutDir(opt)) {
    if (r.use_estimation) WriteCsvFile(r.estimation_log, *dir / "estimation.csv");
    WriteCsvFile(r.task_log, *dir / "task.csv");
    WriteJsonFile(TrialJson(Summarize(r)), *dir / "trial.json");
  }
  return 0;
}

int RunSweepCommand(const CommonOptions& opt) {
  const TrialConfig cfg = BuildConfig(opt);
  const SweepResult sweep = RunSweep(cfg);
  std::fputs(FormatSweepTable(sweep, cfg.plant.ell).c_str(), stdout);
  for (const auto* column : {&sweep.with_estimation, &sweep.without_estimation}) {
    for (const TrialResult& r : *column) {
      if (!r.error.empty()) {
        std::printf("theta0 %.3f (%s): %s\n", r.theta0,
                    r.use_estimation ? "with" : "without", r.error.c_str());
      }
    }
  }
  if (auto dir = OutDir(opt)) {
    std::vector<TrialSummary> all;
    for (std::size_t i = 0; i < sweep.with_estimation.size(); ++i) {
      const TrialResult& w = sweep.with_estimation[i];
      const TrialResult& o = sweep.without_estimation[i];
      char stem[64];
      std::snprintf(stem, sizeof(stem), "trial_%.3f", w.theta0);
      WriteCsvFile(w.estimation_log, *dir / (std::string(stem) + "_estimation.csv"));
      WriteCsvFile(w.task_log, *dir / (std::string(stem) + "_task.csv"));
      WriteCsvFile(o.task_log, *dir / (std::string(stem) + "_noest_task.csv"));
      all.push_back(Summarize(w));
      all.push_back(Summarize(o));
    }
    WriteJsonFile(SweepJson(all, sweep.mean_theta, sweep.std_theta),
                  *dir / "sweep.json");
  }
  return 0;
}

int RunCheck(const CommonOptions& opt) {
  const TrialConfig cfg = BuildConfig(opt);
  std::vector<CheckResult> results = DerivativeOracleSuite(cfg, cfg.seed);
  results.push_back(StationarityCheck(cfg));
  results.push_back(PlanFidelityCheck(cfg));
  for (const CheckResult& r : results) {
    std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
  }
  return AllPassed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active parameter identification of a suspended mass"};
  app.require_subcommand(1);
  CommonOptions opt;
  app.add_option("--config", opt.config, "key = value config file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", opt.seed, "noise seed");
  app.add_option("--out", opt.out, "output directory for logs");
  app.add_flag("--no-estimation", opt.no_estimation,
               "skip the estimation stage and plan at theta0");
  app.add_option("--theta0", opt.theta0, "initial length estimate, m");

  auto* estimate = app.add_subcommand("estimate", "run the estimation stage");
  auto* plan = app.add_subcommand("plan", "plan the task at a given length");
  double length = 0.0;
  plan->add_option("--length", length, "string length used for planning, m")
      ->required();
  auto* trial = app.add_subcommand("trial", "estimate, plan, execute");
  auto* sweep = app.add_subcommand("sweep", "nine initial estimates, with "
                                            "and without estimation");
  auto* check = app.add_subcommand("check", "derivative and invariant suites");
  auto* config = app.add_subcommand("config", "print the effective config");
  for (auto* sub : {estimate, plan, trial, sweep, check, config}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);
  try {
    if (*estimate) return RunEstimate(opt);
    if (*plan) return RunPlan(opt, length);
    if (*trial) return RunTrialCommand(opt);
    if (*sweep) return RunSweepCommand(opt);
    if (*check) return RunCheck(opt);
    if (*config) {
      std::fputs(FormatConfig(BuildConfig(opt)).c_str(), stdout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
