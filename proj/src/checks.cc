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

#include "activeid/checks.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace activeid {

namespace {

constexpr int kPoints = 20;

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  State RandomState() {
    return State(Uniform(-0.5, 0.5), Uniform(-1.0, 1.0), Uniform(-1.0, 1.0),
                 Uniform(-3.0, 3.0));
  }
  Eigen::Vector4d RandomVector(double scale) {
    return Eigen::Vector4d(Uniform(-scale, scale), Uniform(-scale, scale),
                           Uniform(-scale, scale), Uniform(-scale, scale));
  }
  // Piecewise-constant accelerations, held for `hold` steps each.
  std::vector<double> RandomControls(int n, int hold, double amplitude) {
    std::vector<double> u(n);
    double level = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k % hold == 0) level = Uniform(-amplitude, amplitude);
      u[k] = level;
    }
    return u;
  }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

std::string Fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

// |a - b| / max(1, |b|), elementwise maximum.
template <typename A, typename B>
double MixedError(const A& a, const B& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a(i) - b(i)) /
                                std::max(1.0, std::abs(b(i))));
  }
  return worst;
}

double MixedError(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

CheckResult JacobianCheck(const SuspendedMass& model, Sampler& s) {
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (int p = 0; p < 100; ++p) {
    const State x = s.RandomState();
    const double u = s.Uniform(-5.0, 5.0);
    const double th = s.Uniform(0.25, 0.55);
    const Derivatives d = model.Jacobians(x, u, th);
    Mat4 fx;
    RowVec4 yx;
    for (int j = 0; j < 4; ++j) {
      State xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      fx.col(j) = (model.Dynamics(xp, u, th) - model.Dynamics(xm, u, th)) / (2 * h);
      yx(j) = (model.Output(xp, u, th) - model.Output(xm, u, th)) / (2 * h);
    }
    const State fth =
        (model.Dynamics(x, u, th + h) - model.Dynamics(x, u, th - h)) / (2 * h);
    const State fu =
        (model.Dynamics(x, u + h, th) - model.Dynamics(x, u - h, th)) / (2 * h);
    const double yth =
        (model.Output(x, u, th + h) - model.Output(x, u, th - h)) / (2 * h);
    const double yu =
        (model.Output(x, u + h, th) - model.Output(x, u - h, th)) / (2 * h);
    worst = std::max({worst, MixedError(d.fx.reshaped(), fx.reshaped()),
                      MixedError(d.ftheta, fth), MixedError(d.fu, fu),
                      MixedError(d.yx, yx), MixedError(d.ytheta, yth),
                      MixedError(d.yu, yu)});

    // Second-order terms against differences of the first-order ones.
    const Eigen::Vector4d psi = s.RandomVector(1.0);
    const SecondOrderTerms so = model.SecondOrder(x, psi, u, th);
    auto psidot = [&](const State& xx, double uu) -> State {
      const Derivatives e = model.Jacobians(xx, uu, th);
      return e.fx * psi + e.ftheta;
    };
    auto gamma = [&](const State& xx, double uu) {
      const Derivatives e = model.Jacobians(xx, uu, th);
      return e.yx.dot(psi) + e.ytheta;
    };
    Mat4 px;
    RowVec4 gx;
    for (int j = 0; j < 4; ++j) {
      State xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      px.col(j) = (psidot(xp, u) - psidot(xm, u)) / (2 * h);
      gx(j) = (gamma(xp, u) - gamma(xm, u)) / (2 * h);
    }
    const State pu = (psidot(x, u + h) - psidot(x, u - h)) / (2 * h);
    const double gu = (gamma(x, u + h) - gamma(x, u - h)) / (2 * h);
    worst = std::max({worst, MixedError(so.psidot_x.reshaped(), px.reshaped()),
                      MixedError(so.psidot_u, pu), MixedError(so.gamma_x, gx),
                      MixedError(so.gamma_u, gu)});
  }
  return {"jacobians (" + ToString(model.force_model()) + ")", worst <= 1e-4,
          Fmt("100 points, worst mixed relative error %.2e (tol 1e-4)", worst)};
}

std::vector<CheckResult> SensitivityChecks(const SuspendedMass& model,
                                           Sampler& s) {
  constexpr double delta = 1e-5;
  constexpr double dt = 0.01;
  double worst_psi = 0.0;
  double worst_gamma = 0.0;
  for (int p = 0; p < kPoints; ++p) {
    const double th = s.Uniform(0.25, 0.55);
    const std::vector<double> u = s.RandomControls(200, 10, 3.0);
    const Trajectory<8> ext =
        SimulateExtended(model, ExtendedState::Zero(), u, dt, th);
    const Trajectory<4> plus = SimulateState(model, State::Zero(), u, dt, th + delta);
    const Trajectory<4> minus = SimulateState(model, State::Zero(), u, dt, th - delta);
    for (std::size_t k = 0; k < u.size(); ++k) {
      const State fd = (plus.states[k] - minus.states[k]) / (2 * delta);
      worst_psi = std::max(
          worst_psi, (SensitivityOf(ext.states[k]) - fd).cwiseAbs().maxCoeff());
      const double gfd = (model.Output(plus.states[k], u[k], th + delta) -
                          model.Output(minus.states[k], u[k], th - delta)) /
                         (2 * delta);
      worst_gamma = std::max(
          worst_gamma, std::abs(GammaTheta(model, ext.states[k], u[k], th) - gfd));
    }
  }
  return {
      {"sensitivity psi", worst_psi <= 1e-4,
       Fmt("20 forced 2 s runs, max abs error %.2e (tol 1e-4)", worst_psi)},
      {"gamma_theta", worst_gamma <= 1e-4,
       Fmt("20 forced 2 s runs, max abs error %.2e (tol 1e-4)", worst_gamma)}};
}

CheckResult AdjointCheck(const SuspendedMass& model, const TrialConfig& cfg,
                         Sampler& s) {
  double worst = 0.0;
  bool terminal_zero = true;
  for (int p = 0; p < kPoints; ++p) {
    const double th = s.Uniform(0.25, 0.55);
    const ExtendedState xs0 = MakeExtended(
        State(s.Uniform(-0.2, 0.2), s.Uniform(-0.5, 0.5), s.Uniform(-0.5, 0.5),
              s.Uniform(-2.0, 2.0)),
        s.RandomVector(1.0));
    TrackingTerm tracking;
    tracking.q = s.RandomVector(1.0).cwiseAbs().asDiagonal();
    tracking.ref = s.RandomVector(0.1);
    const InformationCost cost(model, th, cfg.noise, cfg.sac.eps_info, tracking);
    const std::vector<double> zeros(cfg.sac.horizon_steps(), 0.0);
    const Trajectory<8> nominal =
        SimulateExtended(model, xs0, zeros, cfg.sac.dt, th);
    const AdjointTrajectory adj = ComputeAdjoint(model, nominal, cost, th);
    terminal_zero = terminal_zero && (adj.rho.back().array() == 0.0).all();

    ExtendedState dir;
    for (int i = 0; i < 8; ++i) dir(i) = s.Uniform(-1.0, 1.0);
    const ExtendedState delta = 1e-6 * dir.normalized();
    const double j0 = HorizonCost(cost, nominal);
    const double j1 = HorizonCost(
        cost, SimulateExtended(model, xs0 + delta, zeros, cfg.sac.dt, th));
    const double predicted = adj.rho.front().dot(delta);
    const double scale = adj.rho.front().norm() * delta.norm();
    worst = std::max(worst, std::abs((j1 - j0) - predicted) / scale);
  }
  return {"adjoint directional derivative", terminal_zero && worst <= 1e-3,
          Fmt("20 nominal trajectories, worst error %.2e of |rho||dx| "
              "(tol 1e-3), terminal rho zero: %g",
              worst, terminal_zero ? 1.0 : 0.0)};
}

MeasurementBuffer SyntheticBuffer(const SuspendedMass& model, double ell,
                                  const NoiseModel& noise, Sampler& s,
                                  int steps) {
  const double dt = 0.01;
  PlantSim plant(model, ell, noise, s.rng()(), dt);
  MeasurementBuffer buffer(0.0, dt, State::Zero());
  for (double u : s.RandomControls(steps, 20, 3.0)) {
    buffer.AddControl(u);
    buffer.AddSample(plant.Advance(u));
  }
  return buffer;
}

CheckResult BetaGradientCheck(const SuspendedMass& model,
                              const TrialConfig& cfg, Sampler& s) {
  const MeasurementBuffer buffer =
      SyntheticBuffer(model, cfg.plant.ell, cfg.noise, s, 300);
  constexpr double delta = 1e-6;
  double worst = 0.0;
  for (int p = 0; p < kPoints; ++p) {
    const double th = s.Uniform(0.30, 0.45);
    const double g = BetaGradient(model, th, buffer, cfg.noise);
    const double fd = (Beta(model, th + delta, buffer, cfg.noise) -
                       Beta(model, th - delta, buffer, cfg.noise)) /
                      (2 * delta);
    worst = std::max(worst, MixedError(g, fd));
  }
  return {"beta gradient", worst <= 1e-3,
          Fmt("20 random theta, worst mixed relative error %.2e (tol 1e-3)",
              worst)};
}

CheckResult FisherCheck(const NoiseModel& noise, Sampler& s) {
  bool ok = true;
  for (int p = 0; p < kPoints; ++p) {
    std::vector<double> a(1 + p), b(3 + p);
    for (double& v : a) v = s.Uniform(-2.0, 2.0);
    for (double& v : b) v = s.Uniform(-2.0, 2.0);
    std::vector<double> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const double ia = FisherInformation(a, noise);
    const double ib = FisherInformation(b, noise);
    const double iab = FisherInformation(ab, noise);
    ok = ok && ia > 0.0 && ib > 0.0 &&
         std::abs(iab - (ia + ib)) <= 1e-12 * iab;
    const std::vector<double> zeros(a.size(), 0.0);
    ok = ok && FisherInformation(zeros, noise) == 0.0;
  }
  return {"fisher information", ok,
          "20 sample sets: positive, zero on zero samples, additive"};
}

CheckResult ProjectionCheck(const SuspendedMass& model, const TrialConfig& cfg,
                            Sampler& s) {
  double worst = 0.0;
  double residual = 0.0;
  for (int p = 0; p < kPoints; ++p) {
    const double th = s.Uniform(0.25, 0.55);
    TaskTrajectory xi(SimulateState(model, cfg.task.x0,
                                    s.RandomControls(cfg.task.steps(), 25, 2.0),
                                    cfg.task.dt, th),
                      th);
    const Descent d = LqDescent(xi, Linearize(model, xi), cfg.task);
    const TaskTrajectory again = Project(model, th, xi.traj.states,
                                         xi.traj.controls, d.gains, cfg.task);
    for (std::size_t k = 0; k < xi.traj.states.size(); ++k) {
      worst = std::max(
          worst, (again.traj.states[k] - xi.traj.states[k]).cwiseAbs().maxCoeff());
    }
    residual = std::max(residual, DynamicsResidual(model, again));
  }
  return {"projection idempotence", worst == 0.0 && residual <= 1e-10,
          Fmt("20 feasible trajectories, max state change %.1e, dynamics "
              "residual %.1e",
              worst, residual)};
}

CheckResult TrajoptDescentCheck(const SuspendedMass& model,
                                const TrialConfig& cfg, Sampler& s) {
  bool ok = true;
  for (int p = 0; p < kPoints; ++p) {
    const double th = s.Uniform(0.25, 0.55);
    TaskTrajectory xi(SimulateState(model, cfg.task.x0,
                                    s.RandomControls(cfg.task.steps(), 25, 2.0),
                                    cfg.task.dt, th),
                      th);
    ok = ok && LqDescent(xi, Linearize(model, xi), cfg.task).dj <= 0.0;
  }
  int iterations = 0;
  for (double th : {0.308, 0.368, 0.468}) {
    const TaskPlan plan = OptimizeTask(model, th, cfg.task);
    iterations += plan.iterations;
    for (std::size_t i = 1; i < plan.cost_history.size(); ++i) {
      ok = ok && plan.cost_history[i] <= plan.cost_history[i - 1];
    }
    for (double dj : plan.dj_history) ok = ok && dj <= 0.0;
    ok = ok && DynamicsResidual(model, plan.xi) <= 1e-10;
  }
  return {"task optimizer descent", ok,
          "DJ.zeta <= 0 on 20 random trajectories; non-increasing cost over " +
              std::to_string(iterations) + " iterations at 3 lengths"};
}

CheckResult EstimatorDescentCheck(const SuspendedMass& model,
                                  const TrialConfig& cfg, Sampler& s) {
  const MeasurementBuffer buffer =
      SyntheticBuffer(model, cfg.plant.ell, cfg.noise, s, 400);
  bool ok = true;
  int accepted = 0;
  double theta = 0.448;
  double beta = Beta(model, theta, buffer, cfg.noise);
  for (int i = 0; i < 20; ++i) {
    const EstimateRecord r =
        EstimatorStep(model, theta, buffer, cfg.noise, cfg.estimator);
    if (r.accepted) {
      ++accepted;
      ok = ok && r.beta_value <= beta;
      beta = r.beta_value;
    } else {
      ok = ok && r.theta_hat == theta;
    }
    theta = r.theta_hat;
    ok = ok && theta >= cfg.estimator.theta_min && theta <= cfg.estimator.theta_max;
  }
  return {"estimator descent", ok && accepted > 0,
          Fmt("%g accepted steps from 0.448, accepted beta non-increasing, "
              "final %.5f",
              accepted, theta)};
}

CheckResult DeterminismCheck(const TrialConfig& cfg) {
  TrialConfig c = cfg;
  c.theta0 = 0.408;
  c.use_estimation = true;
  c.seed = cfg.seed + 7;
  const TrialResult a = RunTrial(c);
  const TrialResult b = RunTrial(c);
  const bool same = a.estimation_log.rows == b.estimation_log.rows &&
                    a.task_log.rows == b.task_log.rows &&
                    a.theta_final == b.theta_final &&
                    a.terminal_mass == b.terminal_mass &&
                    a.success == b.success && a.plan.cost == b.plan.cost;
  return {"determinism", same && a.error.empty(),
          "two runs of one (config, seed) give identical logs and results"};
}

}  // namespace

bool AllPassed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.passed; });
}

std::vector<CheckResult> DerivativeOracleSuite(const TrialConfig& cfg,
                                               std::uint64_t seed) {
  Sampler s(seed);
  const SuspendedMass model(cfg.plant, cfg.force_model);
  const SuspendedMass other(cfg.plant, cfg.force_model == ForceModel::kNominal
                                           ? ForceModel::kDerivedTension
                                           : ForceModel::kNominal);
  std::vector<CheckResult> out;
  out.push_back(JacobianCheck(model, s));
  out.push_back(JacobianCheck(other, s));
  for (CheckResult& r : SensitivityChecks(model, s)) out.push_back(r);
  out.push_back(AdjointCheck(model, cfg, s));
  out.push_back(BetaGradientCheck(model, cfg, s));
  out.push_back(FisherCheck(cfg.noise, s));
  out.push_back(ProjectionCheck(model, cfg, s));
  out.push_back(TrajoptDescentCheck(model, cfg, s));
  out.push_back(EstimatorDescentCheck(model, cfg, s));
  out.push_back(DeterminismCheck(cfg));
  return out;
}

CheckResult StationarityCheck(const TrialConfig& cfg) {
  const SuspendedMass model(cfg.plant, cfg.force_model);
  const int n = static_cast<int>(std::lround(cfg.est_duration / cfg.dt));
  const std::vector<double> zeros(n, 0.0);
  double total = 0.0;
  for (double th : {0.25, cfg.plant.ell, 0.55}) {
    const Prediction p = Observe(model, zeros, th, State::Zero(), cfg.dt);
    total += FisherInformation(p.gamma, cfg.noise);
  }
  return {"stationarity null case", total == 0.0,
          Fmt("Fisher information of the %.0f s rest trajectory = %g",
              cfg.est_duration, total)};
}

CheckResult PlanFidelityCheck(const TrialConfig& cfg) {
  const SuspendedMass model(cfg.plant, cfg.force_model);
  const double ell = cfg.plant.ell;
  const double short_ell = ell - 0.04;
  const TaskPlan good = OptimizeTask(model, ell, cfg.task);
  const TaskPlan bad = OptimizeTask(model, short_ell, cfg.task);
  const MassState end_good = MassKinematics(Rollout(model, ell, good).back(), ell);
  const MassState end_bad = MassKinematics(Rollout(model, ell, bad).back(), ell);
  const double miss_good = MissDistance(end_good, cfg.task.x_desired);
  const double miss_bad = MissDistance(end_bad, cfg.task.x_desired);
  const double speed = std::hypot(end_good(2), end_good(3));
  const bool ok = miss_good <= 0.05 && speed <= 0.2 && miss_bad > 0.05 &&
                  std::abs(good.dj) < cfg.task.tol &&
                  std::abs(bad.dj) < cfg.task.tol && good.iterations <= 200 &&
                  bad.iterations <= 200;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "plan at %.3f: miss %.4f m, speed %.3f m/s, %d iters; plan at "
                "%.3f: miss %.4f m, %d iters",
                ell, miss_good, speed, good.iterations, short_ell, miss_bad,
                bad.iterations);
  return {"task-plan fidelity", ok, buf};
}

double SettleTime(const std::vector<EstimateRecord>& history, double truth,
                  double band) {
  double settle = std::numeric_limits<double>::infinity();
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (std::abs(it->theta_hat - truth) > band) break;
    settle = it->t;
  }
  return settle;
}

CheckResult EstimatorConvergenceCheck(const SweepResult& sweep,
                                      const TrialConfig& cfg) {
  const double ell = cfg.plant.ell;
  double worst = 0.0;
  double latest = 0.0;
  double earliest = std::numeric_limits<double>::infinity();
  bool errors = false;
  for (const TrialResult& r : sweep.with_estimation) {
    errors = errors || !r.error.empty();
    worst = std::max(worst, std::abs(r.theta_final - ell));
    const double settle = SettleTime(r.estimates, ell, 0.005);
    latest = std::max(latest, settle);
    earliest = std::min(earliest, settle);
  }
  const bool ok = !errors && sweep.with_estimation.size() == 9 &&
                  worst <= 0.005 && sweep.std_theta <= 0.0042 && latest <= 4.0;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "max |err| %.5f m (tol 0.005), mean %.5f, std %.5f m (tol "
                "0.0042), settle within 0.005 m at %.1f-%.1f s (tol <= 4 s)",
                worst, sweep.mean_theta, sweep.std_theta, earliest, latest);
  return {"estimator convergence", ok, buf};
}

CheckResult SweepTableCheck(const SweepResult& sweep, const TrialConfig& cfg) {
  const double ell = cfg.plant.ell;
  int with_ok = 0;
  bool pattern = true;
  for (const TrialResult& r : sweep.with_estimation) with_ok += r.success;
  int without_ok = 0;
  for (const TrialResult& r : sweep.without_estimation) {
    without_ok += r.success;
    const double off = std::abs(r.theta0 - ell);
    if (off < 1e-9) pattern = pattern && r.success;
    if (off >= 0.04 - 1e-9) pattern = pattern && !r.success;
  }
  const bool ok = with_ok == 9 && sweep.with_estimation.size() == 9 && pattern;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "with estimation %d/9 success; without %d/9, pattern "
                "(success at %.3f, fail at |dl| >= 0.04) %s",
                with_ok, without_ok, ell, pattern ? "holds" : "violated");
  return {"sweep table", ok, buf};
}

std::string FormatSweepTable(const SweepResult& sweep, double ell_true) {
  std::string out =
      "theta0   with estimation              without estimation\n";
  for (std::size_t i = 0; i < sweep.with_estimation.size(); ++i) {
    const TrialResult& w = sweep.with_estimation[i];
    const TrialResult* o = i < sweep.without_estimation.size()
                               ? &sweep.without_estimation[i]
                               : nullptr;
    char line[200];
    std::snprintf(line, sizeof(line), "%.3f%s  %-7s (theta_hat %.4f)      %s\n",
                  w.theta0, std::abs(w.theta0 - ell_true) < 1e-9 ? "*" : " ",
                  w.success ? "Success" : "Fail", w.theta_final,
                  o ? (o->success ? "Success" : "Fail") : "-");
    out += line;
  }
  char tail[120];
  std::snprintf(tail, sizeof(tail),
                "mean theta_hat %.4f m, std %.4f m (* = true length)\n",
                sweep.mean_theta, sweep.std_theta);
  return out + tail;
}

}  // namespace activeid
