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

#include "activeid/harness.h"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace activeid {

namespace {

int Steps(double duration, double dt) {
  return static_cast<int>(std::lround(duration / dt));
}

bool IsMultiple(double a, double b) {
  return std::abs(a / b - std::round(a / b)) < 1e-9;
}

LogRow RowFromState(double t, const State& x) {
  LogRow r;
  r.t = t;
  r.xb = x(kXB);
  r.vb = x(kVB);
  r.phi = x(kPhi);
  r.phidot = x(kPhiDot);
  return r;
}

EstimationRun RunEstimation(const TrialConfig& cfg, const SuspendedMass& model,
                            PlantSim& plant) {
  const double dt = cfg.dt;
  const int n = Steps(cfg.est_duration, dt);
  const int lead = Steps(cfg.quiescent_lead, dt);
  const int every = Steps(cfg.sac.loop_dt, dt);

  // Stage 1 always starts from rest at the origin at t = 0.
  plant.Reset(State::Zero(), 0.0);
  EstimationRun run;
  run.buffer = MeasurementBuffer(0.0, dt, State::Zero());
  OnlineEstimator estimator(model, cfg.noise, cfg.estimator, cfg.theta0);
  EstimateProvider provider({0.0, estimator.theta(), ExtendedState::Zero()});
  SacController controller(model, cfg.noise, cfg.sac, lead * dt, 0.0);
  const int slack_before = plant.slack_steps();

  for (int k = 0; k <= n; ++k) {
    const double t = k * dt;
    if (estimator.Due(t)) estimator.Tick(t, run.buffer, &provider);
    if (k == n) break;

    if (k >= lead && (k - lead) % every == 0) {
      // Re-anchor on the newest published observer state, carried forward
      // through the controls applied since.
      const EstimateSnapshot snap = provider.Read();
      const std::size_t from = static_cast<std::size_t>(Steps(snap.t, dt));
      const std::span<const double> since(run.buffer.controls().data() + from,
                                          run.buffer.controls().size() - from);
      const ExtendedState xs =
          SimulateExtended(model, snap.state, since, dt, snap.theta, snap.t)
              .back();
      const Action& action = controller.Update(t, xs, snap.theta);
      ++run.sac_updates;
      if (action.is_null()) ++run.null_actions;
    }

    const Control u = k >= lead ? controller.ControlAt(t) : 0.0;
    LogRow row = RowFromState(t, plant.state());
    const Measurement m = plant.Advance(u);
    run.buffer.AddControl(u);
    run.buffer.AddSample(m);
    row.u = u;
    row.force_meas = m.force;
    row.theta_hat = provider.Read().theta;
    run.log.rows.push_back(row);
  }

  run.estimates = estimator.history();
  run.theta_final = estimator.theta();
  run.slack_steps = plant.slack_steps() - slack_before;

  const Prediction pred = Observe(model, run.buffer.controls(), run.theta_final,
                                  run.buffer.x0(), dt);
  for (std::size_t k = 0; k < run.log.rows.size(); ++k) {
    run.log.rows[k].force_pred = pred.force[k];
  }
  const Prediction truth = Observe(model, run.buffer.controls(), plant.ell(),
                                   run.buffer.x0(), dt);
  run.fisher_information = FisherInformation(
      std::span<const double>(truth.gamma.data(), run.buffer.samples().size()),
      cfg.noise);
  return run;
}

}  // namespace

PlantSim::PlantSim(const SuspendedMass& model, double ell,
                   const NoiseModel& noise, std::uint64_t seed, double dt)
    : model_(model),
      ell_(ell),
      noise_(noise),
      dt_(dt),
      rng_(seed),
      normal_(0.0, std::sqrt(noise.sigma2)) {
  noise_.Validate();
  if (!(ell > 0.0)) throw std::invalid_argument("plant: ell must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("plant: dt must be > 0");
}

void PlantSim::Reset(const State& x, double t) {
  if (!x.allFinite()) throw std::invalid_argument("plant: non-finite reset state");
  x_ = x;
  t_ = t;
  reset_t_ = t;
  since_reset_ = 0;
}

double PlantSim::TrueForce(Control u) const {
  return model_.Output(x_, u, ell_);
}

Measurement PlantSim::Sample(Control u) {
  return {t_, TrueForce(u) + normal_(rng_)};
}

void PlantSim::Step(Control u) {
  if (model_.Tension(x_, u, ell_) <= 0.0) {
    if (slack_steps_ == 0) {
      std::clog << "warning: string tension non-positive at t=" << t_
                << " s; the taut-string model no longer holds\n";
    }
    ++slack_steps_;
  }
  auto rhs = [&](double, const State& x, double v) {
    return model_.Dynamics(x, v, ell_);
  };
  State next;
  try {
    next = Rk4Step<4>(rhs, t_, x_, u, dt_);
  } catch (const std::invalid_argument&) {
    throw DivergenceError("plant: non-finite stage state", step_);
  }
  if (!next.allFinite()) throw DivergenceError("plant: non-finite state", step_);
  x_ = next;
  ++step_;
  ++since_reset_;
  t_ = reset_t_ + static_cast<double>(since_reset_) * dt_;
}

Measurement PlantSim::Advance(Control u) {
  const Measurement m = Sample(u);
  Step(u);
  return m;
}

void SuccessGeometry::Validate() const {
  if (!(x_tol > 0.0) || !(v_max > 0.0)) {
    throw std::invalid_argument("success: tolerances must be > 0");
  }
}

bool SuccessCheck(const MassState& terminal, const SuccessGeometry& g) {
  const double speed = std::hypot(terminal(2), terminal(3));
  return std::abs(terminal(0) - g.x_target) <= g.x_tol &&
         terminal(1) >= g.z_rim && speed <= g.v_max;
}

double MissDistance(const MassState& terminal, const MassState& target) {
  return std::hypot(terminal(0) - target(0), terminal(1) - target(1));
}

void TrialConfig::Validate() const {
  plant.Validate();
  noise.Validate();
  sac.Validate();
  estimator.Validate();
  task.Validate();
  success.Validate();
  if (!(dt > 0.0)) throw std::invalid_argument("trial: dt must be > 0");
  if (!(quiescent_lead >= 0.0) || !(est_duration > quiescent_lead)) {
    throw std::invalid_argument(
        "trial: need 0 <= quiescent_lead < est_duration");
  }
  if (std::abs(sac.dt - dt) > 1e-12 || std::abs(task.dt - dt) > 1e-12 ||
      !IsMultiple(sac.loop_dt, dt) || !IsMultiple(quiescent_lead, dt) ||
      !IsMultiple(est_duration, dt)) {
    throw std::invalid_argument(
        "trial: sac.dt and task.dt must equal trial.dt; loop_dt, "
        "quiescent_lead and est_duration must be multiples of it");
  }
  if (theta0 < estimator.theta_min || theta0 > estimator.theta_max) {
    throw std::invalid_argument("trial: theta0 outside the estimator bounds");
  }
}

EstimationRun RunEstimation(const TrialConfig& cfg) {
  cfg.Validate();
  const SuspendedMass model(cfg.plant, cfg.force_model);
  PlantSim plant(model, cfg.plant.ell, cfg.noise, cfg.seed, cfg.dt);
  return RunEstimation(cfg, model, plant);
}

Trajectory<4> Rollout(const SuspendedMass& model, double ell,
                      const TaskPlan& plan) {
  const Trajectory<4>& p = plan.xi.traj;
  return SimulateState(model, p.states.front(), p.controls, p.dt, ell, p.t0);
}

TrialResult RunTrial(const TrialConfig& cfg) {
  cfg.Validate();
  const SuspendedMass model(cfg.plant, cfg.force_model);
  PlantSim plant(model, cfg.plant.ell, cfg.noise, cfg.seed, cfg.dt);

  TrialResult r;
  r.theta0 = cfg.theta0;
  r.use_estimation = cfg.use_estimation;
  r.seed = cfg.seed;
  r.theta_final = cfg.theta0;
  if (cfg.use_estimation) {
    try {
      EstimationRun run = RunEstimation(cfg, model, plant);
      r.estimates = std::move(run.estimates);
      r.theta_final = run.theta_final;
      r.fisher_information = run.fisher_information;
      r.estimation_log = std::move(run.log);
      r.estimation_end = cfg.est_duration;
      r.estimator_ticks = static_cast<int>(r.estimates.size());
      r.sac_updates = run.sac_updates;
      r.slack_steps = run.slack_steps;
    } catch (const std::exception& e) {
      r.error = std::string("estimation: ") + e.what();
      return r;
    }
  }

  // The gripper returns to the origin and the mass settles; idealized as an
  // exact reset.
  plant.Reset(cfg.task.x0, 0.0);
  try {
    r.plan = OptimizeTask(model, r.theta_final, cfg.task);
    r.plan_converged = true;
  } catch (const TrajoptError& e) {
    r.plan = e.last();
    r.error = std::string("trajopt: ") + e.what() + " (|DJ.zeta| = " +
              std::to_string(std::abs(e.last().dj)) + ")";
  } catch (const std::exception& e) {
    r.error = std::string("trajopt: ") + e.what();
    return r;
  }
  if (r.plan.xi.traj.states.empty()) return r;

  const Trajectory<4>& planned = r.plan.xi.traj;
  const int slack_before = plant.slack_steps();
  r.rollout.t0 = planned.t0;
  r.rollout.dt = planned.dt;
  plant.Reset(planned.states.front(), planned.t0);
  try {
    for (std::size_t k = 0; k < planned.num_steps(); ++k) {
      const Control u = planned.controls[k];
      LogRow row = RowFromState(plant.time(), plant.state());
      r.rollout.states.push_back(plant.state());
      r.rollout.controls.push_back(u);
      row.u = u;
      row.force_meas = plant.Advance(u).force;
      row.force_pred = model.Output(planned.states[k], u, r.theta_final);
      row.theta_hat = r.theta_final;
      r.task_log.rows.push_back(row);
    }
  } catch (const DivergenceError& e) {
    r.error = std::string("rollout: ") + e.what();
    return r;
  }
  r.rollout.states.push_back(plant.state());
  LogRow last = RowFromState(plant.time(), plant.state());
  last.theta_hat = r.theta_final;
  r.task_log.rows.push_back(last);
  r.slack_steps += plant.slack_steps() - slack_before;

  r.terminal_mass = MassKinematics(r.rollout.back(), cfg.plant.ell);
  r.miss = MissDistance(r.terminal_mass, cfg.task.x_desired);
  r.success = r.plan_converged && SuccessCheck(r.terminal_mass, cfg.success);
  return r;
}

std::vector<double> SweepThetas() {
  std::vector<double> out;
  for (int i = 0; i < 9; ++i) out.push_back(0.308 + 0.02 * i);
  return out;
}

SweepResult RunSweep(const TrialConfig& base) {
  SweepResult sweep;
  const std::vector<double> thetas = SweepThetas();
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    for (bool estimate : {true, false}) {
      TrialConfig cfg = base;
      cfg.theta0 = thetas[i];
      cfg.use_estimation = estimate;
      cfg.seed = base.seed + i;
      TrialResult r;
      try {
        r = RunTrial(cfg);
      } catch (const std::exception& e) {
        r.theta0 = cfg.theta0;
        r.use_estimation = estimate;
        r.seed = cfg.seed;
        r.theta_final = cfg.theta0;
        r.error = e.what();
      }
      (estimate ? sweep.with_estimation : sweep.without_estimation)
          .push_back(std::move(r));
    }
  }
  const std::size_t n = sweep.with_estimation.size();
  for (const TrialResult& r : sweep.with_estimation) {
    sweep.mean_theta += r.theta_final / n;
  }
  double ss = 0.0;
  for (const TrialResult& r : sweep.with_estimation) {
    ss += (r.theta_final - sweep.mean_theta) * (r.theta_final - sweep.mean_theta);
  }
  sweep.std_theta = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return sweep;
}

}  // namespace activeid
