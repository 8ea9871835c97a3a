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

#include "activeid/sac.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace activeid {

namespace {

int Steps(double duration, double dt) {
  return static_cast<int>(std::lround(duration / dt));
}

}  // namespace

void SacConfig::Validate() const {
  if (!(loop_dt > 0.0) || !(horizon > loop_dt)) {
    throw std::invalid_argument("sac: need horizon > loop_dt > 0");
  }
  if (!(dt > 0.0) || dt > loop_dt) {
    throw std::invalid_argument("sac: need 0 < dt <= loop_dt");
  }
  if (!(r_sac > 0.0)) throw std::invalid_argument("sac: r_sac must be > 0");
  if (!(gamma_ad < 0.0)) throw std::invalid_argument("sac: gamma_ad must be < 0");
  if (!(u_max > 0.0)) throw std::invalid_argument("sac: u_max must be > 0");
  if (!(eps_info > 0.0)) throw std::invalid_argument("sac: eps_info must be > 0");
  if (!(dt_min > 0.0) || dt_init < dt_min) {
    throw std::invalid_argument("sac: need 0 < dt_min <= dt_init");
  }
  if (!(tau_window > 0.0) || tau_window > horizon) {
    throw std::invalid_argument("sac: need 0 < tau_window <= horizon");
  }
  if (!(bias_weight >= 0.0) || !(bias_duration >= 0.0)) {
    throw std::invalid_argument("sac: bias weight and duration must be >= 0");
  }
  const Mat4 sym = 0.5 * (tracking.q + tracking.q.transpose());
  if ((tracking.q - tracking.q.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
      Eigen::SelfAdjointEigenSolver<Mat4>(sym).eigenvalues().minCoeff() <
          -1e-12) {
    throw std::invalid_argument("sac: Q_tau must be symmetric PSD");
  }
}

int SacConfig::horizon_steps() const { return Steps(horizon, dt); }

InformationCost::InformationCost(const Model& model, double theta,
                                 const NoiseModel& noise, double eps_info,
                                 const TrackingTerm& tracking)
    : model_(model),
      theta_(theta),
      noise_(noise),
      eps_info_(eps_info),
      tracking_(tracking) {
  noise_.Validate();
}

double InformationCost::Value(const ExtendedState& xs, Control u) const {
  const double gamma = GammaTheta(model_, xs, u, theta_);
  const State e = StateOf(xs) - tracking_.ref;
  return 1.0 / (gamma * gamma / noise_.sigma2 + eps_info_) +
         e.dot(tracking_.q * e);
}

ExtendedState InformationCost::Gradient(const ExtendedState& xs,
                                        Control u) const {
  const double gamma = GammaTheta(model_, xs, u, theta_);
  const double denom = gamma * gamma / noise_.sigma2 + eps_info_;
  ExtendedState grad = -(2.0 * gamma / noise_.sigma2) / (denom * denom) *
                       GammaGradient(model_, xs, u, theta_);
  const State e = StateOf(xs) - tracking_.ref;
  grad.head<4>() += (tracking_.q + tracking_.q.transpose()) * e;
  return grad;
}

double RunningCostValue(const Model& model, const ExtendedState& xs,
                        Control u, double theta, const NoiseModel& noise,
                        const SacConfig& cfg, const TrackingTerm& tracking) {
  return InformationCost(model, theta, noise, cfg.eps_info, tracking)
      .Value(xs, u);
}

double HorizonCost(const RunningCost& cost, const Trajectory<8>& traj) {
  double total = 0.0;
  for (std::size_t k = 0; k < traj.num_steps(); ++k) {
    total += cost.Value(traj.states[k], 0.0);
  }
  return total * traj.dt;
}

AdjointTrajectory ComputeAdjoint(const Model& model,
                                 const Trajectory<8>& nominal,
                                 const RunningCost& cost, double theta) {
  nominal.Validate();
  const std::size_t n = nominal.num_steps();
  auto rhs = [&](double, const ExtendedState& xs, double u) {
    return ExtendedRhs(model, xs, u, theta);
  };
  auto jac_x = [&](double, const ExtendedState& xs, double u) {
    return ExtendedJacobian(model, xs, u, theta);
  };
  auto jac_u = [&](double, const ExtendedState& xs, double u) {
    return ExtendedControlField(model, xs, u, theta);
  };

  AdjointTrajectory adj;
  adj.times.resize(n + 1);
  adj.rho.assign(n + 1, ExtendedState::Zero());
  for (std::size_t k = 0; k <= n; ++k) adj.times[k] = nominal.time(k);
  for (std::size_t k = n; k-- > 0;) {
    const StepJacobians<8> step = Rk4StepJacobians<8>(
        rhs, jac_x, jac_u, nominal.time(k), nominal.states[k],
        nominal.controls[k], nominal.dt);
    adj.rho[k] = nominal.dt * cost.Gradient(nominal.states[k], 0.0) +
                 step.dx.transpose() * adj.rho[k + 1];
    if (!adj.rho[k].allFinite()) {
      throw DivergenceError("adjoint: non-finite costate", k);
    }
  }
  return adj;
}

Action SynthesizeAction(const Model& model, const ExtendedState& xs0,
                        double t0, double theta, const NoiseModel& noise,
                        const SacConfig& cfg, const TrackingTerm& tracking) {
  const InformationCost cost(model, theta, noise, cfg.eps_info, tracking);
  return SynthesizeAction(model, xs0, t0, theta, cost, cfg);
}

Action SynthesizeAction(const Model& model, const ExtendedState& xs0,
                        double t0, double theta, const RunningCost& cost,
                        const SacConfig& cfg) {
  cfg.Validate();
  if (!xs0.allFinite()) {
    throw std::invalid_argument("sac: non-finite initial extended state");
  }
  const int n = cfg.horizon_steps();
  const std::vector<double> zeros(n, 0.0);
  const Trajectory<8> nominal =
      SimulateExtended(model, xs0, zeros, cfg.dt, theta, t0);
  const double nominal_cost = HorizonCost(cost, nominal);
  const AdjointTrajectory adj = ComputeAdjoint(model, nominal, cost, theta);
  const double alpha_d = cfg.gamma_ad * nominal_cost;

  Action action;
  action.tau_star = t0;
  action.nominal_cost = nominal_cost;
  action.action_cost = nominal_cost;

  // The costate rho_{k+1} weighs the state change produced by step k, so
  // an action applied on [t_k, t_k+1) is scored with rho_{k+1}.
  const int search = std::clamp(Steps(cfg.tau_window, cfg.dt), 1, n);
  int best_k = -1;
  double best_u = 0.0;
  double best_sens = 0.0;
  for (int k = 0; k < search; ++k) {
    const ExtendedState& xs = nominal.states[k];
    const ExtendedState& rho = adj.rho[k + 1];
    const double a = rho.dot(ExtendedControlField(model, xs, 0.0, theta));
    const double u = a * alpha_d / (a * a + cfg.r_sac);
    if (!std::isfinite(u) || u == 0.0) continue;
    const double sens = rho.dot(ExtendedRhs(model, xs, u, theta) -
                                ExtendedRhs(model, xs, 0.0, theta));
    if (std::isfinite(sens) && sens < best_sens) {
      best_sens = sens;
      best_k = k;
      best_u = u;
    }
  }
  if (best_k < 0) return action;

  const double u_star = std::clamp(best_u, -cfg.u_max, cfg.u_max);
  const int min_steps = std::max(1, Steps(cfg.dt_min, cfg.dt));
  for (int steps = std::max(min_steps, Steps(cfg.dt_init, cfg.dt));
       steps >= min_steps; steps /= 2) {
    const int end = std::min(n, best_k + steps);
    std::vector<double> controls = zeros;
    std::fill(controls.begin() + best_k, controls.begin() + end, u_star);
    double trial_cost = std::numeric_limits<double>::infinity();
    try {
      trial_cost = HorizonCost(
          cost, SimulateExtended(model, xs0, controls, cfg.dt, theta, t0));
    } catch (const DivergenceError&) {
      continue;
    }
    if (trial_cost < nominal_cost) {
      const ExtendedState& xs = nominal.states[best_k];
      action.u_star = u_star;
      action.tau_star = nominal.time(best_k);
      action.duration = (end - best_k) * cfg.dt;
      action.action_cost = trial_cost;
      action.sensitivity =
          adj.rho[best_k + 1].dot(ExtendedRhs(model, xs, u_star, theta) -
                                  ExtendedRhs(model, xs, 0.0, theta));
      return action;
    }
  }
  return action;
}

SacController::SacController(const Model& model, const NoiseModel& noise,
                             const SacConfig& cfg, double start_time,
                             double start_xb)
    : model_(model),
      noise_(noise),
      cfg_(cfg),
      start_time_(start_time),
      start_xb_(start_xb) {
  cfg_.Validate();
  noise_.Validate();
}

TrackingTerm SacController::TrackingAt(double t0) const {
  if (t0 - start_time_ < cfg_.bias_duration - 1e-9) {
    TrackingTerm bias;
    bias.q(kXB, kXB) = cfg_.bias_weight;
    bias.ref(kXB) = start_xb_ + cfg_.bias_offset;
    return bias;
  }
  return cfg_.tracking;
}

const Action& SacController::Update(double t0, const ExtendedState& xs0,
                                    double theta) {
  history_.push_back(SynthesizeAction(model_, xs0, t0, theta, noise_, cfg_,
                                      TrackingAt(t0)));
  if (!history_.back().is_null()) current_ = history_.back();
  return history_.back();
}

Control SacController::ControlAt(double t) const {
  return current_.Active(t) ? current_.u_star : 0.0;
}

Trajectory<8> RunSacLoop(const Model& model, const ExtendedState& xs_init,
                         const std::function<double()>& theta_provider,
                         const std::function<void(double, Control)>& apply,
                         double duration, double quiescent_lead,
                         const NoiseModel& noise, const SacConfig& cfg) {
  if (!(duration > 0.0)) {
    throw std::invalid_argument("sac loop: duration must be > 0");
  }
  cfg.Validate();
  const int steps = Steps(duration, cfg.dt);
  const int lead = Steps(quiescent_lead, cfg.dt);
  const int every = std::max(1, Steps(cfg.loop_dt, cfg.dt));
  SacController controller(model, noise, cfg, lead * cfg.dt, xs_init(kXB));

  std::vector<double> applied;
  applied.reserve(steps);
  double observer_theta = theta_provider();
  ExtendedState observer = xs_init;
  auto rhs = [&](double, const ExtendedState& xs, double u) {
    return ExtendedRhs(model, xs, u, observer_theta);
  };
  for (int k = 0; k < steps; ++k) {
    const double t = k * cfg.dt;
    if (k >= lead && (k - lead) % every == 0) {
      const double theta = theta_provider();
      if (theta != observer_theta) {
        observer_theta = theta;
        observer = SimulateExtended(model, xs_init, applied, cfg.dt, theta)
                       .back();
      }
      controller.Update(t, observer, theta);
    }
    const Control u = k >= lead ? controller.ControlAt(t) : 0.0;
    if (apply) apply(t, u);
    applied.push_back(u);
    observer = Rk4Step<8>(rhs, t, observer, u, cfg.dt);
  }
  return SimulateExtended(model, xs_init, applied, cfg.dt, observer_theta);
}

}  // namespace activeid
