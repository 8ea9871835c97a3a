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

#ifndef ACTIVEID_SAC_H_
#define ACTIVEID_SAC_H_

#include <functional>
#include <span>
#include <vector>

#include "activeid/integrator.h"
#include "activeid/model.h"
#include "activeid/types.h"

namespace activeid {

// Quadratic state bias (x - ref)' Q (x - ref) added to the information cost.
struct TrackingTerm {
  Mat4 q = Mat4::Zero();
  State ref = State::Zero();
};

struct SacConfig {
  double horizon = 1.2;    // s
  double loop_dt = 0.05;   // s between action computations
  double dt = 0.01;        // prediction grid, s
  double r_sac = 0.3;      // control weight in the least-norm action
  double gamma_ad = -10.0; // desired sensitivity = gamma_ad * J(nominal)
  double u_max = 5.0;      // m/s^2
  double dt_init = 0.2;    // first trial action duration, s
  double dt_min = 0.01;    // shortest action duration, s
  double tau_window = 0.1; // application times searched in [t0, t0 + window)
  double eps_info = 1.0;   // regularizer of the inverse information

  // Tracking cost used outside the bias window.
  TrackingTerm tracking;
  // Bias toward an xB offset at the start of excitation, which breaks the
  // zero-information rest equilibrium.
  double bias_weight = 50.0;   // weight on xB error
  double bias_offset = 0.1;    // m, relative to the gripper start position
  double bias_duration = 0.5;  // s

  void Validate() const;
  int horizon_steps() const;
};

// l(xbar) for the SAC cost.
class RunningCost {
 public:
  virtual ~RunningCost() = default;
  virtual double Value(const ExtendedState& xs, Control u) const = 0;
  virtual ExtendedState Gradient(const ExtendedState& xs,
                                 Control u) const = 0;
};

// 1 / (gamma^2 / sigma2 + eps_info) + (x - ref)' Q (x - ref)
class InformationCost final : public RunningCost {
 public:
  InformationCost(const Model& model, double theta, const NoiseModel& noise,
                  double eps_info, const TrackingTerm& tracking = {});

  double Value(const ExtendedState& xs, Control u) const override;
  ExtendedState Gradient(const ExtendedState& xs, Control u) const override;

 private:
  const Model& model_;
  double theta_;
  NoiseModel noise_;
  double eps_info_;
  TrackingTerm tracking_;
};

double RunningCostValue(const Model& model, const ExtendedState& xs,
                        Control u, double theta, const NoiseModel& noise,
                        const SacConfig& cfg,
                        const TrackingTerm& tracking = {});

// Left Riemann sum dt * sum_{k < N} l(xbar_k). The information term is
// evaluated on the state only (u = 0), so l depends on xbar alone.
double HorizonCost(const RunningCost& cost, const Trajectory<8>& traj);

struct AdjointTrajectory {
  std::vector<double> times;
  std::vector<ExtendedState> rho;  // rho.back() == 0
};

// Costate of the discretized horizon cost along `nominal`:
//   rho_N = 0,  rho_k = dt * grad l(xbar_k) + Phi_k' rho_{k+1}
// where Phi_k is the Jacobian of the RK4 step from k to k+1. rho_k equals
// the gradient of HorizonCost with respect to xbar_k.
AdjointTrajectory ComputeAdjoint(const Model& model,
                                 const Trajectory<8>& nominal,
                                 const RunningCost& cost, double theta);

struct Action {
  Control u_star = 0.0;
  double tau_star = 0.0;
  double duration = 0.0;  // 0 marks the null action
  // Diagnostics from the duration search.
  double nominal_cost = 0.0;
  double action_cost = 0.0;
  double sensitivity = 0.0;  // mode-insertion sensitivity at tau_star

  bool is_null() const { return duration <= 0.0; }
  bool Active(double t) const {
    return !is_null() && t >= tau_star - 1e-9 && t < tau_star + duration - 1e-9;
  }
};

// One SAC synthesis from xbar0 at time t0 with nominal control u = 0.
Action SynthesizeAction(const Model& model, const ExtendedState& xs0,
                        double t0, double theta, const NoiseModel& noise,
                        const SacConfig& cfg, const TrackingTerm& tracking);

// Same, with a caller-supplied running cost.
Action SynthesizeAction(const Model& model, const ExtendedState& xs0,
                        double t0, double theta, const RunningCost& cost,
                        const SacConfig& cfg);

// Receding-horizon action scheduler. Holds the most recent non-null action;
// the applied control is zero outside it.
class SacController {
 public:
  SacController(const Model& model, const NoiseModel& noise,
                const SacConfig& cfg, double start_time, double start_xb = 0.0);

  // Computes an action anchored at (t0, xs0) using theta.
  const Action& Update(double t0, const ExtendedState& xs0, double theta);
  Control ControlAt(double t) const;
  // Tracking term in force for a computation at t0.
  TrackingTerm TrackingAt(double t0) const;

  const std::vector<Action>& history() const { return history_; }

 private:
  const Model& model_;
  NoiseModel noise_;
  SacConfig cfg_;
  double start_time_;
  double start_xb_;
  Action current_;
  std::vector<Action> history_;
};

// Runs the controller alone for `duration` seconds of simulated time.
// Controls are zero for t < quiescent_lead. Every loop_dt the loop reads
// theta from `theta_provider`, re-anchors at its forward-observer state
// (model at that theta driven by the applied controls) and synthesizes one
// action. `apply` is called once per grid step with the applied control so a
// caller-owned plant can advance. Returns the observer trajectory together
// with the applied controls.
Trajectory<8> RunSacLoop(const Model& model, const ExtendedState& xs_init,
                         const std::function<double()>& theta_provider,
                         const std::function<void(double t, Control u)>& apply,
                         double duration, double quiescent_lead,
                         const NoiseModel& noise, const SacConfig& cfg);

}  // namespace activeid

#endif  // ACTIVEID_SAC_H_
