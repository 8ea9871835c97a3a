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

#ifndef ACTIVEID_TRAJOPT_H_
#define ACTIVEID_TRAJOPT_H_

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "activeid/integrator.h"
#include "activeid/model.h"
#include "activeid/types.h"

namespace activeid {

// Cartesian mass state (x_m, z_m, vx_m, vz_m); z points up, the gripper
// line is z = 0.
using MassState = Eigen::Vector4d;

MassState MassKinematics(const State& x, double ell);
// d MassKinematics / d x.
Mat4 MassKinematicsJacobian(const State& x, double ell);

struct TaskConfig {
  // Terminal weight on the mass Cartesian error.
  Mat4 p_tau = Eigen::Vector4d(200.0, 200.0, 20.0, 20.0).asDiagonal();
  double r_tau = 0.1;
  MassState x_desired = MassState(-0.45, -0.26, 0.0, 0.0);
  State x0 = State::Zero();
  double t_final = 5.0;
  double dt = 0.01;
  double tol = 1e-6;
  int max_iters = 200;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 30;

  void Validate() const;
  int steps() const;
};

// A dynamically feasible trajectory and its Cartesian mass channels.
struct TaskTrajectory {
  Trajectory<4> traj;
  double theta = 0.0;
  std::vector<MassState> mass;

  TaskTrajectory() = default;
  TaskTrajectory(Trajectory<4> t, double ell);
  const MassState& terminal_mass() const { return mass.back(); }
};

// (e_f)' P (e_f) + sum_k r_tau u_k^2 dt. Throws std::invalid_argument when
// the trajectory is not on the configured grid.
double TaskCost(const TaskTrajectory& xi, const TaskConfig& cfg);

struct KnotLinearization {
  Mat4 fx;              // continuous-time d f / d x at the knot
  Eigen::Vector4d fu;   // continuous-time d f / d u
  Mat4 a;               // d x_{k+1} / d x_k of the RK4 step
  Eigen::Vector4d b;    // d x_{k+1} / d u_k
};

std::vector<KnotLinearization> Linearize(const Model& model,
                                         const TaskTrajectory& xi);

// Solution of the LQ subproblem around xi.
struct Descent {
  std::vector<State> z;        // state perturbation, z[0] = 0
  std::vector<double> v;       // control perturbation
  std::vector<RowVec4> gains;  // projection feedback, u = mu + K (alpha - x)
  double dj = 0.0;             // DJ(xi) . zeta, never positive
};

// Backward Riccati recursion on the local quadratic model of the task cost
// (Gauss-Newton terminal term, exact control term) followed by a forward
// sweep for zeta = (z, v).
Descent LqDescent(const TaskTrajectory& xi,
                  const std::vector<KnotLinearization>& lin,
                  const TaskConfig& cfg);

// Maps the curve (alpha, mu) to a feasible trajectory by simulating
// u_k = mu_k + K_k (alpha_k - x_k) from cfg.x0.
TaskTrajectory Project(const Model& model, double theta,
                       std::span<const State> alpha,
                       std::span<const double> mu,
                       std::span<const RowVec4> gains, const TaskConfig& cfg);

struct TaskPlan {
  TaskTrajectory xi;
  int iterations = 0;
  double cost = 0.0;
  double dj = 0.0;  // DJ . zeta at the returned iterate
  std::vector<double> cost_history;
  std::vector<double> dj_history;
};

class TrajoptError : public std::runtime_error {
 public:
  TrajoptError(const std::string& what, TaskPlan last)
      : std::runtime_error(what), last_(std::move(last)) {}
  const TaskPlan& last() const { return last_; }

 private:
  TaskPlan last_;
};

// Projection-operator descent from the stationary zero-control trajectory
// until |DJ . zeta| < tol. Throws TrajoptError when max_iters is exhausted or
// the line search stalls.
TaskPlan OptimizeTask(const Model& model, double theta, const TaskConfig& cfg);

// Largest per-step residual |x_{k+1} - RK4(x_k, u_k)| of xi under theta.
double DynamicsResidual(const Model& model, const TaskTrajectory& xi);

}  // namespace activeid

#endif  // ACTIVEID_TRAJOPT_H_
