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

#ifndef ACTIVEID_INTEGRATOR_H_
#define ACTIVEID_INTEGRATOR_H_

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "activeid/types.h"

namespace activeid {

// States and zero-order-hold controls on a uniform time grid.
// controls[k] acts on [t0 + k*dt, t0 + (k+1)*dt).
template <int N>
struct Trajectory {
  using Vector = Eigen::Matrix<double, N, 1>;

  double t0 = 0.0;
  double dt = 0.01;
  std::vector<Vector> states;
  std::vector<double> controls;

  std::size_t num_steps() const { return controls.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double final_time() const { return time(num_steps()); }
  const Vector& back() const { return states.back(); }

  // Throws std::invalid_argument when the grid invariants are broken.
  void Validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("trajectory: dt must be > 0");
    if (states.size() != controls.size() + 1) {
      throw std::invalid_argument(
          "trajectory: expected one more state than controls");
    }
  }
};

// One classical fourth-order Runge-Kutta step with u held constant.
// rhs(t, x, u) -> dx/dt.
template <int N, class Rhs>
Eigen::Matrix<double, N, 1> Rk4Step(const Rhs& rhs, double t,
                                    const Eigen::Matrix<double, N, 1>& x,
                                    double u, double dt) {
  const double half = 0.5 * dt;
  const Eigen::Matrix<double, N, 1> k1 = rhs(t, x, u);
  const Eigen::Matrix<double, N, 1> k2 = rhs(t + half, x + half * k1, u);
  const Eigen::Matrix<double, N, 1> k3 = rhs(t + half, x + half * k2, u);
  const Eigen::Matrix<double, N, 1> k4 = rhs(t + dt, x + dt * k3, u);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <int N>
struct StepJacobians {
  Eigen::Matrix<double, N, N> dx;  // d x_{k+1} / d x_k
  Eigen::Matrix<double, N, 1> du;  // d x_{k+1} / d u_k
};

// Exact derivatives of Rk4Step with respect to the state and the held
// control, given the continuous Jacobians jac_x(t, x, u) and jac_u(t, x, u).
template <int N, class Rhs, class JacX, class JacU>
StepJacobians<N> Rk4StepJacobians(const Rhs& rhs, const JacX& jac_x,
                                  const JacU& jac_u, double t,
                                  const Eigen::Matrix<double, N, 1>& x,
                                  double u, double dt) {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;
  const double half = 0.5 * dt;
  const Mat eye = Mat::Identity();

  const Vec k1 = rhs(t, x, u);
  const Vec x2 = x + half * k1;
  const Vec k2 = rhs(t + half, x2, u);
  const Vec x3 = x + half * k2;
  const Vec k3 = rhs(t + half, x3, u);
  const Vec x4 = x + dt * k3;

  const Mat a1 = jac_x(t, x, u);
  const Mat a2 = jac_x(t + half, x2, u);
  const Mat a3 = jac_x(t + half, x3, u);
  const Mat a4 = jac_x(t + dt, x4, u);

  const Mat d1 = a1;
  const Mat d2 = a2 * (eye + half * d1);
  const Mat d3 = a3 * (eye + half * d2);
  const Mat d4 = a4 * (eye + dt * d3);

  const Vec e1 = jac_u(t, x, u);
  const Vec e2 = jac_u(t + half, x2, u) + a2 * (half * e1);
  const Vec e3 = jac_u(t + half, x3, u) + a3 * (half * e2);
  const Vec e4 = jac_u(t + dt, x4, u) + a4 * (dt * e3);

  StepJacobians<N> out;
  out.dx = eye + (dt / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
  out.du = (dt / 6.0) * (e1 + 2.0 * e2 + 2.0 * e3 + e4);
  return out;
}

// Fixed-step RK4 over controls.size() steps.
// Throws DivergenceError naming the first step that produced a non-finite
// state.
template <int N, class Rhs>
Trajectory<N> Integrate(const Rhs& rhs,
                        const Eigen::Matrix<double, N, 1>& initial,
                        std::span<const double> controls, double dt,
                        double t0 = 0.0) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
  if (!initial.allFinite()) {
    throw std::invalid_argument("integrate: non-finite initial state");
  }
  for (double u : controls) {
    if (!std::isfinite(u)) {
      throw std::invalid_argument("integrate: non-finite control");
    }
  }
  Trajectory<N> traj;
  traj.t0 = t0;
  traj.dt = dt;
  traj.controls.assign(controls.begin(), controls.end());
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(initial);
  for (std::size_t k = 0; k < controls.size(); ++k) {
    Eigen::Matrix<double, N, 1> next;
    try {
      next = Rk4Step<N>(rhs, traj.time(k), traj.states[k], controls[k], dt);
    } catch (const std::invalid_argument&) {
      // A stage evaluation saw a non-finite intermediate state.
      throw DivergenceError("integrate: non-finite stage state", k);
    }
    traj.states.push_back(next);
    if (!traj.states.back().allFinite()) {
      throw DivergenceError("integrate: non-finite state", k);
    }
  }
  return traj;
}

}  // namespace activeid

#endif  // ACTIVEID_INTEGRATOR_H_
