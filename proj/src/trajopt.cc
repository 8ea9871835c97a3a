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

#include "activeid/trajopt.h"

#include <cmath>
#include <utility>

#include <Eigen/Eigenvalues>

namespace activeid {

MassState MassKinematics(const State& x, double ell) {
  const double c = std::cos(x(kPhi));
  const double s = std::sin(x(kPhi));
  const double w = x(kPhiDot);
  return MassState(x(kXB) + ell * s, -ell * c, x(kVB) + ell * c * w,
                   ell * s * w);
}

Mat4 MassKinematicsJacobian(const State& x, double ell) {
  const double c = std::cos(x(kPhi));
  const double s = std::sin(x(kPhi));
  const double w = x(kPhiDot);
  Mat4 j;
  j << 1.0, 0.0, ell * c, 0.0,  //
      0.0, 0.0, ell * s, 0.0,   //
      0.0, 1.0, -ell * s * w, ell * c,  //
      0.0, 0.0, ell * c * w, ell * s;
  return j;
}

void TaskConfig::Validate() const {
  if ((p_tau - p_tau.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
      Eigen::SelfAdjointEigenSolver<Mat4>(p_tau).eigenvalues().minCoeff() <
          -1e-12) {
    throw std::invalid_argument("task: P_tau must be symmetric PSD");
  }
  if (!(r_tau > 0.0)) throw std::invalid_argument("task: R_tau must be > 0");
  if (!(t_final > 0.0) || !(dt > 0.0)) {
    throw std::invalid_argument("task: need t_final > 0 and dt > 0");
  }
  if (std::abs(steps() * dt - t_final) > 1e-9 * t_final) {
    throw std::invalid_argument("task: t_final must be a multiple of dt");
  }
  if (!(tol > 0.0) || max_iters < 1) {
    throw std::invalid_argument("task: need tol > 0 and max_iters >= 1");
  }
  if (!(armijo_c > 0.0 && armijo_c < 1.0) || !(shrink > 0.0 && shrink < 1.0) ||
      max_backtracks < 0) {
    throw std::invalid_argument("task: invalid Armijo parameters");
  }
}

int TaskConfig::steps() const {
  return static_cast<int>(std::lround(t_final / dt));
}

TaskTrajectory::TaskTrajectory(Trajectory<4> t, double ell)
    : traj(std::move(t)), theta(ell) {
  mass.reserve(traj.states.size());
  for (const State& x : traj.states) mass.push_back(MassKinematics(x, ell));
}

double TaskCost(const TaskTrajectory& xi, const TaskConfig& cfg) {
  xi.traj.Validate();
  if (static_cast<int>(xi.traj.num_steps()) != cfg.steps() ||
      std::abs(xi.traj.dt - cfg.dt) > 1e-12) {
    throw std::invalid_argument("task cost: trajectory is not on the task grid");
  }
  const MassState e = xi.terminal_mass() - cfg.x_desired;
  double running = 0.0;
  for (double u : xi.traj.controls) running += u * u;
  return e.dot(cfg.p_tau * e) + cfg.r_tau * running * cfg.dt;
}

std::vector<KnotLinearization> Linearize(const Model& model,
                                         const TaskTrajectory& xi) {
  const double theta = xi.theta;
  auto rhs = [&](double, const State& x, double u) {
    return model.Dynamics(x, u, theta);
  };
  auto jac_x = [&](double, const State& x, double u) -> Mat4 {
    return model.Jacobians(x, u, theta).fx;
  };
  auto jac_u = [&](double, const State& x, double u) -> Eigen::Vector4d {
    return model.Jacobians(x, u, theta).fu;
  };
  std::vector<KnotLinearization> lin(xi.traj.num_steps());
  for (std::size_t k = 0; k < lin.size(); ++k) {
    const State& x = xi.traj.states[k];
    const double u = xi.traj.controls[k];
    const Derivatives d = model.Jacobians(x, u, theta);
    const StepJacobians<4> step =
        Rk4StepJacobians<4>(rhs, jac_x, jac_u, xi.traj.time(k), x, u,
                            xi.traj.dt);
    lin[k] = {d.fx, d.fu, step.dx, step.du};
    if (!lin[k].a.allFinite() || !lin[k].b.allFinite()) {
      throw DivergenceError("linearize: non-finite step Jacobian", k);
    }
  }
  return lin;
}

Descent LqDescent(const TaskTrajectory& xi,
                  const std::vector<KnotLinearization>& lin,
                  const TaskConfig& cfg) {
  const std::size_t n = xi.traj.num_steps();
  if (lin.size() != n) {
    throw std::invalid_argument("lq descent: linearization size mismatch");
  }
  const State& x_final = xi.traj.states.back();
  const Mat4 jk = MassKinematicsJacobian(x_final, xi.theta);
  const MassState e = xi.terminal_mass() - cfg.x_desired;
  const State q_final = 2.0 * jk.transpose() * cfg.p_tau * e;
  const double r_quad = 2.0 * cfg.r_tau * cfg.dt;

  Mat4 s_mat = 2.0 * jk.transpose() * cfg.p_tau * jk;
  State s_vec = q_final;
  std::vector<RowVec4> feedback(n);
  std::vector<double> feedforward(n);
  for (std::size_t k = n; k-- > 0;) {
    const Mat4& a = lin[k].a;
    const Eigen::Vector4d& b = lin[k].b;
    const double r_lin = r_quad * xi.traj.controls[k];
    const double quu = r_quad + b.dot(s_mat * b);
    const RowVec4 qux = b.transpose() * s_mat * a;
    const double qu = r_lin + b.dot(s_vec);
    feedback[k] = -qux / quu;
    feedforward[k] = -qu / quu;
    const Mat4 next_s = a.transpose() * s_mat * a - qux.transpose() * qux / quu;
    s_vec = a.transpose() * s_vec - qux.transpose() * (qu / quu);
    s_mat = 0.5 * (next_s + next_s.transpose());
    if (!s_mat.allFinite() || !s_vec.allFinite()) {
      throw DivergenceError("lq descent: Riccati recursion blew up", k);
    }
  }

  Descent d;
  d.z.assign(n + 1, State::Zero());
  d.v.resize(n);
  d.gains.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    d.v[k] = feedback[k].dot(d.z[k]) + feedforward[k];
    d.z[k + 1] = lin[k].a * d.z[k] + lin[k].b * d.v[k];
    d.gains[k] = -feedback[k];
    d.dj += r_quad * xi.traj.controls[k] * d.v[k];
  }
  d.dj += q_final.dot(d.z[n]);
  return d;
}

TaskTrajectory Project(const Model& model, double theta,
                       std::span<const State> alpha,
                       std::span<const double> mu,
                       std::span<const RowVec4> gains, const TaskConfig& cfg) {
  const std::size_t n = mu.size();
  if (alpha.size() != n + 1 || gains.size() != n) {
    throw std::invalid_argument("project: curve sizes do not match the grid");
  }
  auto rhs = [&](double, const State& x, double u) {
    return model.Dynamics(x, u, theta);
  };
  Trajectory<4> traj;
  traj.t0 = 0.0;
  traj.dt = cfg.dt;
  traj.states.reserve(n + 1);
  traj.controls.reserve(n);
  traj.states.push_back(cfg.x0);
  for (std::size_t k = 0; k < n; ++k) {
    const State& x = traj.states[k];
    const double u = mu[k] + gains[k].dot(alpha[k] - x);
    State next;
    try {
      next = Rk4Step<4>(rhs, traj.time(k), x, u, cfg.dt);
    } catch (const std::invalid_argument&) {
      throw DivergenceError("project: non-finite stage state", k);
    }
    if (!next.allFinite() || !std::isfinite(u)) {
      throw DivergenceError("project: non-finite state", k);
    }
    traj.controls.push_back(u);
    traj.states.push_back(next);
  }
  return TaskTrajectory(std::move(traj), theta);
}

TaskPlan OptimizeTask(const Model& model, double theta, const TaskConfig& cfg) {
  cfg.Validate();
  if (!(theta > 0.0)) throw std::invalid_argument("optimize: theta must be > 0");
  const std::vector<double> zeros(cfg.steps(), 0.0);
  TaskPlan plan;
  plan.xi = TaskTrajectory(SimulateState(model, cfg.x0, zeros, cfg.dt, theta),
                           theta);
  plan.cost = TaskCost(plan.xi, cfg);
  plan.cost_history.push_back(plan.cost);

  for (int iter = 0;; ++iter) {
    const Descent d = LqDescent(plan.xi, Linearize(model, plan.xi), cfg);
    plan.dj = d.dj;
    plan.dj_history.push_back(d.dj);
    plan.iterations = iter;
    if (std::abs(d.dj) < cfg.tol) return plan;
    if (iter >= cfg.max_iters) {
      throw TrajoptError("optimize: no convergence within max_iters", plan);
    }

    std::vector<State> alpha(d.z.size());
    std::vector<double> mu(d.v.size());
    bool accepted = false;
    double step = 1.0;
    for (int b = 0; b <= cfg.max_backtracks; ++b, step *= cfg.shrink) {
      for (std::size_t k = 0; k < alpha.size(); ++k) {
        alpha[k] = plan.xi.traj.states[k] + step * d.z[k];
      }
      for (std::size_t k = 0; k < mu.size(); ++k) {
        mu[k] = plan.xi.traj.controls[k] + step * d.v[k];
      }
      TaskTrajectory candidate;
      try {
        candidate = Project(model, theta, alpha, mu, d.gains, cfg);
      } catch (const DivergenceError&) {
        continue;
      }
      const double cost = TaskCost(candidate, cfg);
      if (cost <= plan.cost + cfg.armijo_c * step * d.dj) {
        plan.xi = std::move(candidate);
        plan.cost = cost;
        plan.cost_history.push_back(cost);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw TrajoptError("optimize: line search stalled", plan);
    }
  }
}

double DynamicsResidual(const Model& model, const TaskTrajectory& xi) {
  auto rhs = [&](double, const State& x, double u) {
    return model.Dynamics(x, u, xi.theta);
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < xi.traj.num_steps(); ++k) {
    const State next = Rk4Step<4>(rhs, xi.traj.time(k), xi.traj.states[k],
                                  xi.traj.controls[k], xi.traj.dt);
    worst = std::max(worst, (next - xi.traj.states[k + 1]).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace activeid
