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

#include "activeid/model.h"

#include <cmath>
#include <stdexcept>

namespace activeid {

void Params::Validate() const {
  if (!(ell > 0.0) || !std::isfinite(ell)) {
    throw std::invalid_argument("params: ell must be > 0");
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::invalid_argument("params: mass must be > 0");
  }
  if (!(gravity > 0.0) || !std::isfinite(gravity)) {
    throw std::invalid_argument("params: gravity must be > 0");
  }
}

void NoiseModel::Validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("noise: sigma2 must be > 0");
  }
}

SecondOrderTerms Model::SecondOrder(const State& x, const Eigen::Vector4d& psi,
                                    Control u, double theta) const {
  auto psidot = [&](const State& xx, double uu) -> Eigen::Vector4d {
    const Derivatives d = Jacobians(xx, uu, theta);
    return d.fx * psi + d.ftheta;
  };
  auto gamma = [&](const State& xx, double uu) {
    const Derivatives d = Jacobians(xx, uu, theta);
    return (d.yx * psi)(0) + d.ytheta;
  };
  SecondOrderTerms out;
  for (int i = 0; i < 4; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    State xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    out.psidot_x.col(i) = (psidot(xp, u) - psidot(xm, u)) / (2.0 * h);
    out.gamma_x(i) = (gamma(xp, u) - gamma(xm, u)) / (2.0 * h);
  }
  const double hu = 1e-6 * std::max(1.0, std::abs(u));
  out.psidot_u = (psidot(x, u + hu) - psidot(x, u - hu)) / (2.0 * hu);
  out.gamma_u = (gamma(x, u + hu) - gamma(x, u - hu)) / (2.0 * hu);
  return out;
}

ForceModel ParseForceModel(const std::string& name) {
  if (name == "nominal") return ForceModel::kNominal;
  if (name == "derived-tension") return ForceModel::kDerivedTension;
  throw std::invalid_argument("unknown force model '" + name +
                              "' (expected nominal | derived-tension)");
}

std::string ToString(ForceModel model) {
  return model == ForceModel::kNominal ? "nominal" : "derived-tension";
}

namespace {

void CheckInputs(const State& x, Control u, double theta) {
  if (!x.allFinite() || !std::isfinite(u) || !std::isfinite(theta)) {
    throw std::invalid_argument("suspended mass: non-finite input");
  }
  if (!(theta > 0.0)) {
    throw std::invalid_argument("suspended mass: string length must be > 0");
  }
}

}  // namespace

SuspendedMass::SuspendedMass(double mass, double gravity,
                             ForceModel force_model)
    : mass_(mass), gravity_(gravity), force_model_(force_model) {
  Params{1.0, mass, gravity}.Validate();
}

State SuspendedMass::Dynamics(const State& x, Control u, double theta) const {
  CheckInputs(x, u, theta);
  const double phi = x(kPhi);
  State dx;
  dx << x(kVB), u, x(kPhiDot),
      (u / theta) * std::cos(phi) - (gravity_ / theta) * std::sin(phi);
  return dx;
}

double SuspendedMass::Output(const State& x, Control u, double theta) const {
  CheckInputs(x, u, theta);
  const double c = std::cos(x(kPhi));
  const double s = std::sin(x(kPhi));
  const double w2 = x(kPhiDot) * x(kPhiDot);
  if (force_model_ == ForceModel::kNominal) {
    return mass_ * gravity_ * c - mass_ * theta * w2 - u * s;
  }
  return mass_ * (gravity_ * c + theta * w2 - u * s);
}

double SuspendedMass::Tension(const State& x, Control u, double theta) const {
  const double c = std::cos(x(kPhi));
  const double s = std::sin(x(kPhi));
  return mass_ * (gravity_ * c + theta * x(kPhiDot) * x(kPhiDot) - u * s);
}

Derivatives SuspendedMass::Jacobians(const State& x, Control u,
                                     double theta) const {
  CheckInputs(x, u, theta);
  const double c = std::cos(x(kPhi));
  const double s = std::sin(x(kPhi));
  const double w = x(kPhiDot);
  const double m = mass_;
  const double g = gravity_;
  const double inv_l = 1.0 / theta;

  Derivatives d;
  d.fx(kXB, kVB) = 1.0;
  d.fx(kPhi, kPhiDot) = 1.0;
  d.fx(kPhiDot, kPhi) = (-u * s - g * c) * inv_l;
  d.ftheta(kPhiDot) = -(u * c - g * s) * inv_l * inv_l;
  d.fu(kVB) = 1.0;
  d.fu(kPhiDot) = c * inv_l;

  if (force_model_ == ForceModel::kNominal) {
    d.yx(kPhi) = -m * g * s - u * c;
    d.yx(kPhiDot) = -2.0 * m * theta * w;
    d.ytheta = -m * w * w;
    d.yu = -s;
  } else {
    d.yx(kPhi) = m * (-g * s - u * c);
    d.yx(kPhiDot) = 2.0 * m * theta * w;
    d.ytheta = m * w * w;
    d.yu = -m * s;
  }
  return d;
}

SecondOrderTerms SuspendedMass::SecondOrder(const State& x,
                                            const Eigen::Vector4d& psi,
                                            Control u, double theta) const {
  CheckInputs(x, u, theta);
  const double c = std::cos(x(kPhi));
  const double s = std::sin(x(kPhi));
  const double w = x(kPhiDot);
  const double m = mass_;
  const double g = gravity_;
  const double inv_l = 1.0 / theta;
  const double psi_phi = psi(kPhi);
  const double psi_w = psi(kPhiDot);

  // psidot(3) = a(phi, u) * psi_phi + b(phi, u), with
  //   a = (-u s - g c) / l,  b = -(u c - g s) / l^2.
  SecondOrderTerms out;
  out.psidot_x(kPhiDot, kPhi) =
      (-u * c + g * s) * inv_l * psi_phi + (u * s + g * c) * inv_l * inv_l;
  out.psidot_u(kPhiDot) = -s * inv_l * psi_phi - c * inv_l * inv_l;

  if (force_model_ == ForceModel::kNominal) {
    out.gamma_x(kPhi) = (-m * g * c + u * s) * psi_phi;
    out.gamma_x(kPhiDot) = -2.0 * m * theta * psi_w - 2.0 * m * w;
    out.gamma_u = -c * psi_phi;
  } else {
    out.gamma_x(kPhi) = m * (-g * c + u * s) * psi_phi;
    out.gamma_x(kPhiDot) = 2.0 * m * theta * psi_w + 2.0 * m * w;
    out.gamma_u = -m * c * psi_phi;
  }
  return out;
}

ExtendedState ExtendedRhs(const Model& model, const ExtendedState& xs,
                          Control u, double theta) {
  const State x = StateOf(xs);
  const Derivatives d = model.Jacobians(x, u, theta);
  ExtendedState out;
  out << model.Dynamics(x, u, theta), d.fx * SensitivityOf(xs) + d.ftheta;
  return out;
}

Mat8 ExtendedJacobian(const Model& model, const ExtendedState& xs, Control u,
                      double theta) {
  const State x = StateOf(xs);
  const Derivatives d = model.Jacobians(x, u, theta);
  const SecondOrderTerms s = model.SecondOrder(x, SensitivityOf(xs), u, theta);
  Mat8 jac = Mat8::Zero();
  jac.topLeftCorner<4, 4>() = d.fx;
  jac.bottomLeftCorner<4, 4>() = s.psidot_x;
  jac.bottomRightCorner<4, 4>() = d.fx;
  return jac;
}

ExtendedState ExtendedControlField(const Model& model, const ExtendedState& xs,
                                   Control u, double theta) {
  const State x = StateOf(xs);
  const Derivatives d = model.Jacobians(x, u, theta);
  const SecondOrderTerms s = model.SecondOrder(x, SensitivityOf(xs), u, theta);
  ExtendedState h;
  h << d.fu, s.psidot_u;
  return h;
}

double GammaTheta(const Model& model, const ExtendedState& xs, Control u,
                  double theta) {
  const Derivatives d = model.Jacobians(StateOf(xs), u, theta);
  return d.yx.dot(SensitivityOf(xs)) + d.ytheta;
}

ExtendedState GammaGradient(const Model& model, const ExtendedState& xs,
                            Control u, double theta) {
  const State x = StateOf(xs);
  const Derivatives d = model.Jacobians(x, u, theta);
  const SecondOrderTerms s = model.SecondOrder(x, SensitivityOf(xs), u, theta);
  ExtendedState grad;
  grad << s.gamma_x.transpose(), d.yx.transpose();
  return grad;
}

double FisherInformation(std::span<const double> gammas,
                         const NoiseModel& noise) {
  noise.Validate();
  double info = 0.0;
  for (double g : gammas) info += g * g / noise.sigma2;
  return info;
}

Trajectory<4> SimulateState(const Model& model, const State& x0,
                            std::span<const double> controls, double dt,
                            double theta, double t0) {
  auto rhs = [&](double, const State& x, double u) {
    return model.Dynamics(x, u, theta);
  };
  return Integrate<4>(rhs, x0, controls, dt, t0);
}

Trajectory<8> SimulateExtended(const Model& model, const ExtendedState& xs0,
                               std::span<const double> controls, double dt,
                               double theta, double t0) {
  auto rhs = [&](double, const ExtendedState& xs, double u) {
    return ExtendedRhs(model, xs, u, theta);
  };
  return Integrate<8>(rhs, xs0, controls, dt, t0);
}

}  // namespace activeid
