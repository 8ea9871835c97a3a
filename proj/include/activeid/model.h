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

#ifndef ACTIVEID_MODEL_H_
#define ACTIVEID_MODEL_H_

#include <span>
#include <string>

#include "activeid/integrator.h"
#include "activeid/types.h"

namespace activeid {

// First derivatives of the dynamics f and the output y with respect to the
// state, the parameter theta and the control.
struct Derivatives {
  Mat4 fx = Mat4::Zero();
  Eigen::Vector4d ftheta = Eigen::Vector4d::Zero();
  Eigen::Vector4d fu = Eigen::Vector4d::Zero();
  RowVec4 yx = RowVec4::Zero();
  double ytheta = 0.0;
  double yu = 0.0;
};

// Second-derivative tensors of f and y contracted with a sensitivity psi.
// These are exactly the blocks the extended system needs:
//   psidot = fx * psi + ftheta         (sensitivity equation)
//   gamma  = yx * psi + ytheta         (output sensitivity)
struct SecondOrderTerms {
  Mat4 psidot_x = Mat4::Zero();                       // d psidot / dx
  Eigen::Vector4d psidot_u = Eigen::Vector4d::Zero();  // d psidot / du
  RowVec4 gamma_x = RowVec4::Zero();                   // d gamma / dx
  double gamma_u = 0.0;                                // d gamma / du
};

// A control-affine system with one uncertain scalar parameter theta and a
// scalar measured output.
class Model {
 public:
  virtual ~Model() = default;

  virtual State Dynamics(const State& x, Control u, double theta) const = 0;
  virtual double Output(const State& x, Control u, double theta) const = 0;
  virtual Derivatives Jacobians(const State& x, Control u,
                                double theta) const = 0;

  // Default implementation central-differences Jacobians(); models with
  // closed-form second derivatives should override it.
  virtual SecondOrderTerms SecondOrder(const State& x,
                                       const Eigen::Vector4d& psi, Control u,
                                       double theta) const;
};

// Output force model. kNominal is m g cos(phi) - m l phidot^2 - u sin(phi);
// kDerivedTension is the string tension m (g cos(phi) + l phidot^2 - u sin(phi)).
enum class ForceModel { kNominal, kDerivedTension };

ForceModel ParseForceModel(const std::string& name);
std::string ToString(ForceModel model);

// Planar point mass hanging from a gripper that moves along x with
// commanded acceleration u. theta is the string length.
//
//   d/dt (xB, vB, phi, phidot) =
//       (vB, u, phidot, (u / l) cos(phi) - (g / l) sin(phi))
//
// phi is measured from the downward vertical.
class SuspendedMass final : public Model {
 public:
  SuspendedMass() = default;
  SuspendedMass(double mass, double gravity,
                ForceModel force_model = ForceModel::kNominal);
  explicit SuspendedMass(const Params& params,
                         ForceModel force_model = ForceModel::kNominal)
      : SuspendedMass(params.mass, params.gravity, force_model) {}

  State Dynamics(const State& x, Control u, double theta) const override;
  double Output(const State& x, Control u, double theta) const override;
  Derivatives Jacobians(const State& x, Control u,
                        double theta) const override;
  SecondOrderTerms SecondOrder(const State& x, const Eigen::Vector4d& psi,
                               Control u, double theta) const override;

  // Physical string tension, independent of the configured output model.
  double Tension(const State& x, Control u, double theta) const;

  double mass() const { return mass_; }
  double gravity() const { return gravity_; }
  ForceModel force_model() const { return force_model_; }

 private:
  double mass_ = 0.05;
  double gravity_ = 9.81;
  ForceModel force_model_ = ForceModel::kNominal;
};

// Extended-state dynamics (f, fx * psi + ftheta).
ExtendedState ExtendedRhs(const Model& model, const ExtendedState& xs,
                          Control u, double theta);

// D_xbar of ExtendedRhs.
Mat8 ExtendedJacobian(const Model& model, const ExtendedState& xs, Control u,
                      double theta);

// d/du of ExtendedRhs (the extended control vector field).
ExtendedState ExtendedControlField(const Model& model, const ExtendedState& xs,
                                   Control u, double theta);

// Total derivative of the output with respect to theta: yx * psi + ytheta.
double GammaTheta(const Model& model, const ExtendedState& xs, Control u,
                  double theta);

// D_xbar of GammaTheta.
ExtendedState GammaGradient(const Model& model, const ExtendedState& xs,
                            Control u, double theta);

// Sum of gamma_k^2 / sigma2. Zero for an empty sequence.
double FisherInformation(std::span<const double> gammas,
                         const NoiseModel& noise);

Trajectory<4> SimulateState(const Model& model, const State& x0,
                            std::span<const double> controls, double dt,
                            double theta, double t0 = 0.0);

Trajectory<8> SimulateExtended(const Model& model, const ExtendedState& xs0,
                               std::span<const double> controls, double dt,
                               double theta, double t0 = 0.0);

}  // namespace activeid

#endif  // ACTIVEID_MODEL_H_
