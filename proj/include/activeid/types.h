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

#ifndef ACTIVEID_TYPES_H_
#define ACTIVEID_TYPES_H_

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace activeid {

// Pendulum-cart state (xB, vB, phi, phidot).
using State = Eigen::Vector4d;
// State plus its sensitivity to the string length, (x, psi).
using ExtendedState = Eigen::Matrix<double, 8, 1>;
using Mat4 = Eigen::Matrix4d;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using RowVec4 = Eigen::RowVector4d;

// Gripper horizontal acceleration, m/s^2.
using Control = double;

enum StateIndex : int { kXB = 0, kVB = 1, kPhi = 2, kPhiDot = 3 };

inline State StateOf(const ExtendedState& xs) { return xs.head<4>(); }
inline Eigen::Vector4d SensitivityOf(const ExtendedState& xs) {
  return xs.tail<4>();
}
inline ExtendedState MakeExtended(const State& x,
                                  const Eigen::Vector4d& psi =
                                      Eigen::Vector4d::Zero()) {
  ExtendedState xs;
  xs << x, psi;
  return xs;
}

// Physical model parameters. ell is the uncertain parameter.
struct Params {
  double ell = 0.368;     // string length, m
  double mass = 0.05;     // suspended mass, kg
  double gravity = 9.81;  // m/s^2

  void Validate() const;
};

// Additive Gaussian output noise, variance in N^2.
struct NoiseModel {
  double sigma2 = 1e-4;

  void Validate() const;
};

// Raised when integration produces a non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace activeid

#endif  // ACTIVEID_TYPES_H_
