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

#ifndef ACTIVEID_ESTIMATOR_H_
#define ACTIVEID_ESTIMATOR_H_

#include <functional>
#include <mutex>
#include <span>
#include <vector>

#include "activeid/integrator.h"
#include "activeid/model.h"
#include "activeid/types.h"

namespace activeid {

struct Measurement {
  double t = 0.0;      // s
  double force = 0.0;  // N
};

// Force samples plus the gripper acceleration record that produced them.
// controls[k] is the acceleration applied on [t0 + k dt, t0 + (k+1) dt); the
// sample taken at a grid time t_k sees controls[k].
class MeasurementBuffer {
 public:
  MeasurementBuffer() = default;
  MeasurementBuffer(double t0, double dt, const State& x0);

  void AddControl(Control u);
  void AddSample(const Measurement& m);

  // Copy holding only the samples with t <= t_end and the controls they need.
  MeasurementBuffer Truncated(double t_end) const;

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  const State& x0() const { return x0_; }
  const std::vector<double>& controls() const { return controls_; }
  const std::vector<Measurement>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }

 private:
  double t0_ = 0.0;
  double dt_ = 0.01;
  State x0_ = State::Zero();
  std::vector<double> controls_;
  std::vector<Measurement> samples_;
};

struct EstimatorConfig {
  double rate = 2.0;        // Hz
  double start_time = 1.0;  // first tick, s
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double step0 = 0.05;      // largest trial step, m^2 per cost unit
  int max_backtracks = 20;
  int iterations_per_tick = 1;
  double theta_min = 0.10;  // m
  double theta_max = 0.80;  // m

  void Validate() const;
  double Clamp(double theta) const;
};

struct EstimateRecord {
  double t = 0.0;
  double theta_hat = 0.0;
  double beta_value = 0.0;
  bool accepted = false;
};

// Forward observer output on the control grid.
struct Prediction {
  Trajectory<8> traj;          // extended states (x, psi)
  std::vector<double> force;   // y at each knot
  std::vector<double> gamma;   // d y / d theta at each knot

  // Linear interpolation on the grid. Throws std::out_of_range outside it.
  double ForceAt(double t) const;
  double GammaAt(double t) const;
};

// Integrates the model at theta from rest-state x0 driven by the recorded
// gripper accelerations.
Prediction Observe(const Model& model, std::span<const double> controls,
                   double theta, const State& x0, double dt, double t0 = 0.0);

struct BetaEvaluation {
  double beta = 0.0;
  double gradient = 0.0;   // d beta / d theta
  double curvature = 0.0;  // Gauss-Newton curvature, i.e. Fisher information
};

// 0.5 * sum (y_meas - y)^2 / sigma2 and its derivatives. Throws
// std::invalid_argument on an empty buffer and std::out_of_range when a
// sample lies outside the recorded controls.
BetaEvaluation EvaluateBeta(const Model& model, double theta,
                            const MeasurementBuffer& buffer,
                            const NoiseModel& noise);
double Beta(const Model& model, double theta, const MeasurementBuffer& buffer,
            const NoiseModel& noise);
double BetaGradient(const Model& model, double theta,
                    const MeasurementBuffer& buffer, const NoiseModel& noise);

// Armijo-backtracked gradient descent on beta. The first trial step is
// min(step0, 1 / curvature); a move is accepted only when
//   beta(new) <= beta(old) - armijo_c * step * gradient^2.
// Returns the previous estimate (accepted = false) when no step qualifies.
EstimateRecord EstimatorStep(const Model& model, double theta_hat,
                             const MeasurementBuffer& buffer,
                             const NoiseModel& noise,
                             const EstimatorConfig& cfg, double t = 0.0);

// What the estimator publishes: the estimate and the observer state at the
// newest sample time, predicted with that estimate.
struct EstimateSnapshot {
  double t = 0.0;
  double theta = 0.0;
  ExtendedState state = ExtendedState::Zero();
};

// Single-writer, many-reader handoff between the estimator and its
// consumers. Readers see whole snapshots only.
class EstimateProvider {
 public:
  explicit EstimateProvider(const EstimateSnapshot& initial);
  void Publish(const EstimateSnapshot& snapshot);
  EstimateSnapshot Read() const;

 private:
  mutable std::mutex mutex_;
  EstimateSnapshot snapshot_;
};

// Ticks at start_time, start_time + 1/rate, ... over a growing buffer.
class OnlineEstimator {
 public:
  OnlineEstimator(const Model& model, const NoiseModel& noise,
                  const EstimatorConfig& cfg, double theta0);

  bool Due(double t) const;
  // Runs one tick over `buffer` and publishes accepted estimates.
  EstimateRecord Tick(double t, const MeasurementBuffer& buffer,
                      EstimateProvider* provider = nullptr);

  double theta() const { return theta_; }
  const std::vector<EstimateRecord>& history() const { return history_; }

 private:
  const Model& model_;
  NoiseModel noise_;
  EstimatorConfig cfg_;
  double theta_;
  int ticks_ = 0;
  std::vector<EstimateRecord> history_;
};

// Replays a recorded buffer through the 2 Hz schedule up to `duration`.
std::vector<EstimateRecord> RunEstimator(
    const Model& model, const MeasurementBuffer& buffer, double theta0,
    const NoiseModel& noise, const EstimatorConfig& cfg, double duration,
    EstimateProvider* provider = nullptr);

}  // namespace activeid

#endif  // ACTIVEID_ESTIMATOR_H_
