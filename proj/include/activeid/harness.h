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

#ifndef ACTIVEID_HARNESS_H_
#define ACTIVEID_HARNESS_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "activeid/estimator.h"
#include "activeid/logs.h"
#include "activeid/model.h"
#include "activeid/sac.h"
#include "activeid/trajopt.h"
#include "activeid/types.h"

namespace activeid {

// True plant: the suspended mass at the true length, with Gaussian noise on
// the force output only.
class PlantSim {
 public:
  PlantSim(const SuspendedMass& model, double ell, const NoiseModel& noise,
           std::uint64_t seed, double dt = 0.01);

  void Reset(const State& x = State::Zero(), double t = 0.0);

  // Noisy force at the current time and state under control u.
  Measurement Sample(Control u);
  // Noise-free force at the current state.
  double TrueForce(Control u) const;
  // Integrates one grid step. Throws DivergenceError on a non-finite state.
  void Step(Control u);
  // Sample, then step.
  Measurement Advance(Control u);

  double time() const { return t_; }
  const State& state() const { return x_; }
  double dt() const { return dt_; }
  double ell() const { return ell_; }
  // Grid steps on which the physical tension was not positive.
  int slack_steps() const { return slack_steps_; }

 private:
  const SuspendedMass& model_;
  double ell_;
  NoiseModel noise_;
  double dt_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  State x_ = State::Zero();
  double t_ = 0.0;
  double reset_t_ = 0.0;
  std::size_t since_reset_ = 0;
  std::size_t step_ = 0;
  int slack_steps_ = 0;
};

// Terminal predicate on the rolled-out mass state.
struct SuccessGeometry {
  double x_target = -0.45;  // m
  double x_tol = 0.05;      // m
  double z_rim = -0.30;     // m, lowest acceptable terminal height
  double v_max = 0.2;       // m/s

  void Validate() const;
};

bool SuccessCheck(const MassState& terminal, const SuccessGeometry& geometry);

// Euclidean distance from the terminal mass position to the task target.
double MissDistance(const MassState& terminal, const MassState& target);

struct TrialConfig {
  double theta0 = 0.368;
  bool use_estimation = true;
  double est_duration = 6.0;    // s
  double quiescent_lead = 1.0;  // s
  std::uint64_t seed = 0;
  double dt = 0.01;             // plant and measurement grid, s

  Params plant;                 // true parameters
  ForceModel force_model = ForceModel::kNominal;
  NoiseModel noise;
  SacConfig sac;
  EstimatorConfig estimator;
  TaskConfig task;
  SuccessGeometry success;

  void Validate() const;
};

struct EstimationRun {
  std::vector<EstimateRecord> estimates;
  double theta_final = 0.0;
  MeasurementBuffer buffer;
  RunLog log;
  // Information about ell carried by the applied controls, evaluated at the
  // true length.
  double fisher_information = 0.0;
  int sac_updates = 0;
  int null_actions = 0;
  int slack_steps = 0;
};

// Stage 1: quiescent lead, then SAC excitation and the 2 Hz estimator on a
// shared simulated clock until est_duration.
EstimationRun RunEstimation(const TrialConfig& cfg);

struct TrialResult {
  double theta0 = 0.0;
  bool use_estimation = false;
  std::uint64_t seed = 0;
  std::vector<EstimateRecord> estimates;
  double theta_final = 0.0;
  double fisher_information = 0.0;

  bool plan_converged = false;
  TaskPlan plan;
  Trajectory<4> rollout;
  MassState terminal_mass = MassState::Zero();
  double miss = 0.0;
  bool success = false;
  std::string error;  // non-empty when a stage failed

  RunLog estimation_log;
  RunLog task_log;

  // Simulated-time metadata.
  double estimation_end = 0.0;
  int estimator_ticks = 0;
  int sac_updates = 0;
  int slack_steps = 0;
};

// Estimate (optional), reset, plan at the estimate, open-loop rollout on the
// true plant, success check. Stage failures are reported through `error`
// and a false `success`.
TrialResult RunTrial(const TrialConfig& cfg);

// Rolls the plan's controls open-loop on a plant at rest.
Trajectory<4> Rollout(const SuspendedMass& model, double ell,
                      const TaskPlan& plan);

std::vector<double> SweepThetas();

struct SweepResult {
  std::vector<TrialResult> with_estimation;
  std::vector<TrialResult> without_estimation;
  double mean_theta = 0.0;  // over the with-estimation finals
  double std_theta = 0.0;   // sample standard deviation
};

// Runs every sweep theta0 with and without estimation. Trial i uses seed
// base.seed + i.
SweepResult RunSweep(const TrialConfig& base);

}  // namespace activeid

#endif  // ACTIVEID_HARNESS_H_
