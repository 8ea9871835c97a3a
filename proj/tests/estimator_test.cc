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

#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "gtest/gtest.h"
#include "activeid/estimator.h"
#include "activeid/model.h"

namespace activeid {
namespace {

constexpr double kEll = 0.368;
constexpr double kDt = 0.01;

std::vector<double> Excitation(int n) {
  std::vector<double> u(n, 0.0);
  for (int k = 100; k < n; ++k) {
    u[k] = 3.0 * std::sin(0.09 * k) + 1.5 * std::sin(0.23 * k);
  }
  return u;
}

// Noise-free samples of the plant at `ell` on the control grid.
MeasurementBuffer Record(const Model& model, double ell,
                         const std::vector<double>& u, double noise_std = 0.0,
                         std::uint64_t seed = 0) {
  const Trajectory<4> traj = SimulateState(model, State::Zero(), u, kDt, ell);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, noise_std > 0 ? noise_std : 1.0);
  MeasurementBuffer buffer(0.0, kDt, State::Zero());
  for (std::size_t k = 0; k < u.size(); ++k) {
    buffer.AddControl(u[k]);
    const double w = noise_std > 0 ? noise_std * normal(rng) : 0.0;
    buffer.AddSample({traj.time(k), model.Output(traj.states[k], u[k], ell) + w});
  }
  return buffer;
}

TEST(Observe, RestPredictsWeight) {
  SuspendedMass model;
  const std::vector<double> zeros(100, 0.0);
  const Prediction p = Observe(model, zeros, 0.3, State::Zero(), kDt);
  for (double f : p.force) EXPECT_DOUBLE_EQ(f, 0.05 * 9.81);
}

TEST(Observe, ReproducesOwnRecordAtTruth) {
  SuspendedMass model;
  const std::vector<double> u = Excitation(400);
  const MeasurementBuffer buffer = Record(model, kEll, u);
  const Prediction p = Observe(model, buffer.controls(), kEll, State::Zero(), kDt);
  for (const Measurement& m : buffer.samples()) {
    EXPECT_NEAR(p.ForceAt(m.t), m.force, 1e-6);
  }
}

TEST(Observe, WrongLengthPredictsWorse) {
  SuspendedMass model;
  const std::vector<double> u = Excitation(400);
  const MeasurementBuffer buffer = Record(model, kEll, u);
  auto worst = [&](double th) {
    const Prediction p = Observe(model, buffer.controls(), th, State::Zero(), kDt);
    double e = 0.0;
    for (const Measurement& m : buffer.samples()) {
      e = std::max(e, std::abs(p.ForceAt(m.t) - m.force));
    }
    return e;
  };
  const double at_truth = worst(kEll);
  for (double th = 0.30; th <= 0.45; th += 0.01) {
    if (std::abs(th - kEll) < 1e-9) continue;
    EXPECT_GT(worst(th), at_truth) << th;
  }
}

TEST(Observe, InterpolatesAndRejectsOutsideSpan) {
  SuspendedMass model;
  const std::vector<double> u = Excitation(200);
  const Prediction p = Observe(model, u, kEll, State::Zero(), kDt);
  EXPECT_NEAR(p.ForceAt(1.505), 0.5 * (p.force[150] + p.force[151]), 1e-15);
  EXPECT_THROW(p.ForceAt(-0.02), std::out_of_range);
  EXPECT_THROW(p.ForceAt(2.5), std::out_of_range);
}

TEST(Beta, ZeroForExactData) {
  SuspendedMass model;
  const MeasurementBuffer buffer = Record(model, kEll, Excitation(300));
  const BetaEvaluation e = EvaluateBeta(model, kEll, buffer, NoiseModel{});
  EXPECT_NEAR(e.beta, 0.0, 1e-20);
  EXPECT_NEAR(e.gradient, 0.0, 1e-8);
}

TEST(Beta, HalfSquaredResidual) {
  SuspendedMass model;
  MeasurementBuffer buffer(0.0, kDt, State::Zero());
  buffer.AddControl(0.0);
  buffer.AddSample({0.0, 0.05 * 9.81 + 1.0});
  EXPECT_DOUBLE_EQ(Beta(model, kEll, buffer, NoiseModel{1.0}), 0.5);
}

TEST(Beta, ZeroResidualsGiveExactlyZeroGradient) {
  SuspendedMass model;
  MeasurementBuffer buffer(0.0, kDt, State::Zero());
  for (int k = 0; k < 50; ++k) {
    buffer.AddControl(0.0);
    buffer.AddSample({k * kDt, 0.05 * 9.81});
  }
  EXPECT_EQ(BetaGradient(model, 0.3, buffer, NoiseModel{}), 0.0);
}

TEST(Beta, EmptyBufferIsAnError) {
  SuspendedMass model;
  EXPECT_THROW(Beta(model, kEll, MeasurementBuffer(0.0, kDt, State::Zero()),
                    NoiseModel{}),
               std::invalid_argument);
}

TEST(Beta, SampleOutsideControlsIsAnError) {
  SuspendedMass model;
  MeasurementBuffer buffer(0.0, kDt, State::Zero());
  buffer.AddControl(0.0);
  buffer.AddSample({0.5, 0.49});
  EXPECT_THROW(Beta(model, kEll, buffer, NoiseModel{}), std::out_of_range);
}

TEST(Beta, GridMinimumAtTruthForNoiselessData) {
  SuspendedMass model;
  const MeasurementBuffer buffer = Record(model, kEll, Excitation(600));
  double best_theta = 0.0;
  double best = INFINITY;
  for (int i = 0; i <= 150; ++i) {
    const double th = 0.30 + 1e-3 * i;
    const double b = Beta(model, th, buffer, NoiseModel{});
    if (b < best) {
      best = b;
      best_theta = th;
    }
  }
  EXPECT_NEAR(best_theta, kEll, 1e-9);
  // the gradient changes sign across the minimizer
  EXPECT_LT(BetaGradient(model, kEll - 1e-3, buffer, NoiseModel{}), 0.0);
  EXPECT_GT(BetaGradient(model, kEll + 1e-3, buffer, NoiseModel{}), 0.0);
  const double curvature = EvaluateBeta(model, kEll, buffer, NoiseModel{}).curvature;
  EXPECT_LT(std::abs(BetaGradient(model, kEll, buffer, NoiseModel{})),
            1e-3 * curvature);
}

TEST(Beta, GradientMatchesCentralDifferences) {
  SuspendedMass model;
  const MeasurementBuffer buffer = Record(model, kEll, Excitation(400), 0.01, 4);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> theta(0.30, 0.45);
  constexpr double delta = 1e-6;
  for (int i = 0; i < 20; ++i) {
    const double th = theta(rng);
    const double fd = (Beta(model, th + delta, buffer, NoiseModel{}) -
                       Beta(model, th - delta, buffer, NoiseModel{})) /
                      (2 * delta);
    EXPECT_NEAR(BetaGradient(model, th, buffer, NoiseModel{}), fd,
                1e-3 * std::max(1.0, std::abs(fd)))
        << th;
  }
}

TEST(Step, UnchangedWithoutGradient) {
  SuspendedMass model;
  MeasurementBuffer buffer(0.0, kDt, State::Zero());
  for (int k = 0; k < 50; ++k) {
    buffer.AddControl(0.0);
    buffer.AddSample({k * kDt, 0.05 * 9.81});
  }
  const EstimateRecord r =
      EstimatorStep(model, 0.42, buffer, NoiseModel{}, EstimatorConfig{});
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.theta_hat, 0.42);
}

TEST(Step, NoiselessConvergenceFromFarGuess) {
  SuspendedMass model;
  const MeasurementBuffer buffer = Record(model, kEll, Excitation(600));
  EstimatorConfig cfg;
  double theta = 0.448;
  double beta = Beta(model, theta, buffer, NoiseModel{});
  for (int i = 0; i < 30; ++i) {
    const EstimateRecord r = EstimatorStep(model, theta, buffer, NoiseModel{}, cfg);
    if (r.accepted) {
      // sufficient decrease holds, so beta never rises
      EXPECT_LE(r.beta_value, beta);
      beta = r.beta_value;
    }
    theta = r.theta_hat;
  }
  EXPECT_NEAR(theta, kEll, 1e-3);
}

TEST(Step, EstimatesStayWithinBounds) {
  SuspendedMass model;
  const MeasurementBuffer buffer = Record(model, kEll, Excitation(300));
  EstimatorConfig cfg;
  cfg.theta_min = 0.40;
  cfg.theta_max = 0.50;
  cfg.iterations_per_tick = 10;
  const EstimateRecord r = EstimatorStep(model, 0.45, buffer, NoiseModel{}, cfg);
  EXPECT_GE(r.theta_hat, 0.40);
  EXPECT_LE(r.theta_hat, 0.50);
  EXPECT_DOUBLE_EQ(r.theta_hat, 0.40);
}

TEST(Config, Validation) {
  EXPECT_NO_THROW(EstimatorConfig{}.Validate());
  EstimatorConfig c;
  c.rate = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = EstimatorConfig{};
  c.armijo_c = 1.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = EstimatorConfig{};
  c.shrink = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = EstimatorConfig{};
  c.theta_min = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

TEST(Buffer, RejectsDecreasingOrNonFiniteSamples) {
  MeasurementBuffer buffer(0.0, kDt, State::Zero());
  buffer.AddSample({0.1, 0.5});
  EXPECT_THROW(buffer.AddSample({0.05, 0.5}), std::invalid_argument);
  EXPECT_THROW(buffer.AddSample({0.2, std::nan("")}), std::invalid_argument);
  EXPECT_THROW(buffer.AddControl(INFINITY), std::invalid_argument);
  EXPECT_NO_THROW(buffer.AddSample({0.1, 0.4}));
}

TEST(Buffer, TruncationKeepsNeededControls) {
  SuspendedMass model;
  const MeasurementBuffer buffer = Record(model, kEll, Excitation(300));
  const MeasurementBuffer head = buffer.Truncated(1.0);
  EXPECT_EQ(head.samples().size(), 101u);
  EXPECT_EQ(head.controls().size(), 101u);
}

TEST(Run, NoUpdatesBeforeFirstSecondAndTwoHertzAfter) {
  SuspendedMass model;
  const MeasurementBuffer buffer = Record(model, kEll, Excitation(600), 0.01, 2);
  const std::vector<EstimateRecord> history =
      RunEstimator(model, buffer, 0.428, NoiseModel{}, EstimatorConfig{}, 6.0);
  ASSERT_EQ(history.size(), 11u);
  for (std::size_t i = 0; i < history.size(); ++i) {
    EXPECT_DOUBLE_EQ(history[i].t, 1.0 + 0.5 * i);
  }
  // the first second is rest data and carries no information
  EXPECT_FALSE(history.front().accepted);
  EXPECT_EQ(history.front().theta_hat, 0.428);
  EXPECT_NEAR(history.back().theta_hat, kEll, 0.01);
}

TEST(Run, PublishesSnapshots) {
  SuspendedMass model;
  const MeasurementBuffer buffer = Record(model, kEll, Excitation(600));
  EstimateProvider provider({0.0, 0.448, ExtendedState::Zero()});
  RunEstimator(model, buffer, 0.448, NoiseModel{}, EstimatorConfig{}, 3.0,
               &provider);
  const EstimateSnapshot snap = provider.Read();
  EXPECT_NEAR(snap.t, 3.0, 1e-12);
  EXPECT_NEAR(snap.theta, kEll, 2e-3);
  // the published state is the observer prediction at the newest sample
  const Prediction p =
      Observe(model, buffer.Truncated(3.0).controls(), snap.theta, State::Zero(), kDt);
  EXPECT_EQ(snap.state, p.traj.states[300]);
}

TEST(Provider, ReadersSeeWholeSnapshots) {
  EstimateProvider provider({0.0, 0.0, ExtendedState::Zero()});
  std::thread writer([&] {
    for (int i = 1; i <= 2000; ++i) {
      provider.Publish({double(i), double(i), ExtendedState::Constant(i)});
    }
  });
  for (int i = 0; i < 2000; ++i) {
    const EstimateSnapshot s = provider.Read();
    EXPECT_EQ(s.t, s.theta);
    EXPECT_EQ(s.state, ExtendedState::Constant(s.t));
  }
  writer.join();
}

}  // namespace
}  // namespace activeid
