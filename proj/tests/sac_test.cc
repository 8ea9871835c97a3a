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
#include <vector>

#include "gtest/gtest.h"
#include "activeid/estimator.h"
#include "activeid/model.h"
#include "activeid/sac.h"

namespace activeid {
namespace {

constexpr double kEll = 0.368;

// Output independent of theta, so no trajectory carries information.
class BlindModel final : public Model {
 public:
  State Dynamics(const State& x, Control u, double theta) const override {
    return inner_.Dynamics(x, u, theta);
  }
  double Output(const State& x, Control, double) const override {
    return x(kXB);
  }
  Derivatives Jacobians(const State& x, Control u,
                        double theta) const override {
    Derivatives d = inner_.Jacobians(x, u, theta);
    d.yx = RowVec4(1, 0, 0, 0);
    d.ytheta = 0.0;
    d.yu = 0.0;
    return d;
  }

 private:
  SuspendedMass inner_;
};

class ZeroCost final : public RunningCost {
 public:
  double Value(const ExtendedState&, Control) const override { return 0.0; }
  ExtendedState Gradient(const ExtendedState&, Control) const override {
    return ExtendedState::Zero();
  }
};

ExtendedState Swinging() {
  return MakeExtended(State(0.0, 0.2, 0.25, -0.5),
                      Eigen::Vector4d(0.0, 0.0, 0.1, 0.3));
}

TEST(RunningCost, UnitInformation) {
  // gamma = -m phidot^2 = 1 needs phidot^2 = 20 with psi = 0
  SuspendedMass model;
  const ExtendedState xs = MakeExtended(State(0, 0, 0, std::sqrt(20.0)));
  ASSERT_NEAR(GammaTheta(model, xs, 0.0, kEll), -1.0, 1e-12);
  EXPECT_NEAR(InformationCost(model, kEll, NoiseModel{1.0}, 1e-6).Value(xs, 0.0),
              1.0 / (1.0 + 1e-6), 1e-15);
}

TEST(RunningCost, SaturatesAtRest) {
  SuspendedMass model;
  SacConfig cfg;
  cfg.eps_info = 1e-6;
  EXPECT_DOUBLE_EQ(RunningCostValue(model, ExtendedState::Zero(), 0.0, kEll,
                                    NoiseModel{}, cfg),
                   1e6);
}

TEST(RunningCost, AddsTrackingQuadratic) {
  SuspendedMass model;
  SacConfig cfg;
  cfg.eps_info = 1e-6;
  TrackingTerm tracking;
  tracking.q(kXB, kXB) = 1.0;
  const ExtendedState xs = MakeExtended(State(1, 0, 0, 0));
  EXPECT_DOUBLE_EQ(
      RunningCostValue(model, xs, 0.0, kEll, NoiseModel{}, cfg, tracking),
      1e6 + 1.0);
}

TEST(RunningCost, GradientMatchesDifferences) {
  SuspendedMass model;
  TrackingTerm tracking;
  tracking.q = Eigen::Vector4d(2.0, 0.5, 1.0, 0.1).asDiagonal();
  tracking.ref = State(0.1, 0, 0, 0);
  const InformationCost cost(model, kEll, NoiseModel{}, 1.0, tracking);
  const ExtendedState xs = Swinging();
  const ExtendedState g = cost.Gradient(xs, 0.0);
  constexpr double h = 1e-6;
  for (int i = 0; i < 8; ++i) {
    ExtendedState p = xs, m = xs;
    p(i) += h;
    m(i) -= h;
    const double fd = (cost.Value(p, 0.0) - cost.Value(m, 0.0)) / (2 * h);
    EXPECT_NEAR(g(i), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Adjoint, ZeroCostGivesZeroCostate) {
  SuspendedMass model;
  const std::vector<double> zeros(120, 0.0);
  const Trajectory<8> nominal = SimulateExtended(model, Swinging(), zeros, 0.01, kEll);
  const AdjointTrajectory adj = ComputeAdjoint(model, nominal, ZeroCost(), kEll);
  ASSERT_EQ(adj.rho.size(), nominal.states.size());
  for (const ExtendedState& r : adj.rho) EXPECT_EQ(r, ExtendedState::Zero());
}

TEST(Adjoint, TerminalValueIsExactlyZero) {
  SuspendedMass model;
  const std::vector<double> zeros(120, 0.0);
  const Trajectory<8> nominal = SimulateExtended(model, Swinging(), zeros, 0.01, kEll);
  const InformationCost cost(model, kEll, NoiseModel{}, 1.0);
  const AdjointTrajectory adj = ComputeAdjoint(model, nominal, cost, kEll);
  EXPECT_EQ(adj.rho.back(), ExtendedState::Zero());
  EXPECT_DOUBLE_EQ(adj.times.back(), nominal.final_time());
}

TEST(Adjoint, DirectionalDerivativeMatchesCostDifferences) {
  SuspendedMass model;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::vector<double> zeros(120, 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    ExtendedState xs0;
    for (int i = 0; i < 8; ++i) xs0(i) = 0.5 * unit(rng);
    const double th = 0.4 + 0.1 * unit(rng);
    const InformationCost cost(model, th, NoiseModel{}, 1.0);
    const Trajectory<8> nominal = SimulateExtended(model, xs0, zeros, 0.01, th);
    const AdjointTrajectory adj = ComputeAdjoint(model, nominal, cost, th);
    // push along the costate so the expected change is as large as possible
    const ExtendedState delta = 1e-6 * adj.rho.front().normalized();
    const double change =
        HorizonCost(cost, SimulateExtended(model, xs0 + delta, zeros, 0.01, th)) -
        HorizonCost(cost, nominal);
    const double predicted = adj.rho.front().dot(delta);
    EXPECT_NEAR(change, predicted, 1e-3 * std::abs(predicted)) << "trial " << trial;
  }
}

TEST(Synthesize, NullWithoutFirstOrderImprovement) {
  SuspendedMass model;
  SacConfig cfg;
  const Action a = SynthesizeAction(model, Swinging(), 0.0, kEll, ZeroCost(), cfg);
  EXPECT_TRUE(a.is_null());
  EXPECT_EQ(a.u_star, 0.0);
}

TEST(Synthesize, NullAtTheRestEquilibrium) {
  SuspendedMass model;
  for (double eps : {1e-6, 1.0}) {
    SacConfig cfg;
    cfg.eps_info = eps;
    const Action a = SynthesizeAction(model, ExtendedState::Zero(), 0.0, kEll,
                                      NoiseModel{}, cfg, TrackingTerm{});
    EXPECT_TRUE(a.is_null()) << eps;
  }
}

TEST(Synthesize, SaturatesLargeActions) {
  // a distant tracking reference makes the nominal cost, and with it the
  // desired sensitivity, very large
  SuspendedMass model;
  SacConfig cfg;
  TrackingTerm far;
  far.q(kXB, kXB) = 1e4;
  far.ref(kXB) = 2.0;
  const Action a = SynthesizeAction(model, ExtendedState::Zero(), 0.0, kEll,
                                    NoiseModel{}, cfg, far);
  ASSERT_FALSE(a.is_null());
  EXPECT_EQ(a.u_star, cfg.u_max);
}

TEST(Synthesize, ReturnedActionImprovesCost) {
  SuspendedMass model;
  SacConfig cfg;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int non_null = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const ExtendedState xs = MakeExtended(
        State(0.1 * unit(rng), 0.3 * unit(rng), 0.3 * unit(rng), unit(rng)),
        Eigen::Vector4d(0.0, 0.1 * unit(rng), 0.2 * unit(rng), 0.5 * unit(rng)));
    const double t0 = 1.0 + 0.05 * trial;
    const Action a = SynthesizeAction(model, xs, t0, kEll, NoiseModel{}, cfg,
                                      TrackingTerm{});
    if (a.is_null()) continue;
    ++non_null;
    EXPECT_LE(std::abs(a.u_star), cfg.u_max);
    EXPECT_GE(a.duration, cfg.dt_min - 1e-12);
    EXPECT_GE(a.tau_star, t0 - 1e-12);
    EXPECT_LT(a.tau_star, t0 + cfg.horizon);
    EXPECT_LT(a.sensitivity, 0.0);
    EXPECT_LT(a.action_cost, a.nominal_cost);
  }
  EXPECT_GT(non_null, 10);
}

TEST(Synthesize, Deterministic) {
  SuspendedMass model;
  SacConfig cfg;
  const Action a = SynthesizeAction(model, Swinging(), 0.3, kEll, NoiseModel{},
                                    cfg, TrackingTerm{});
  const Action b = SynthesizeAction(model, Swinging(), 0.3, kEll, NoiseModel{},
                                    cfg, TrackingTerm{});
  EXPECT_EQ(a.u_star, b.u_star);
  EXPECT_EQ(a.tau_star, b.tau_star);
  EXPECT_EQ(a.duration, b.duration);
}

TEST(Synthesize, RejectsNonFiniteStart) {
  SuspendedMass model;
  ExtendedState xs = ExtendedState::Zero();
  xs(2) = std::nan("");
  EXPECT_THROW(SynthesizeAction(model, xs, 0.0, kEll, NoiseModel{}, SacConfig{},
                                TrackingTerm{}),
               std::invalid_argument);
}

TEST(SacConfig, Validation) {
  EXPECT_NO_THROW(SacConfig{}.Validate());
  SacConfig c;
  c.horizon = 0.01;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = SacConfig{};
  c.r_sac = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = SacConfig{};
  c.gamma_ad = 1.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = SacConfig{};
  c.eps_info = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = SacConfig{};
  c.tracking.q(0, 0) = -1.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

TEST(Loop, BlindModelNeverActs) {
  BlindModel model;
  SacConfig cfg;
  cfg.bias_weight = 0.0;
  std::vector<double> applied;
  RunSacLoop(model, ExtendedState::Zero(), [] { return kEll; },
             [&](double, Control u) { applied.push_back(u); }, 3.0, 1.0,
             NoiseModel{}, cfg);
  ASSERT_EQ(applied.size(), 300u);
  for (double u : applied) EXPECT_EQ(u, 0.0);
}

TEST(Loop, QuiescentLeadThenInformativeExcitation) {
  SuspendedMass model;
  SacConfig cfg;
  std::vector<double> applied;
  const Trajectory<8> traj = RunSacLoop(
      model, ExtendedState::Zero(), [] { return kEll; },
      [&](double, Control u) { applied.push_back(u); }, 6.0, 1.0,
      NoiseModel{}, cfg);
  ASSERT_EQ(applied.size(), 600u);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(applied[k], 0.0) << k;
  double peak = 0.0;
  for (double u : applied) peak = std::max(peak, std::abs(u));
  EXPECT_GT(peak, 0.0);
  EXPECT_LE(peak, cfg.u_max);

  std::vector<double> gammas;
  for (std::size_t k = 0; k < applied.size(); ++k) {
    gammas.push_back(GammaTheta(model, traj.states[k], applied[k], kEll));
  }
  EXPECT_GT(FisherInformation(gammas, NoiseModel{}), 0.0);
}

}  // namespace
}  // namespace activeid
