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
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "activeid/integrator.h"
#include "activeid/model.h"

namespace activeid {
namespace {

constexpr double kEll = 0.368;

// A model with fixed theta-derivatives, for checking the extended system's
// linear structure.
class LinearHook final : public Model {
 public:
  explicit LinearHook(double scale) : scale_(scale) {}
  State Dynamics(const State& x, Control, double theta) const override {
    return scale_ * theta * x.cwiseProduct(State(1, 2, 3, 4)) + State(0, 0, 0, scale_ * theta);
  }
  double Output(const State& x, Control, double) const override { return x(0); }
  Derivatives Jacobians(const State& x, Control, double theta) const override {
    Derivatives d;
    d.fx = (scale_ * theta * State(1, 2, 3, 4)).asDiagonal();
    d.ftheta = scale_ * x.cwiseProduct(State(1, 2, 3, 4)) + State(0, 0, 0, scale_);
    d.yx(0) = 1.0;
    return d;
  }

 private:
  double scale_;
};

TEST(Dynamics, EquilibriumIsStationary) {
  SuspendedMass model;
  EXPECT_EQ(model.Dynamics(State::Zero(), 0.0, kEll), State::Zero());
}

TEST(Dynamics, HorizontalStringFallsAtGOverL) {
  SuspendedMass model;
  const State f =
      model.Dynamics(State(0, 0, std::numbers::pi / 2, 0), 0.0, kEll);
  EXPECT_NEAR(f(kPhiDot), -26.658, 1e-3);
}

TEST(Dynamics, UnitAccelerationAtRest) {
  SuspendedMass model;
  const State f = model.Dynamics(State::Zero(), 1.0, kEll);
  EXPECT_NEAR(f(kPhiDot), 2.7174, 1e-4);
  EXPECT_EQ(f(kVB), 1.0);
}

TEST(Dynamics, RejectsNonFiniteInput) {
  SuspendedMass model;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(model.Dynamics(State(nan, 0, 0, 0), 0.0, kEll),
               std::invalid_argument);
  EXPECT_THROW(model.Dynamics(State::Zero(), nan, kEll), std::invalid_argument);
  EXPECT_THROW(model.Output(State::Zero(), 0.0, nan), std::invalid_argument);
}

TEST(Dynamics, PureAndDeterministic) {
  SuspendedMass model;
  const State x(0.1, -0.2, 0.3, 0.4);
  EXPECT_EQ(model.Dynamics(x, 1.5, kEll), model.Dynamics(x, 1.5, kEll));
  EXPECT_EQ(model.Output(x, 1.5, kEll), model.Output(x, 1.5, kEll));
}

TEST(Output, RestReadsWeight) {
  SuspendedMass model;
  EXPECT_NEAR(model.Output(State::Zero(), 0.0, kEll), 0.4905, 1e-12);
}

TEST(Output, SpinningLowersPrintedForce) {
  SuspendedMass model;
  EXPECT_NEAR(model.Output(State(0, 0, 0, 1), 0.0, kEll), 0.4721, 1e-12);
}

TEST(Output, AccelerationInvisibleAtZeroAngle) {
  SuspendedMass model;
  EXPECT_NEAR(model.Output(State::Zero(), 2.0, kEll), 0.4905, 1e-12);
}

TEST(Output, DerivedTensionModel) {
  SuspendedMass model(0.05, 9.81, ForceModel::kDerivedTension);
  // m (g + l phidot^2)
  EXPECT_NEAR(model.Output(State(0, 0, 0, 1), 0.0, kEll), 0.05 * (9.81 + kEll),
              1e-12);
  EXPECT_EQ(ParseForceModel("derived-tension"), ForceModel::kDerivedTension);
  EXPECT_EQ(ParseForceModel("nominal"), ForceModel::kNominal);
  EXPECT_THROW(ParseForceModel("spring"), std::invalid_argument);
}

TEST(Jacobians, ThetaDerivativeVanishesAtRest) {
  SuspendedMass model;
  const Derivatives d = model.Jacobians(State::Zero(), 0.0, kEll);
  EXPECT_EQ(d.ftheta, State::Zero());
}

TEST(Jacobians, OutputThetaDerivativeIsCentripetal) {
  SuspendedMass model;
  EXPECT_NEAR(model.Jacobians(State(0, 0, 0, 1), 0.0, kEll).ytheta, -0.05,
              1e-15);
}

TEST(Jacobians, MatchFiniteDifferencesAtRandomStates) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  constexpr double h = 1e-6;
  for (ForceModel fm : {ForceModel::kNominal, ForceModel::kDerivedTension}) {
    SuspendedMass model(0.05, 9.81, fm);
    for (int p = 0; p < 100; ++p) {
      const State x(0.5 * unit(rng), unit(rng), unit(rng), 3 * unit(rng));
      const double u = 5 * unit(rng);
      const double th = 0.4 + 0.15 * unit(rng);
      const Derivatives d = model.Jacobians(x, u, th);
      for (int j = 0; j < 4; ++j) {
        State xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        const State col =
            (model.Dynamics(xp, u, th) - model.Dynamics(xm, u, th)) / (2 * h);
        for (int i = 0; i < 4; ++i) {
          EXPECT_NEAR(d.fx(i, j), col(i), 1e-4 * std::max(1.0, std::abs(col(i))));
        }
        const double dy =
            (model.Output(xp, u, th) - model.Output(xm, u, th)) / (2 * h);
        EXPECT_NEAR(d.yx(j), dy, 1e-4 * std::max(1.0, std::abs(dy)));
      }
      const State fth =
          (model.Dynamics(x, u, th + h) - model.Dynamics(x, u, th - h)) / (2 * h);
      EXPECT_LT((d.ftheta - fth).cwiseAbs().maxCoeff(),
                1e-4 * std::max(1.0, fth.cwiseAbs().maxCoeff()));
      const double yth =
          (model.Output(x, u, th + h) - model.Output(x, u, th - h)) / (2 * h);
      EXPECT_NEAR(d.ytheta, yth, 1e-4 * std::max(1.0, std::abs(yth)));
      const double yu =
          (model.Output(x, u + h, th) - model.Output(x, u - h, th)) / (2 * h);
      EXPECT_NEAR(d.yu, yu, 1e-4 * std::max(1.0, std::abs(yu)));
    }
  }
}

TEST(Jacobians, AnalyticSecondOrderMatchesFallback) {
  // the base-class default differences Jacobians() numerically
  struct Fallback final : Model {
    SuspendedMass inner;
    State Dynamics(const State& x, Control u, double th) const override {
      return inner.Dynamics(x, u, th);
    }
    double Output(const State& x, Control u, double th) const override {
      return inner.Output(x, u, th);
    }
    Derivatives Jacobians(const State& x, Control u, double th) const override {
      return inner.Jacobians(x, u, th);
    }
  } fallback;
  SuspendedMass model;
  const State x(0.1, 0.2, 0.7, -1.3);
  const Eigen::Vector4d psi(0.3, -0.2, 0.5, 1.1);
  const SecondOrderTerms a = model.SecondOrder(x, psi, 1.2, kEll);
  const SecondOrderTerms b = fallback.SecondOrder(x, psi, 1.2, kEll);
  EXPECT_LT((a.psidot_x - b.psidot_x).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((a.psidot_u - b.psidot_u).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((a.gamma_x - b.gamma_x).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(a.gamma_u, b.gamma_u, 1e-6);
}

TEST(Extended, EquilibriumIsStationary) {
  SuspendedMass model;
  EXPECT_EQ(ExtendedRhs(model, ExtendedState::Zero(), 0.0, kEll),
            ExtendedState::Zero());
}

TEST(Extended, SensitivityMatchesTrajectoryDifferences) {
  SuspendedMass model;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  constexpr double delta = 1e-5;
  for (int run = 0; run < 5; ++run) {
    const double th = 0.4 + 0.15 * unit(rng);
    std::vector<double> u(200);
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (k % 10 == 0) u[k] = 3 * unit(rng);
      else u[k] = u[k - 1];
    }
    const Trajectory<8> ext =
        SimulateExtended(model, ExtendedState::Zero(), u, 0.01, th);
    const Trajectory<4> plus = SimulateState(model, State::Zero(), u, 0.01, th + delta);
    const Trajectory<4> minus = SimulateState(model, State::Zero(), u, 0.01, th - delta);
    double worst = 0.0;
    for (std::size_t k = 0; k < ext.states.size(); ++k) {
      const State fd = (plus.states[k] - minus.states[k]) / (2 * delta);
      worst = std::max(worst,
                       (SensitivityOf(ext.states[k]) - fd).cwiseAbs().maxCoeff());
    }
    EXPECT_LE(worst, 1e-4);
  }
}

TEST(Extended, SensitivityRateIsLinearInThetaDerivative) {
  const ExtendedState xs = MakeExtended(State(0.2, 0.1, 0.3, 0.4));
  const LinearHook one(1.0);
  const LinearHook two(2.0);
  // at psi = 0 the sensitivity rate is exactly D_theta f
  const ExtendedState a = ExtendedRhs(one, xs, 0.0, 0.5);
  const ExtendedState b = ExtendedRhs(two, xs, 0.0, 0.5);
  EXPECT_LT((b.tail<4>() - 2.0 * a.tail<4>()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gamma, ZeroWhenStationary) {
  SuspendedMass model;
  EXPECT_EQ(GammaTheta(model, ExtendedState::Zero(), 0.0, kEll), 0.0);
}

TEST(Gamma, EqualsOutputThetaDerivativeWithoutSensitivity) {
  SuspendedMass model;
  EXPECT_NEAR(GammaTheta(model, MakeExtended(State(0, 0, 0, 1)), 0.0, kEll),
              -0.05, 1e-15);
}

TEST(Gamma, MatchesOutputDifferencesAlongPerturbedTrajectories) {
  SuspendedMass model;
  std::vector<double> u(200);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = 2.0 * std::sin(0.05 * k);
  constexpr double delta = 1e-5;
  const Trajectory<8> ext =
      SimulateExtended(model, ExtendedState::Zero(), u, 0.01, kEll);
  const Trajectory<4> plus = SimulateState(model, State::Zero(), u, 0.01, kEll + delta);
  const Trajectory<4> minus = SimulateState(model, State::Zero(), u, 0.01, kEll - delta);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double fd = (model.Output(plus.states[k], u[k], kEll + delta) -
                       model.Output(minus.states[k], u[k], kEll - delta)) /
                      (2 * delta);
    EXPECT_NEAR(GammaTheta(model, ext.states[k], u[k], kEll), fd, 1e-4);
  }
}

TEST(Fisher, ArithmeticAndStructure) {
  const NoiseModel unit_var{4.0};
  const std::vector<double> one = {2.0};
  EXPECT_DOUBLE_EQ(FisherInformation(one, unit_var), 1.0);
  EXPECT_EQ(FisherInformation(std::vector<double>{}, NoiseModel{}), 0.0);
  EXPECT_EQ(FisherInformation(std::vector<double>(600, 0.0), NoiseModel{}), 0.0);

  const std::vector<double> a = {0.1, -0.2, 0.3};
  const std::vector<double> b = {0.5, 0.05};
  std::vector<double> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const NoiseModel noise;
  EXPECT_NEAR(FisherInformation(ab, noise),
              FisherInformation(a, noise) + FisherInformation(b, noise), 1e-9);
  EXPECT_GT(FisherInformation(std::vector<double>{0.0, 1e-3}, noise), 0.0);
  EXPECT_THROW(FisherInformation(a, NoiseModel{0.0}), std::invalid_argument);
}

TEST(Fisher, ZeroOnRestTrajectory) {
  SuspendedMass model;
  const std::vector<double> zeros(600, 0.0);
  const Trajectory<8> rest =
      SimulateExtended(model, ExtendedState::Zero(), zeros, 0.01, kEll);
  std::vector<double> gammas;
  for (std::size_t k = 0; k < zeros.size(); ++k) {
    gammas.push_back(GammaTheta(model, rest.states[k], 0.0, kEll));
  }
  EXPECT_EQ(FisherInformation(gammas, NoiseModel{}), 0.0);
}

TEST(Integrate, ZeroDynamicsHoldState) {
  auto rhs = [](double, const State&, double) -> State { return State::Zero(); };
  const State x0(1, 2, 3, 4);
  const std::vector<double> u(50, 7.0);
  const Trajectory<4> traj = Integrate<4>(rhs, x0, u, 0.01);
  ASSERT_EQ(traj.states.size(), 51u);
  for (const State& x : traj.states) EXPECT_EQ(x, x0);
}

double MassEnergy(const State& x) {
  // gripper at rest, so only the pendulum carries energy
  return 0.5 * 0.05 * kEll * kEll * x(3) * x(3) -
         0.05 * 9.81 * kEll * std::cos(x(2));
}

TEST(Integrate, UnforcedPendulumConservesEnergy) {
  SuspendedMass model;
  const std::vector<double> zeros(500, 0.0);
  const Trajectory<4> traj =
      SimulateState(model, State(0, 0, 0.3, 0), zeros, 0.01, kEll);
  const double e0 = MassEnergy(traj.states.front());
  double drift = 0.0;
  for (const State& x : traj.states) {
    drift = std::max(drift, std::abs(MassEnergy(x) - e0) / std::abs(e0));
  }
  EXPECT_LT(drift, 1e-6);
}

TEST(Integrate, FourthOrderConvergence) {
  SuspendedMass model;
  auto terminal = [&](double dt) {
    const int n = static_cast<int>(std::lround(2.0 / dt));
    std::vector<double> u(n);
    for (int k = 0; k < n; ++k) u[k] = 0.0;
    return SimulateState(model, State(0, 0, 0.8, 0.5), u, dt, kEll).back();
  };
  const State reference = terminal(1e-4);
  const double coarse = (terminal(0.02) - reference).norm();
  const double fine = (terminal(0.01) - reference).norm();
  EXPECT_NEAR(coarse / fine, 16.0, 2.0);
}

TEST(Integrate, DivergenceNamesTheStep) {
  auto rhs = [](double, const State& x, double) -> State { return x * 1e200; };
  const std::vector<double> u(10, 0.0);
  try {
    Integrate<4>(rhs, State::Ones(), u, 1.0);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_LT(e.step(), 10u);
  }
}

TEST(Integrate, RejectsBadArguments) {
  auto rhs = [](double, const State&, double) -> State { return State::Zero(); };
  const std::vector<double> u(3, 0.0);
  EXPECT_THROW(Integrate<4>(rhs, State::Zero(), u, 0.0), std::invalid_argument);
  const std::vector<double> bad = {0.0, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(Integrate<4>(rhs, State::Zero(), bad, 0.01), std::invalid_argument);
}

TEST(Params, Validation) {
  EXPECT_NO_THROW(Params{}.Validate());
  EXPECT_THROW((Params{0.0, 0.05, 9.81}.Validate()), std::invalid_argument);
  EXPECT_THROW((Params{0.3, -1.0, 9.81}.Validate()), std::invalid_argument);
  EXPECT_THROW(NoiseModel{-1.0}.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace activeid
