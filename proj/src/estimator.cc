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

#include "activeid/estimator.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace activeid {

namespace {

constexpr double kTimeEps = 1e-9;

std::size_t KnotIndex(double t, double t0, double dt) {
  return static_cast<std::size_t>(std::llround((t - t0) / dt));
}

double Interpolate(const std::vector<double>& values, double t0, double dt,
                   double t) {
  const double s = (t - t0) / dt;
  const double last = static_cast<double>(values.size()) - 1.0;
  if (values.empty() || s < -kTimeEps || s > last + kTimeEps) {
    throw std::out_of_range("observer: time " + std::to_string(t) +
                            " outside the predicted span");
  }
  const double clamped = std::clamp(s, 0.0, last);
  const std::size_t j = static_cast<std::size_t>(std::floor(clamped));
  if (j + 1 >= values.size()) return values.back();
  const double w = clamped - static_cast<double>(j);
  if (w < kTimeEps) return values[j];
  return (1.0 - w) * values[j] + w * values[j + 1];
}

}  // namespace

MeasurementBuffer::MeasurementBuffer(double t0, double dt, const State& x0)
    : t0_(t0), dt_(dt), x0_(x0) {
  if (!(dt > 0.0)) throw std::invalid_argument("buffer: dt must be > 0");
}

void MeasurementBuffer::AddControl(Control u) {
  if (!std::isfinite(u)) throw std::invalid_argument("buffer: non-finite control");
  controls_.push_back(u);
}

void MeasurementBuffer::AddSample(const Measurement& m) {
  if (!std::isfinite(m.t) || !std::isfinite(m.force)) {
    throw std::invalid_argument("buffer: non-finite measurement");
  }
  if (!samples_.empty() && m.t < samples_.back().t) {
    throw std::invalid_argument("buffer: timestamps must be non-decreasing");
  }
  samples_.push_back(m);
}

MeasurementBuffer MeasurementBuffer::Truncated(double t_end) const {
  MeasurementBuffer out(t0_, dt_, x0_);
  for (const Measurement& m : samples_) {
    if (m.t > t_end + kTimeEps) break;
    out.samples_.push_back(m);
  }
  std::size_t needed = 0;
  if (!out.samples_.empty()) {
    needed = KnotIndex(out.samples_.back().t, t0_, dt_) + 1;
  }
  out.controls_.assign(controls_.begin(),
                       controls_.begin() + std::min(needed, controls_.size()));
  return out;
}

void EstimatorConfig::Validate() const {
  if (!(rate > 0.0)) throw std::invalid_argument("estimator: rate must be > 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) {
    throw std::invalid_argument("estimator: need 0 < armijo_c < 1");
  }
  if (!(shrink > 0.0 && shrink < 1.0)) {
    throw std::invalid_argument("estimator: need 0 < shrink < 1");
  }
  if (!(step0 > 0.0)) throw std::invalid_argument("estimator: step0 must be > 0");
  if (max_backtracks < 0 || iterations_per_tick < 1) {
    throw std::invalid_argument(
        "estimator: need max_backtracks >= 0 and iterations_per_tick >= 1");
  }
  if (!(theta_min > 0.0) || !(theta_max > theta_min)) {
    throw std::invalid_argument("estimator: need 0 < theta_min < theta_max");
  }
}

double EstimatorConfig::Clamp(double theta) const {
  return std::clamp(theta, theta_min, theta_max);
}

double Prediction::ForceAt(double t) const {
  return Interpolate(force, traj.t0, traj.dt, t);
}

double Prediction::GammaAt(double t) const {
  return Interpolate(gamma, traj.t0, traj.dt, t);
}

Prediction Observe(const Model& model, std::span<const double> controls,
                   double theta, const State& x0, double dt, double t0) {
  Prediction pred;
  pred.traj = SimulateExtended(model, MakeExtended(x0), controls, dt, theta, t0);
  const std::size_t n = pred.traj.states.size();
  pred.force.resize(n);
  pred.gamma.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    // The final knot reuses the last control; interior knots see their own.
    const double u = controls.empty()
                         ? 0.0
                         : controls[std::min(j, controls.size() - 1)];
    const ExtendedState& xs = pred.traj.states[j];
    pred.force[j] = model.Output(StateOf(xs), u, theta);
    pred.gamma[j] = GammaTheta(model, xs, u, theta);
  }
  return pred;
}

BetaEvaluation EvaluateBeta(const Model& model, double theta,
                            const MeasurementBuffer& buffer,
                            const NoiseModel& noise) {
  noise.Validate();
  if (buffer.empty()) throw std::invalid_argument("beta: empty buffer");
  const Prediction pred = Observe(model, buffer.controls(), theta, buffer.x0(),
                                  buffer.dt(), buffer.t0());
  BetaEvaluation out;
  for (const Measurement& m : buffer.samples()) {
    const double r = m.force - pred.ForceAt(m.t);
    const double g = pred.GammaAt(m.t);
    out.beta += 0.5 * r * r / noise.sigma2;
    out.gradient -= r * g / noise.sigma2;
    out.curvature += g * g / noise.sigma2;
  }
  return out;
}

double Beta(const Model& model, double theta, const MeasurementBuffer& buffer,
            const NoiseModel& noise) {
  return EvaluateBeta(model, theta, buffer, noise).beta;
}

double BetaGradient(const Model& model, double theta,
                    const MeasurementBuffer& buffer, const NoiseModel& noise) {
  return EvaluateBeta(model, theta, buffer, noise).gradient;
}

EstimateRecord EstimatorStep(const Model& model, double theta_hat,
                             const MeasurementBuffer& buffer,
                             const NoiseModel& noise,
                             const EstimatorConfig& cfg, double t) {
  cfg.Validate();
  EstimateRecord record;
  record.t = t;
  record.theta_hat = theta_hat;
  double theta = theta_hat;
  for (int iter = 0; iter < cfg.iterations_per_tick; ++iter) {
    const BetaEvaluation eval = EvaluateBeta(model, theta, buffer, noise);
    record.beta_value = eval.beta;
    if (eval.gradient == 0.0 || !std::isfinite(eval.gradient)) break;
    double step = cfg.step0;
    if (eval.curvature > 0.0) step = std::min(step, 1.0 / eval.curvature);
    bool moved = false;
    for (int b = 0; b <= cfg.max_backtracks; ++b, step *= cfg.shrink) {
      const double candidate = cfg.Clamp(theta - step * eval.gradient);
      if (candidate == theta) break;
      double beta_new;
      try {
        beta_new = Beta(model, candidate, buffer, noise);
      } catch (const DivergenceError&) {
        continue;
      }
      if (beta_new <=
          eval.beta - cfg.armijo_c * step * eval.gradient * eval.gradient) {
        theta = candidate;
        record.beta_value = beta_new;
        record.accepted = true;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  record.theta_hat = theta;
  return record;
}

EstimateProvider::EstimateProvider(const EstimateSnapshot& initial)
    : snapshot_(initial) {}

void EstimateProvider::Publish(const EstimateSnapshot& snapshot) {
  std::lock_guard<std::mutex> lock(mutex_);
  snapshot_ = snapshot;
}

EstimateSnapshot EstimateProvider::Read() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return snapshot_;
}

OnlineEstimator::OnlineEstimator(const Model& model, const NoiseModel& noise,
                                 const EstimatorConfig& cfg, double theta0)
    : model_(model), noise_(noise), cfg_(cfg), theta_(cfg.Clamp(theta0)) {
  cfg_.Validate();
  noise_.Validate();
}

bool OnlineEstimator::Due(double t) const {
  return t >= cfg_.start_time + ticks_ / cfg_.rate - kTimeEps;
}

EstimateRecord OnlineEstimator::Tick(double t, const MeasurementBuffer& buffer,
                                     EstimateProvider* provider) {
  ++ticks_;
  EstimateRecord record;
  record.t = t;
  record.theta_hat = theta_;
  if (!buffer.empty()) {
    record = EstimatorStep(model_, theta_, buffer, noise_, cfg_, t);
    theta_ = record.theta_hat;
  }
  history_.push_back(record);
  if (provider != nullptr && !buffer.empty()) {
    const Prediction pred = Observe(model_, buffer.controls(), theta_,
                                    buffer.x0(), buffer.dt(), buffer.t0());
    const double t_last = buffer.samples().back().t;
    EstimateSnapshot snap;
    snap.t = t_last;
    snap.theta = theta_;
    snap.state =
        pred.traj.states[KnotIndex(t_last, buffer.t0(), buffer.dt())];
    provider->Publish(snap);
  }
  return record;
}

std::vector<EstimateRecord> RunEstimator(const Model& model,
                                         const MeasurementBuffer& buffer,
                                         double theta0,
                                         const NoiseModel& noise,
                                         const EstimatorConfig& cfg,
                                         double duration,
                                         EstimateProvider* provider) {
  if (!(duration > 0.0)) {
    throw std::invalid_argument("run estimator: duration must be > 0");
  }
  OnlineEstimator estimator(model, noise, cfg, theta0);
  for (int k = 0;; ++k) {
    const double t = cfg.start_time + k / cfg.rate;
    if (t > duration + kTimeEps) break;
    estimator.Tick(t, buffer.Truncated(t), provider);
  }
  return estimator.history();
}

}  // namespace activeid
