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

#ifndef ACTIVEID_CHECKS_H_
#define ACTIVEID_CHECKS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "activeid/harness.h"

namespace activeid {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

bool AllPassed(const std::vector<CheckResult>& results);

// Finite-difference oracles and structural properties, each over randomized
// points drawn from `seed`:
//   model Jacobians and second-order terms, sensitivity psi, Gamma_theta,
//   SAC adjoint directional derivative, d beta / d theta, Fisher information
//   sign and additivity, projection idempotence, monotone descent of the
//   estimator and the task optimizer, determinism of a full trial.
std::vector<CheckResult> DerivativeOracleSuite(const TrialConfig& cfg,
                                               std::uint64_t seed);

// Fisher information of the zero-control rest trajectory is exactly zero.
CheckResult StationarityCheck(const TrialConfig& cfg);

// Plan at the true length succeeds on the plant, a plan 0.04 m short misses
// by more than the tolerance, and the optimizer meets its tolerance.
CheckResult PlanFidelityCheck(const TrialConfig& cfg);

// Time of the first estimator tick after which every estimate stays within
// `band` of `truth`; infinity when it never settles.
double SettleTime(const std::vector<EstimateRecord>& history, double truth,
                  double band);

// Final-estimate accuracy and spread over the with-estimation column, and
// settling by 4 s.
CheckResult EstimatorConvergenceCheck(const SweepResult& sweep,
                                      const TrialConfig& cfg);

// Success pattern of both sweep columns.
CheckResult SweepTableCheck(const SweepResult& sweep, const TrialConfig& cfg);

std::string FormatSweepTable(const SweepResult& sweep, double ell_true);

}  // namespace activeid

#endif  // ACTIVEID_CHECKS_H_
