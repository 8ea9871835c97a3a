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

#ifndef ACTIVEID_LOGS_H_
#define ACTIVEID_LOGS_H_

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace activeid {

// One CSV row. Empty optionals are written as empty fields.
struct LogRow {
  double t = 0.0;
  double xb = 0.0;
  double vb = 0.0;
  double phi = 0.0;
  double phidot = 0.0;
  std::optional<double> u;
  std::optional<double> force_meas;
  std::optional<double> force_pred;
  std::optional<double> theta_hat;

  bool operator==(const LogRow&) const = default;
};

struct RunLog {
  std::vector<LogRow> rows;
};

inline constexpr std::array<const char*, 9> kCsvColumns = {
    "t", "xB", "vB", "phi", "phidot", "u", "force_meas", "force_pred",
    "theta_hat"};

// Throws std::invalid_argument unless t is strictly increasing.
void ValidateLog(const RunLog& log);

// %.17g, so parsing the text back reproduces every double exactly.
void WriteCsv(const RunLog& log, std::ostream& out);
RunLog ReadCsv(std::istream& in);
// File variants throw std::runtime_error naming the path on I/O failure.
void WriteCsvFile(const RunLog& log, const std::filesystem::path& path);
RunLog ReadCsvFile(const std::filesystem::path& path);

struct TrialSummary {
  double theta0 = 0.0;
  bool use_estimation = false;
  double theta_final = 0.0;
  bool success = false;
  std::array<double, 4> terminal_mass{};  // x, z, vx, vz
  int iters_trajopt = 0;
  double cost_final = 0.0;
};

// {"trial": {theta0, use_estimation, theta_final, success, terminal_mass,
//            iters_trajopt, cost_final}}
nlohmann::json TrialJson(const TrialSummary& s);
// {"trials": [<inner trial objects>], "mean_theta": m, "std_theta": s}
nlohmann::json SweepJson(const std::vector<TrialSummary>& trials,
                         double mean_theta, double std_theta);

// Schema checks. Return an empty string when valid, else the first problem.
std::string ValidateTrialJson(const nlohmann::json& j);
std::string ValidateSweepJson(const nlohmann::json& j);

TrialSummary ParseTrialJson(const nlohmann::json& j);

void WriteJsonFile(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json ReadJsonFile(const std::filesystem::path& path);

}  // namespace activeid

#endif  // ACTIVEID_LOGS_H_
