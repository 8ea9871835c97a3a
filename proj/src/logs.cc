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

#include "activeid/logs.h"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace activeid {

namespace {

std::string Format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Format(const std::optional<double>& v) {
  return v ? Format(*v) : std::string();
}

double ParseDouble(const std::string& field, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != field.size() || field.empty()) {
    throw std::invalid_argument("csv line " + std::to_string(line) +
                                ": bad number '" + field + "'");
  }
  return v;
}

std::optional<double> ParseOptional(const std::string& field,
                                    std::size_t line) {
  if (field.empty()) return std::nullopt;
  return ParseDouble(field, line);
}

std::vector<std::string> Split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string Header() {
  std::string h;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    if (i) h += ',';
    h += kCsvColumns[i];
  }
  return h;
}

bool IsNumber(const nlohmann::json& j) { return j.is_number(); }

}  // namespace

void ValidateLog(const RunLog& log) {
  for (std::size_t i = 1; i < log.rows.size(); ++i) {
    if (!(log.rows[i].t > log.rows[i - 1].t)) {
      throw std::invalid_argument("log: t is not strictly increasing at row " +
                                  std::to_string(i));
    }
  }
}

void WriteCsv(const RunLog& log, std::ostream& out) {
  ValidateLog(log);
  out << Header() << '\n';
  for (const LogRow& r : log.rows) {
    out << Format(r.t) << ',' << Format(r.xb) << ',' << Format(r.vb) << ','
        << Format(r.phi) << ',' << Format(r.phidot) << ',' << Format(r.u)
        << ',' << Format(r.force_meas) << ',' << Format(r.force_pred) << ','
        << Format(r.theta_hat) << '\n';
  }
}

RunLog ReadCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != Header()) {
    throw std::invalid_argument("csv: missing or unexpected header");
  }
  RunLog log;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const std::vector<std::string> f = Split(line);
    if (f.size() != kCsvColumns.size()) {
      throw std::invalid_argument("csv line " + std::to_string(n) + ": expected " +
                                  std::to_string(kCsvColumns.size()) +
                                  " fields");
    }
    LogRow r;
    r.t = ParseDouble(f[0], n);
    r.xb = ParseDouble(f[1], n);
    r.vb = ParseDouble(f[2], n);
    r.phi = ParseDouble(f[3], n);
    r.phidot = ParseDouble(f[4], n);
    r.u = ParseOptional(f[5], n);
    r.force_meas = ParseOptional(f[6], n);
    r.force_pred = ParseOptional(f[7], n);
    r.theta_hat = ParseOptional(f[8], n);
    log.rows.push_back(r);
  }
  ValidateLog(log);
  return log;
}

void WriteCsvFile(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  WriteCsv(log, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

RunLog ReadCsvFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ReadCsv(in);
}

nlohmann::json TrialJson(const TrialSummary& s) {
  nlohmann::json inner = {
      {"theta0", s.theta0},
      {"use_estimation", s.use_estimation},
      {"theta_final", s.theta_final},
      {"success", s.success},
      {"terminal_mass", s.terminal_mass},
      {"iters_trajopt", s.iters_trajopt},
      {"cost_final", s.cost_final},
  };
  return {{"trial", inner}};
}

nlohmann::json SweepJson(const std::vector<TrialSummary>& trials,
                         double mean_theta, double std_theta) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TrialSummary& s : trials) arr.push_back(TrialJson(s)["trial"]);
  return {{"trials", arr}, {"mean_theta", mean_theta}, {"std_theta", std_theta}};
}

namespace {

std::string ValidateInner(const nlohmann::json& t) {
  if (!t.is_object()) return "trial must be an object";
  static const char* kKeys[] = {"theta0",        "use_estimation",
                                "theta_final",   "success",
                                "terminal_mass", "iters_trajopt",
                                "cost_final"};
  for (const char* k : kKeys) {
    if (!t.contains(k)) return std::string("missing key '") + k + "'";
  }
  if (t.size() != std::size(kKeys)) return "unexpected extra keys in trial";
  if (!IsNumber(t["theta0"])) return "theta0 must be a number";
  if (!t["use_estimation"].is_boolean()) return "use_estimation must be a bool";
  if (!IsNumber(t["theta_final"])) return "theta_final must be a number";
  if (!t["success"].is_boolean()) return "success must be a bool";
  const nlohmann::json& m = t["terminal_mass"];
  if (!m.is_array() || m.size() != 4) return "terminal_mass must have 4 entries";
  for (const auto& v : m) {
    if (!IsNumber(v)) return "terminal_mass entries must be numbers";
  }
  if (!t["iters_trajopt"].is_number_integer() ||
      t["iters_trajopt"].get<long long>() < 0) {
    return "iters_trajopt must be a non-negative integer";
  }
  if (!IsNumber(t["cost_final"])) return "cost_final must be a number";
  return "";
}

}  // namespace

std::string ValidateTrialJson(const nlohmann::json& j) {
  if (!j.is_object() || j.size() != 1 || !j.contains("trial")) {
    return "expected a single top-level 'trial' object";
  }
  return ValidateInner(j["trial"]);
}

std::string ValidateSweepJson(const nlohmann::json& j) {
  if (!j.is_object()) return "sweep summary must be an object";
  for (const char* k : {"trials", "mean_theta", "std_theta"}) {
    if (!j.contains(k)) return std::string("missing key '") + k + "'";
  }
  if (j.size() != 3) return "unexpected extra keys in sweep summary";
  if (!j["trials"].is_array()) return "trials must be an array";
  for (std::size_t i = 0; i < j["trials"].size(); ++i) {
    const std::string err = ValidateInner(j["trials"][i]);
    if (!err.empty()) return "trials[" + std::to_string(i) + "]: " + err;
  }
  if (!IsNumber(j["mean_theta"]) || !IsNumber(j["std_theta"])) {
    return "mean_theta and std_theta must be numbers";
  }
  return "";
}

TrialSummary ParseTrialJson(const nlohmann::json& j) {
  const std::string err = ValidateTrialJson(j);
  if (!err.empty()) throw std::invalid_argument("trial json: " + err);
  const nlohmann::json& t = j["trial"];
  TrialSummary s;
  s.theta0 = t["theta0"].get<double>();
  s.use_estimation = t["use_estimation"].get<bool>();
  s.theta_final = t["theta_final"].get<double>();
  s.success = t["success"].get<bool>();
  for (int i = 0; i < 4; ++i) s.terminal_mass[i] = t["terminal_mass"][i].get<double>();
  s.iters_trajopt = t["iters_trajopt"].get<int>();
  s.cost_final = t["cost_final"].get<double>();
  return s;
}

void WriteJsonFile(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace activeid
