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

#include "activeid/config.h"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace activeid {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> ParseNumbers(const std::string& value) {
  std::string text = value;
  for (char& c : text) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw std::invalid_argument("bad number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

double ParseScalar(const std::string& value) {
  const std::vector<double> v = ParseNumbers(value);
  if (v.size() != 1) throw std::invalid_argument("expected one number");
  return v[0];
}

long long ParseInteger(const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw std::invalid_argument("expected an integer");
  }
  return v;
}

bool ParseBool(const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("expected true or false");
}

Eigen::Vector4d ParseVector4(const std::string& value) {
  const std::vector<double> v = ParseNumbers(value);
  if (v.size() != 4) throw std::invalid_argument("expected 4 numbers");
  return Eigen::Vector4d(v[0], v[1], v[2], v[3]);
}

Mat4 ParseMatrix4(const std::string& value) {
  const std::vector<double> v = ParseNumbers(value);
  if (v.size() == 4) return Eigen::Vector4d(v[0], v[1], v[2], v[3]).asDiagonal();
  if (v.size() != 16) {
    throw std::invalid_argument("expected 4 diagonal or 16 row-major numbers");
  }
  Mat4 m;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) m(i, j) = v[4 * i + j];
  }
  return m;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Vec(const Eigen::Vector4d& v) {
  return Num(v(0)) + " " + Num(v(1)) + " " + Num(v(2)) + " " + Num(v(3));
}

std::string Mat(const Mat4& m) {
  std::string out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i || j) out += ' ';
      out += Num(m(i, j));
    }
  }
  return out;
}

struct Field {
  const char* key;
  std::function<void(TrialConfig&, const std::string&)> set;
  std::function<std::string(const TrialConfig&)> get;
};

#define ACTIVEID_DOUBLE(key, member)                                         \
  Field {                                                                    \
    key, [](TrialConfig& c, const std::string& v) {                          \
      c.member = ParseScalar(v);                                             \
    },                                                                       \
        [](const TrialConfig& c) { return Num(c.member); }                   \
  }
#define ACTIVEID_INT(key, member)                                            \
  Field {                                                                    \
    key, [](TrialConfig& c, const std::string& v) {                          \
      c.member = static_cast<int>(ParseInteger(v));                          \
    },                                                                       \
        [](const TrialConfig& c) { return std::to_string(c.member); }        \
  }
#define ACTIVEID_VEC(key, member)                                            \
  Field {                                                                    \
    key, [](TrialConfig& c, const std::string& v) {                          \
      c.member = ParseVector4(v);                                            \
    },                                                                       \
        [](const TrialConfig& c) { return Vec(c.member); }                   \
  }
#define ACTIVEID_MAT(key, member)                                            \
  Field {                                                                    \
    key, [](TrialConfig& c, const std::string& v) {                          \
      c.member = ParseMatrix4(v);                                            \
    },                                                                       \
        [](const TrialConfig& c) { return Mat(c.member); }                   \
  }

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      ACTIVEID_DOUBLE("trial.theta0", theta0),
      Field{"trial.use_estimation",
            [](TrialConfig& c, const std::string& v) {
              c.use_estimation = ParseBool(v);
            },
            [](const TrialConfig& c) -> std::string {
              return c.use_estimation ? "true" : "false";
            }},
      ACTIVEID_DOUBLE("trial.est_duration", est_duration),
      ACTIVEID_DOUBLE("trial.quiescent_lead", quiescent_lead),
      Field{"trial.seed",
            [](TrialConfig& c, const std::string& v) {
              const long long s = ParseInteger(v);
              if (s < 0) throw std::invalid_argument("seed must be >= 0");
              c.seed = static_cast<std::uint64_t>(s);
            },
            [](const TrialConfig& c) { return std::to_string(c.seed); }},
      ACTIVEID_DOUBLE("trial.dt", dt),

      ACTIVEID_DOUBLE("plant.ell", plant.ell),
      ACTIVEID_DOUBLE("plant.mass", plant.mass),
      ACTIVEID_DOUBLE("plant.gravity", plant.gravity),
      Field{"plant.force_model",
            [](TrialConfig& c, const std::string& v) {
              c.force_model = ParseForceModel(v);
            },
            [](const TrialConfig& c) { return ToString(c.force_model); }},
      ACTIVEID_DOUBLE("noise.sigma2", noise.sigma2),

      ACTIVEID_DOUBLE("sac.horizon", sac.horizon),
      ACTIVEID_DOUBLE("sac.loop_dt", sac.loop_dt),
      ACTIVEID_DOUBLE("sac.dt", sac.dt),
      ACTIVEID_DOUBLE("sac.r_sac", sac.r_sac),
      ACTIVEID_DOUBLE("sac.gamma_ad", sac.gamma_ad),
      ACTIVEID_DOUBLE("sac.u_max", sac.u_max),
      ACTIVEID_DOUBLE("sac.dt_init", sac.dt_init),
      ACTIVEID_DOUBLE("sac.dt_min", sac.dt_min),
      ACTIVEID_DOUBLE("sac.tau_window", sac.tau_window),
      ACTIVEID_DOUBLE("sac.eps_info", sac.eps_info),
      ACTIVEID_MAT("sac.q_tau", sac.tracking.q),
      ACTIVEID_VEC("sac.q_ref", sac.tracking.ref),
      ACTIVEID_DOUBLE("sac.bias_weight", sac.bias_weight),
      ACTIVEID_DOUBLE("sac.bias_offset", sac.bias_offset),
      ACTIVEID_DOUBLE("sac.bias_duration", sac.bias_duration),

      ACTIVEID_DOUBLE("estimator.rate", estimator.rate),
      ACTIVEID_DOUBLE("estimator.start_time", estimator.start_time),
      ACTIVEID_DOUBLE("estimator.armijo_c", estimator.armijo_c),
      ACTIVEID_DOUBLE("estimator.shrink", estimator.shrink),
      ACTIVEID_DOUBLE("estimator.step0", estimator.step0),
      ACTIVEID_INT("estimator.max_backtracks", estimator.max_backtracks),
      ACTIVEID_INT("estimator.iterations_per_tick",
                   estimator.iterations_per_tick),
      ACTIVEID_DOUBLE("estimator.theta_min", estimator.theta_min),
      ACTIVEID_DOUBLE("estimator.theta_max", estimator.theta_max),

      ACTIVEID_MAT("task.p_tau", task.p_tau),
      ACTIVEID_DOUBLE("task.r_tau", task.r_tau),
      ACTIVEID_VEC("task.x_desired", task.x_desired),
      ACTIVEID_VEC("task.x0", task.x0),
      ACTIVEID_DOUBLE("task.t_final", task.t_final),
      ACTIVEID_DOUBLE("task.dt", task.dt),
      ACTIVEID_DOUBLE("task.tol", task.tol),
      ACTIVEID_INT("task.max_iters", task.max_iters),
      ACTIVEID_DOUBLE("task.armijo_c", task.armijo_c),
      ACTIVEID_DOUBLE("task.shrink", task.shrink),
      ACTIVEID_INT("task.max_backtracks", task.max_backtracks),

      ACTIVEID_DOUBLE("success.x_target", success.x_target),
      ACTIVEID_DOUBLE("success.x_tol", success.x_tol),
      ACTIVEID_DOUBLE("success.z_rim", success.z_rim),
      ACTIVEID_DOUBLE("success.v_max", success.v_max),
  };
  return fields;
}

#undef ACTIVEID_DOUBLE
#undef ACTIVEID_INT
#undef ACTIVEID_VEC
#undef ACTIVEID_MAT

}  // namespace

void ApplyConfigText(const std::string& text, TrialConfig* cfg) {
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string content = Trim(raw.substr(0, raw.find('#')));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    const std::string where = "config line " + std::to_string(line);
    if (eq == std::string::npos) {
      throw std::invalid_argument(where + ": expected key = value");
    }
    const std::string key = Trim(content.substr(0, eq));
    const std::string value = Trim(content.substr(eq + 1));
    const Field* field = nullptr;
    for (const Field& f : Fields()) {
      if (key == f.key) field = &f;
    }
    if (field == nullptr) {
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
    try {
      field->set(*cfg, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + " (" + key + "): " + e.what());
    }
  }
}

TrialConfig LoadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  TrialConfig cfg;
  try {
    ApplyConfigText(text.str(), &cfg);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return cfg;
}

std::string FormatConfig(const TrialConfig& cfg) {
  std::string out;
  for (const Field& f : Fields()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += '\n';
  }
  return out;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const Field& f : Fields()) keys.emplace_back(f.key);
  return keys;
}

}  // namespace activeid
