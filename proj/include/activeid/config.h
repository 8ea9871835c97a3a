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

#ifndef ACTIVEID_CONFIG_H_
#define ACTIVEID_CONFIG_H_

#include <filesystem>
#include <string>
#include <vector>

#include "activeid/harness.h"

namespace activeid {

// Flat "key = value" text, one entry per line, '#' starts a comment.
// Keys are "<section>.<field>", e.g. "sac.horizon" or "task.r_tau".
// Vectors are whitespace- or comma-separated; a 4x4 matrix is given as 16
// row-major entries or as 4 diagonal entries. Unknown keys and malformed
// values throw std::invalid_argument naming the line.
void ApplyConfigText(const std::string& text, TrialConfig* cfg);
TrialConfig LoadConfigFile(const std::filesystem::path& path);

// Every key with its current value, in the format ApplyConfigText reads.
std::string FormatConfig(const TrialConfig& cfg);
std::vector<std::string> ConfigKeys();

}  // namespace activeid

#endif  // ACTIVEID_CONFIG_H_
