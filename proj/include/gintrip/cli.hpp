// Copyright 2026 The GINTRIP Authors
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

#ifndef GINTRIP_CLI_HPP
#define GINTRIP_CLI_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gintrip/model.hpp"
#include "gintrip/training.hpp"

namespace gintrip::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

/// Everything a run needs; parsed from a JSON document, then overridden
/// by command-line flags.
struct RunConfig {
  std::filesystem::path signal;
  std::filesystem::path graph;
  std::optional<std::filesystem::path> meta;
  std::size_t window = 12;
  std::size_t horizon = 12;
  std::size_t stride = 1;
  std::array<double, 3> split = {0.6, 0.2, 0.2};
  double quantile = 0.1;
  nn::EncoderConfig encoder;
  std::size_t classes = 2;
  std::size_t prototypes_per_class = 2;
  train::TrainConfig training;
  std::filesystem::path out = "out";

  /// Rejects unknown keys; relative paths resolve against `base_dir`.
  static RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  nlohmann::json to_json() const;
  void validate() const;
};

/// Parses argv and dispatches to train / eval / explain / synth / report.
/// Returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace gintrip::cli

#endif  // GINTRIP_CLI_HPP
