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

#ifndef GINTRIP_PARAMETERS_HPP
#define GINTRIP_PARAMETERS_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "gintrip/autodiff.hpp"
#include "gintrip/rng.hpp"

namespace gintrip::nn {

using ad::Matrix;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;
};

/// Named tensors for every learnable (and a few frozen) quantities of a
/// model, kept in insertion order so checkpoints are byte-stable.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Matrix init, bool trainable = true);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }

  void zero_grad();
  std::size_t scalar_count() const;

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Binds store entries to leaf variables of one tape on first use, and
/// pushes the tape gradients back into the store afterwards.
class TapeParams {
 public:
  TapeParams(ad::Tape& tape, const ParameterStore& store, bool track_grad = true)
      : tape_(tape), store_(store), track_grad_(track_grad) {}

  ad::Var operator[](const std::string& name);
  /// store.grad += scale * d(root)/d(param) for every bound parameter.
  void accumulate_into(ParameterStore& store, double scale = 1.0) const;

 private:
  ad::Tape& tape_;
  const ParameterStore& store_;
  bool track_grad_;
  std::unordered_map<std::string, ad::Var> bound_;
};

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);

// Checkpoint layout: "GTCK1", u32 count, then per tensor u32 name length,
// name bytes, u32 rank, u32 dims[rank], row-major float32 payload. All
// integers little-endian.
void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store);
std::vector<std::pair<std::string, Matrix>> read_checkpoint(const std::filesystem::path& path);
/// Overwrites store values from a checkpoint; names and shapes must match.
void load_checkpoint(const std::filesystem::path& path, ParameterStore& store);

}  // namespace gintrip::nn

#endif  // GINTRIP_PARAMETERS_HPP
