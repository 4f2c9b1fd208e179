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

#ifndef GINTRIP_MODEL_HPP
#define GINTRIP_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>

#include "gintrip/autodiff.hpp"
#include "gintrip/encoder.hpp"
#include "gintrip/extractor.hpp"
#include "gintrip/graph_data.hpp"
#include "gintrip/parameters.hpp"

namespace gintrip {

struct ModelConfig {
  std::size_t n_nodes = 0;
  std::size_t n_features = 1;
  std::size_t window = 12;
  std::size_t horizon = 12;
  nn::EncoderConfig encoder;
  std::size_t n_classes = 2;
  std::size_t prototypes_per_class = 2;

  std::size_t n_prototypes() const { return n_classes * prototypes_per_class; }
  void validate() const;
};

/// The five objective terms of one forward pass, in objective order.
struct LossTerms {
  ad::Var reg, sub, var, con, cls;
};

struct ForwardOptions {
  extract::GateMode gate_mode = extract::GateMode::kHard;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  /// Second stream coordinate (e.g. the epoch); the window start is the third.
  std::uint64_t stream = 0;
  /// When set, noise statistics are taken from here instead of the batch.
  const extract::NoiseStats* frozen_stats = nullptr;
  bool training = false;
};

struct ForwardPass {
  ad::Var h, p, lambda, z, z_sub, gamma, y_hat, logits;
  LossTerms losses;
  extract::NoiseStats stats;
  extract::ExtractionFlags flags;
};

struct Prediction {
  ad::Matrix y_hat;
  ad::Vector p;
  ad::Vector lambda;
  ad::RowVector z_sub;
  ad::RowVector gamma;
  ad::Matrix logits;
};

/// Encoder, subgraph extractor, prototype bank and the two heads bound to
/// one static graph. Inputs are expected z-scored with the stats the
/// model was built with; forecasts come out in signal units.
class Model {
 public:
  Model(ModelConfig config, data::StaticGraph graph, const data::NormalizationStats& stats, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const data::StaticGraph& graph() const { return graph_; }
  const ad::Matrix& normalized_adjacency() const { return a_hat_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }

  data::NormalizationStats normalization() const;
  double target_mean() const;
  double target_std() const;

  bool trained() const { return trained_; }
  void set_trained(bool trained) { trained_ = trained; }

  ForwardPass forward(ad::Tape& tape, nn::TapeParams& params, const data::WindowSample& sample,
                      const ForwardOptions& options) const;

  /// Value-only forward pass.
  Prediction predict(const data::WindowSample& sample, const ForwardOptions& options) const;

 private:
  ModelConfig config_;
  data::StaticGraph graph_;
  ad::Matrix a_hat_;
  nn::ParameterStore params_;
  bool trained_ = false;
};

/// Eval-time options: hard gates, fixed stream.
ForwardOptions eval_options(std::uint64_t seed);

}  // namespace gintrip

#endif  // GINTRIP_MODEL_HPP
