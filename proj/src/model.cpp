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

#include "gintrip/model.hpp"

#include "gintrip/error.hpp"
#include "gintrip/heads.hpp"
#include "gintrip/prototype.hpp"

namespace gintrip {

using ad::Matrix;
using ad::Var;

namespace {

constexpr std::uint64_t kEvalStream = 0xe7a1;

}  // namespace

void ModelConfig::validate() const {
  require(n_nodes >= 2, "model needs at least 2 nodes");
  require(n_features >= 1, "model needs at least 1 feature");
  require(window >= 1 && horizon >= 1, "window and horizon must be >= 1");
  require(n_classes >= 2, "pseudo-classes K must be >= 2");
  require(prototypes_per_class >= 1, "prototypes per class J must be >= 1");
  encoder.validate(window);
}

Model::Model(ModelConfig config, data::StaticGraph graph, const data::NormalizationStats& stats, std::uint64_t seed)
    : config_(std::move(config)), graph_(std::move(graph)) {
  config_.validate();
  if (graph_.n_nodes != config_.n_nodes) {
    fail(ErrorKind::kShapeMismatch, "graph has N=" + std::to_string(graph_.n_nodes) + " but model expects N=" +
                                        std::to_string(config_.n_nodes));
  }
  if (static_cast<std::size_t>(stats.mean.size()) != config_.n_features) {
    fail(ErrorKind::kShapeMismatch, "normalization stats do not match the feature count");
  }
  a_hat_ = nn::normalized_adjacency(graph_.adjacency);

  const std::size_t d = config_.encoder.hidden_dim;
  const std::size_t m = config_.n_prototypes();
  const auto di = static_cast<Eigen::Index>(d), mi = static_cast<Eigen::Index>(m);
  Rng rng = make_stream(seed, {0x1a17});
  nn::init_encoder(params_, config_.encoder, config_.n_features, rng);
  params_.add("extractor.weight", nn::glorot_uniform(di, 1, rng));
  params_.add("extractor.bias", Matrix::Zero(1, 1));
  params_.add("prototypes", proto::init_prototypes(config_.n_classes, config_.prototypes_per_class, d, seed).vectors);
  params_.add("align.weight", nn::glorot_uniform(di, mi * di, rng));
  params_.add("align.bias", Matrix::Zero(1, mi * di));
  heads::init_mlp(params_, "reg", d + m, d, config_.horizon, rng);
  heads::init_mlp(params_, "cls", d + m, d, config_.n_classes, rng);
  params_.add("norm.mean", stats.mean.transpose(), false);
  params_.add("norm.std", stats.std.transpose(), false);
}

data::NormalizationStats Model::normalization() const {
  data::NormalizationStats s;
  s.mean = params_.get("norm.mean").value.row(0).transpose();
  s.std = params_.get("norm.std").value.row(0).transpose();
  s.zero_variance.assign(static_cast<std::size_t>(s.mean.size()), false);
  return s;
}

double Model::target_mean() const { return params_.get("norm.mean").value(0, 0); }
double Model::target_std() const { return params_.get("norm.std").value(0, 0); }

ForwardPass Model::forward(ad::Tape& tape, nn::TapeParams& params, const data::WindowSample& sample,
                           const ForwardOptions& options) const {
  const std::size_t n = config_.n_nodes;
  if (sample.n_nodes() != n || sample.window() != config_.window || sample.horizon() != config_.horizon ||
      static_cast<std::size_t>(sample.x.cols()) != config_.n_features) {
    fail(ErrorKind::kShapeMismatch, "sample shape does not match the model configuration");
  }
  Rng rng = make_stream(options.seed, {options.stream, static_cast<std::uint64_t>(sample.window_start)});

  ForwardPass f;
  const Var x = tape.constant(sample.x);
  f.h = nn::encode(x, a_hat_, params, config_.encoder, options.training ? &rng : nullptr);
  f.p = extract::node_probabilities(f.h, params["extractor.weight"], params["extractor.bias"]);
  f.lambda = extract::sample_gates(f.p, options.gate_mode, options.temperature, rng);
  f.stats = options.frozen_stats != nullptr ? *options.frozen_stats : extract::noise_stats(f.h.value());
  f.z = extract::noised_embeddings(f.h, f.lambda, f.stats, rng);
  f.z_sub = extract::pool_subgraph(f.z, f.lambda, &f.flags);

  const Var bank = params["prototypes"];
  f.gamma = proto::similarity(f.z_sub, bank);
  const Var features = heads::build_features(f.z, f.gamma);
  f.y_hat = heads::regression_head(features, heads::bind_mlp(params, "reg"), target_mean(), target_std());
  f.logits = heads::classification_head(features, heads::bind_mlp(params, "cls"));

  f.losses.reg = heads::regression_loss(f.y_hat, sample.y_reg);
  f.losses.sub = extract::compression_loss(f.lambda, f.h, f.stats, &f.flags);
  f.losses.var = proto::alignment_loss(f.z_sub, bank, params["align.weight"], params["align.bias"]);
  f.losses.con = extract::connectivity_loss(f.p, graph_.adjacency, &f.flags);
  f.losses.cls = heads::classification_loss(f.logits, sample.y_cls);
  return f;
}

Prediction Model::predict(const data::WindowSample& sample, const ForwardOptions& options) const {
  ad::Tape tape;
  nn::TapeParams params(tape, params_, false);
  const ForwardPass f = forward(tape, params, sample, options);
  return Prediction{f.y_hat.value(), f.p.value().col(0), f.lambda.value().col(0), f.z_sub.value().row(0),
                    f.gamma.value().row(0), f.logits.value()};
}

ForwardOptions eval_options(std::uint64_t seed) {
  ForwardOptions o;
  o.gate_mode = extract::GateMode::kHard;
  o.seed = seed;
  o.stream = kEvalStream;
  o.training = false;
  return o;
}

}  // namespace gintrip
