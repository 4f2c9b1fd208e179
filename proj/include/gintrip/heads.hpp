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

#ifndef GINTRIP_HEADS_HPP
#define GINTRIP_HEADS_HPP

#include <cstddef>

#include "gintrip/autodiff.hpp"
#include "gintrip/parameters.hpp"

namespace gintrip::heads {

using ad::Matrix;
using ad::Var;

/// Two-layer perceptron weights: hidden = relu(x W1 + b1), out = hidden W2 + b2.
struct MlpParams {
  Var w1, b1, w2, b2;
};

MlpParams bind_mlp(nn::TapeParams& params, const std::string& prefix);
void init_mlp(nn::ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
              std::size_t out, Rng& rng);

/// Row i is (z_i, gamma); gamma (1 x M) is shared by every node.
Var build_features(const Var& z, const Var& gamma);

Var mlp(const Var& features, const MlpParams& params);

/// Per-node forecast of T' steps, mapped back to signal units through
/// out * target_std + target_mean.
Var regression_head(const Var& features, const MlpParams& params, double target_mean, double target_std);

/// Per-node class logits.
Var classification_head(const Var& features, const MlpParams& params);

/// Mean squared error over all N*T' entries.
Var regression_loss(const Var& y_hat, const Matrix& y_reg);

/// Mean per-node softmax cross-entropy, natural log.
Var classification_loss(const Var& logits, const Eigen::VectorXi& y_cls);

}  // namespace gintrip::heads

#endif  // GINTRIP_HEADS_HPP
