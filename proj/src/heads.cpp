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

#include "gintrip/heads.hpp"

#include "gintrip/error.hpp"

namespace gintrip::heads {

MlpParams bind_mlp(nn::TapeParams& params, const std::string& prefix) {
  return MlpParams{params[prefix + ".w1"], params[prefix + ".b1"], params[prefix + ".w2"], params[prefix + ".b2"]};
}

void init_mlp(nn::ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
              std::size_t out, Rng& rng) {
  const auto i = static_cast<Eigen::Index>(in), h = static_cast<Eigen::Index>(hidden),
             o = static_cast<Eigen::Index>(out);
  store.add(prefix + ".w1", nn::glorot_uniform(i, h, rng));
  store.add(prefix + ".b1", Matrix::Zero(1, h));
  store.add(prefix + ".w2", nn::glorot_uniform(h, o, rng));
  store.add(prefix + ".b2", Matrix::Zero(1, o));
}

Var build_features(const Var& z, const Var& gamma) {
  if (gamma.rows() != 1) fail(ErrorKind::kShapeMismatch, "build_features: gamma must be a single row");
  return ad::concat_cols(z, ad::broadcast_rows(gamma, z.rows()));
}

Var mlp(const Var& features, const MlpParams& p) {
  const Var hidden = ad::relu(ad::add_row(ad::matmul(features, p.w1), p.b1));
  return ad::add_row(ad::matmul(hidden, p.w2), p.b2);
}

Var regression_head(const Var& features, const MlpParams& params, double target_mean, double target_std) {
  return ad::add_scalar(ad::scale(mlp(features, params), target_std), target_mean);
}

Var classification_head(const Var& features, const MlpParams& params) { return mlp(features, params); }

Var regression_loss(const Var& y_hat, const Matrix& y_reg) { return ad::mse(y_hat, y_reg); }

Var classification_loss(const Var& logits, const Eigen::VectorXi& y_cls) {
  return ad::softmax_cross_entropy(logits, y_cls);
}

}  // namespace gintrip::heads
