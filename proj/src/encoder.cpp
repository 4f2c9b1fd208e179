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

#include "gintrip/encoder.hpp"

#include <cmath>

#include "gintrip/error.hpp"

namespace gintrip::nn {

using ad::Tape;
using ad::Var;

std::size_t EncoderConfig::receptive_field() const {
  std::size_t rf = 1;
  for (std::size_t b = 0; b < n_blocks; ++b) rf += (temporal_kernel - 1) * dilations[b];
  return rf;
}

void EncoderConfig::validate(std::size_t window) const {
  require(hidden_dim >= 1, "encoder hidden_dim must be >= 1");
  require(temporal_kernel >= 1, "encoder temporal_kernel must be >= 1");
  require(dilations.size() == n_blocks, "encoder needs one dilation per block");
  for (auto d : dilations) require(d >= 1, "encoder dilations must be >= 1");
  require(dropout >= 0.0 && dropout < 1.0, "encoder dropout must lie in [0, 1)");
  if (receptive_field() > window) {
    fail(ErrorKind::kInvalidArgument, "encoder receptive field " + std::to_string(receptive_field()) +
                                          " exceeds window " + std::to_string(window));
  }
}

Matrix normalized_adjacency(const Matrix& adjacency) {
  Matrix a = adjacency + Matrix::Identity(adjacency.rows(), adjacency.cols());
  const Eigen::VectorXd inv_sqrt = a.rowwise().sum().array().rsqrt();
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

void init_encoder(ParameterStore& store, const EncoderConfig& config, std::size_t n_features, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(config.hidden_dim);
  store.add("encoder.input.weight", glorot_uniform(static_cast<Eigen::Index>(n_features), d, rng));
  store.add("encoder.input.bias", Matrix::Zero(1, d));
  for (std::size_t b = 0; b < config.n_blocks; ++b) {
    const std::string prefix = "encoder.block" + std::to_string(b);
    for (std::size_t j = 0; j < config.temporal_kernel; ++j) {
      store.add(prefix + ".tap" + std::to_string(j), glorot_uniform(d, d, rng));
    }
    store.add(prefix + ".bias", Matrix::Zero(1, d));
  }
  store.add("encoder.output.weight", glorot_uniform(d, d, rng));
  store.add("encoder.output.bias", Matrix::Zero(1, d));
}

Var graph_mix(const Var& hidden, const Matrix& a_hat) {
  const Eigen::Index n = a_hat.rows();
  if (hidden.rows() % n != 0) fail(ErrorKind::kShapeMismatch, "graph_mix: rows not a multiple of N");
  const Eigen::Index steps = hidden.rows() / n;
  Matrix out(hidden.rows(), hidden.cols());
  for (Eigen::Index t = 0; t < steps; ++t) out.middleRows(t * n, n).noalias() = a_hat * hidden.value().middleRows(t * n, n);
  return hidden.tape()->record(std::move(out), {hidden}, [hidden, a_hat, n, steps](Tape& tape, int self) {
    const Matrix& g = tape.grad(self);
    Matrix gin(g.rows(), g.cols());
    for (Eigen::Index t = 0; t < steps; ++t) gin.middleRows(t * n, n).noalias() = a_hat.transpose() * g.middleRows(t * n, n);
    tape.accumulate(hidden, gin);
  });
}

namespace {

// Mean of the time blocks of a time-major tensor.
Var mean_over_steps(const Var& hidden, Eigen::Index n) {
  const Eigen::Index steps = hidden.rows() / n;
  Matrix out = Matrix::Zero(n, hidden.cols());
  for (Eigen::Index t = 0; t < steps; ++t) out += hidden.value().middleRows(t * n, n);
  out /= static_cast<double>(steps);
  return hidden.tape()->record(std::move(out), {hidden}, [hidden, n, steps](Tape& tape, int self) {
    const Matrix g = tape.grad(self) / static_cast<double>(steps);
    tape.accumulate(hidden, g.replicate(steps, 1));
  });
}

Var linear(const Var& x, const Var& w, const Var& b) { return ad::add_row(ad::matmul(x, w), b); }

Var dropout(const Var& x, double rate, Rng& rng) {
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    for (Eigen::Index j = 0; j < mask.cols(); ++j) mask(i, j) = keep(rng) ? 1.0 / (1.0 - rate) : 0.0;
  }
  return ad::cwise_mul(x, x.tape()->constant(std::move(mask)));
}

}  // namespace

Var encoder_block(const Var& hidden, const Matrix& a_hat, const BlockParams& params, std::size_t dilation) {
  const Eigen::Index n = a_hat.rows();
  const Eigen::Index steps = hidden.rows() / n;
  const auto kernel = static_cast<Eigen::Index>(params.taps.size());
  const Eigen::Index shrink = (kernel - 1) * static_cast<Eigen::Index>(dilation);
  const Eigen::Index out_steps = steps - shrink;
  if (out_steps < 1) {
    fail(ErrorKind::kInvalidArgument, "encoder block needs at least " + std::to_string(shrink + 1) +
                                          " steps, got " + std::to_string(steps));
  }
  const Var mixed = graph_mix(hidden, a_hat);
  // Output step t sees mixed steps t, t + dilation, ..., t + shrink.
  Var conv;
  for (Eigen::Index j = 0; j < kernel; ++j) {
    const Var term = ad::matmul(ad::rows(mixed, j * static_cast<Eigen::Index>(dilation) * n, out_steps * n),
                                params.taps[static_cast<std::size_t>(j)]);
    conv = conv.valid() ? ad::add(conv, term) : term;
  }
  const Var activated = ad::relu(ad::add_row(conv, params.bias));
  return ad::add(activated, ad::rows(hidden, shrink * n, out_steps * n));
}

Var encode_steps(const Var& x, const Matrix& a_hat, TapeParams& params, const EncoderConfig& config,
                 Rng* dropout_rng) {
  Var h = linear(x, params["encoder.input.weight"], params["encoder.input.bias"]);
  for (std::size_t b = 0; b < config.n_blocks; ++b) {
    const std::string prefix = "encoder.block" + std::to_string(b);
    BlockParams bp;
    for (std::size_t j = 0; j < config.temporal_kernel; ++j) bp.taps.push_back(params[prefix + ".tap" + std::to_string(j)]);
    bp.bias = params[prefix + ".bias"];
    h = encoder_block(h, a_hat, bp, config.dilations[b]);
    if (dropout_rng != nullptr && config.dropout > 0.0) h = dropout(h, config.dropout, *dropout_rng);
    if (!h.value().allFinite()) {
      fail(ErrorKind::kNumeric, "non-finite activation in encoder block " + std::to_string(b));
    }
  }
  return h;
}

Var encode(const Var& x, const Matrix& a_hat, TapeParams& params, const EncoderConfig& config, Rng* dropout_rng) {
  const Var steps = encode_steps(x, a_hat, params, config, dropout_rng);
  const Var pooled = mean_over_steps(steps, a_hat.rows());
  Var h = linear(pooled, params["encoder.output.weight"], params["encoder.output.bias"]);
  if (!h.value().allFinite()) fail(ErrorKind::kNumeric, "non-finite activation in encoder output layer");
  return h;
}

Matrix encode(const Matrix& x, const Matrix& adjacency, const ParameterStore& store, const EncoderConfig& config) {
  Tape tape;
  TapeParams params(tape, store, false);
  return encode(tape.constant(x), normalized_adjacency(adjacency), params, config).value();
}

}  // namespace gintrip::nn
