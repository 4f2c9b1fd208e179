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

#ifndef GINTRIP_ENCODER_HPP
#define GINTRIP_ENCODER_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "gintrip/autodiff.hpp"
#include "gintrip/parameters.hpp"
#include "gintrip/rng.hpp"

namespace gintrip::nn {

/// Compact spatio-temporal encoder: input projection, then blocks of
/// graph mixing followed by a causal dilated temporal convolution, then a
/// mean over the remaining steps and a final linear map.
struct EncoderConfig {
  std::size_t hidden_dim = 32;
  std::size_t n_blocks = 2;
  std::size_t temporal_kernel = 3;
  std::vector<std::size_t> dilations = {1, 2};
  double dropout = 0.0;

  /// Input steps that influence one output step of the block stack.
  std::size_t receptive_field() const;
  void validate(std::size_t window) const;
};

/// D^{-1/2} (A + I) D^{-1/2}.
Matrix normalized_adjacency(const Matrix& adjacency);

/// Registers `encoder.*` parameters.
void init_encoder(ParameterStore& store, const EncoderConfig& config, std::size_t n_features, Rng& rng);

/// Per-step graph mixing of a time-major hidden tensor ((tau*N) x d).
ad::Var graph_mix(const ad::Var& hidden, const Matrix& a_hat);

struct BlockParams {
  std::vector<ad::Var> taps;  // kernel matrices, d x d each
  ad::Var bias;               // 1 x d
};

/// One graph-mixing + dilated-convolution stage with a residual path.
/// Output length shrinks by (kernel - 1) * dilation steps.
ad::Var encoder_block(const ad::Var& hidden, const Matrix& a_hat, const BlockParams& params,
                      std::size_t dilation);

/// Runs the block stack and returns the time-major tensor before the
/// temporal collapse ((tau_out*N) x d).
ad::Var encode_steps(const ad::Var& x, const Matrix& a_hat, TapeParams& params,
                     const EncoderConfig& config, Rng* dropout_rng = nullptr);

/// x is (W*N) x D time-major; returns N x d_h node embeddings.
ad::Var encode(const ad::Var& x, const Matrix& a_hat, TapeParams& params, const EncoderConfig& config,
               Rng* dropout_rng = nullptr);

/// Value-only convenience wrapper.
Matrix encode(const Matrix& x, const Matrix& adjacency, const ParameterStore& store,
              const EncoderConfig& config);

}  // namespace gintrip::nn

#endif  // GINTRIP_ENCODER_HPP
