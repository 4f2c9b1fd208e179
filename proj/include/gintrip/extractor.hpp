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

#ifndef GINTRIP_EXTRACTOR_HPP
#define GINTRIP_EXTRACTOR_HPP

#include <cstddef>
#include <vector>

#include "gintrip/autodiff.hpp"
#include "gintrip/rng.hpp"

// Stochastic explanatory-subgraph extraction: node keep-probabilities,
// gates, noised embeddings, the compression bound, the connectivity
// penalty and mean pooling.

namespace gintrip::extract {

using ad::Matrix;
using ad::RowVector;
using ad::Var;
using ad::Vector;

inline constexpr double kProbabilityClamp = 1e-6;
inline constexpr double kSigmaFloor = 1e-6;
inline constexpr double kCompressionFloor = 1e-6;
inline constexpr double kPoolFloor = 1e-6;
inline constexpr double kConnectivityRowFloor = 1e-9;

enum class GateMode { kHard, kSoft };

/// Per-dimension statistics of the embedding rows used to draw the noise;
/// they carry no gradient.
struct NoiseStats {
  RowVector mu;
  RowVector sigma;
};

/// Flags raised while extracting; counters are cumulative.
struct ExtractionFlags {
  std::size_t compression_clamps = 0;
  std::size_t connectivity_zero_rows = 0;
  std::size_t pool_fallbacks = 0;
};

struct SubgraphEmbedding {
  RowVector z_sub;
  std::vector<std::size_t> selected_nodes;
};

/// p = clamp(sigmoid(H w + b)); H is N x d, w is d x 1, b is 1 x 1.
Var node_probabilities(const Var& h, const Var& weight, const Var& bias);

/// Hard: Bernoulli draws with a straight-through gradient to p.
/// Soft: binary-concrete relaxation at the given temperature.
Var sample_gates(const Var& p, GateMode mode, double temperature, Rng& rng);

/// Soft gates with explicit uniform noise u (N x 1), for tests and limits.
Var concrete_gates(const Var& p, const Matrix& u, double temperature);

NoiseStats noise_stats(const Matrix& h);

/// z_i = lambda_i h_i + (1 - lambda_i) eps_i with eps_i ~ N(mu, sigma^2).
Var noised_embeddings(const Var& h, const Var& lambda, const NoiseStats& stats, Rng& rng);

/// -1/2 log S + S / (2N) + M^2 / (2N) with S = sum (1 - lambda_i)^2 floored
/// at 1e-6 and M the mean over dimensions of sum lambda_i (h_i - mu) / sigma.
Var compression_loss(const Var& lambda, const Var& h, const NoiseStats& stats, ExtractionFlags* flags = nullptr);

/// || rownorm(P^T A P) - I_2 ||_F with P rows (p_i, 1 - p_i).
Var connectivity_loss(const Var& p, const Matrix& adjacency, ExtractionFlags* flags = nullptr);

/// Lambda-weighted mean of the rows of Z (plain mean when sum lambda is ~0).
Var pool_subgraph(const Var& z, const Var& lambda, ExtractionFlags* flags = nullptr);

/// Node indices sorted by descending p, ties by ascending index.
std::vector<std::size_t> rank_nodes(const Vector& p);

/// Indices of the k largest p (ties to the lower index), returned in rank order.
std::vector<std::size_t> top_k(const Vector& p, std::size_t k);

}  // namespace gintrip::extract

#endif  // GINTRIP_EXTRACTOR_HPP
