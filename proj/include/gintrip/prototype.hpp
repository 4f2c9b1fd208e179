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

#ifndef GINTRIP_PROTOTYPE_HPP
#define GINTRIP_PROTOTYPE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gintrip/autodiff.hpp"

namespace gintrip::proto {

using ad::Matrix;
using ad::Var;

inline constexpr double kSimilarityEps = 1e-4;

/// M = K * J learnable prototype vectors; prototype m belongs to class
/// class_of[m], with J consecutive prototypes per class.
struct PrototypeBank {
  Matrix vectors;
  std::vector<int> class_of;
  std::size_t n_classes = 0;
  std::size_t per_class = 0;

  std::size_t size() const { return static_cast<std::size_t>(vectors.rows()); }
};

/// Entries uniform(-1, 1) / sqrt(d).
PrototypeBank init_prototypes(std::size_t n_classes, std::size_t per_class, std::size_t dim, std::uint64_t seed);

/// Class layout for a bank of the given shape.
std::vector<int> prototype_classes(std::size_t n_classes, std::size_t per_class);

/// gamma_m = log((d_m^2 + 1) / (d_m^2 + eps)), d_m = ||z_sub - v_m||.
/// z_sub is 1 x d, bank is M x d; returns 1 x M.
Var similarity(const Var& z_sub, const Var& bank);

/// Scalar form of the similarity for a squared distance.
double similarity_from_distance(double squared_distance);

/// MSE between the single-layer estimate z_sub W + b (1 x M*d) and the
/// row-major concatenation of all prototypes.
Var alignment_loss(const Var& z_sub, const Var& bank, const Var& weight, const Var& bias);

}  // namespace gintrip::proto

#endif  // GINTRIP_PROTOTYPE_HPP
