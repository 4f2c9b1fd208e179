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

#include "gintrip/prototype.hpp"

#include <cmath>

#include "gintrip/error.hpp"
#include "gintrip/rng.hpp"

namespace gintrip::proto {

using ad::Tape;

std::vector<int> prototype_classes(std::size_t n_classes, std::size_t per_class) {
  std::vector<int> classes;
  classes.reserve(n_classes * per_class);
  for (std::size_t k = 0; k < n_classes; ++k) {
    for (std::size_t j = 0; j < per_class; ++j) classes.push_back(static_cast<int>(k));
  }
  return classes;
}

PrototypeBank init_prototypes(std::size_t n_classes, std::size_t per_class, std::size_t dim, std::uint64_t seed) {
  require(n_classes >= 1 && per_class >= 1 && dim >= 1, "prototype bank dimensions must be >= 1");
  PrototypeBank bank;
  bank.n_classes = n_classes;
  bank.per_class = per_class;
  bank.class_of = prototype_classes(n_classes, per_class);
  const auto m = static_cast<Eigen::Index>(n_classes * per_class);
  bank.vectors.resize(m, static_cast<Eigen::Index>(dim));
  Rng rng = make_stream(seed, {0x9a0});
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < bank.vectors.cols(); ++k) bank.vectors(i, k) = uniform(rng) * scale;
  }
  return bank;
}

double similarity_from_distance(double squared_distance) {
  return std::log((squared_distance + 1.0) / (squared_distance + kSimilarityEps));
}

Var similarity(const Var& z_sub, const Var& bank) {
  if (z_sub.rows() != 1 || z_sub.cols() != bank.cols()) {
    fail(ErrorKind::kShapeMismatch, "similarity: z_sub must be 1 x d matching the prototype dimension");
  }
  const Matrix diff = (-bank.value()).rowwise() + z_sub.value().row(0);  // M x d, z - v_m
  const ad::Vector dist2 = diff.rowwise().squaredNorm();
  Matrix gamma(1, dist2.size());
  for (Eigen::Index m = 0; m < dist2.size(); ++m) gamma(0, m) = similarity_from_distance(dist2(m));
  return z_sub.tape()->record(std::move(gamma), {z_sub, bank}, [z_sub, bank, diff, dist2](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    // d gamma / d dist2 = 1/(dist2 + 1) - 1/(dist2 + eps)
    ad::Vector coeff(dist2.size());
    for (Eigen::Index m = 0; m < dist2.size(); ++m) {
      coeff(m) = g(0, m) * (1.0 / (dist2(m) + 1.0) - 1.0 / (dist2(m) + kSimilarityEps));
    }
    const Matrix g_diff = 2.0 * (coeff.asDiagonal() * diff);
    if (t.needs_grad(z_sub)) t.accumulate(z_sub, g_diff.colwise().sum());
    if (t.needs_grad(bank)) t.accumulate(bank, -g_diff);
  });
}

Var alignment_loss(const Var& z_sub, const Var& bank, const Var& weight, const Var& bias) {
  const Var estimate = ad::add_row(ad::matmul(z_sub, weight), bias);
  const Var target = ad::flatten_rows(bank);
  return ad::mean(ad::square(ad::sub(estimate, target)));
}

}  // namespace gintrip::proto
