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

#include "gintrip/extractor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "gintrip/error.hpp"

namespace gintrip::extract {

using ad::Tape;

Var node_probabilities(const Var& h, const Var& weight, const Var& bias) {
  if (!h.value().allFinite()) fail(ErrorKind::kNumeric, "node_probabilities: non-finite embeddings");
  const Var logits = ad::add_row(ad::matmul(h, weight), bias);
  return ad::clamp(ad::sigmoid(logits), kProbabilityClamp, 1.0 - kProbabilityClamp);
}

Var concrete_gates(const Var& p, const Matrix& u, double temperature) {
  require(temperature > 0.0, "gate temperature must be positive");
  Tape& t = *p.tape();
  const Matrix logistic = u.array().log() - (1.0 - u.array()).log();
  const Var logit = ad::sub(ad::log(p), ad::log(ad::add_scalar(ad::scale(p, -1.0), 1.0)));
  return ad::sigmoid(ad::scale(ad::add(logit, t.constant(logistic)), 1.0 / temperature));
}

Var sample_gates(const Var& p, GateMode mode, double temperature, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix u(p.rows(), 1);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    // Open interval keeps log u and log(1 - u) finite.
    u(i, 0) = std::clamp(uniform(rng), 1e-12, 1.0 - 1e-12);
  }
  if (mode == GateMode::kSoft) return concrete_gates(p, u, temperature);
  Matrix draws = (u.array() < p.value().array()).cast<double>();
  return p.tape()->record(std::move(draws), {p}, [p](Tape& t, int self) { t.accumulate(p, t.grad(self)); });
}

NoiseStats noise_stats(const Matrix& h) {
  if (h.rows() < 2) {
    fail(ErrorKind::kInvalidArgument, "noise statistics need at least 2 nodes; got N=" + std::to_string(h.rows()));
  }
  NoiseStats s;
  s.mu = h.colwise().mean();
  s.sigma = ((h.rowwise() - s.mu).array().square().colwise().mean()).sqrt().max(kSigmaFloor).matrix();
  return s;
}

Var noised_embeddings(const Var& h, const Var& lambda, const NoiseStats& stats, Rng& rng) {
  if (h.rows() < 2) {
    fail(ErrorKind::kInvalidArgument, "noised_embeddings needs N >= 2 to estimate noise statistics");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix eps(h.rows(), h.cols());
  for (Eigen::Index i = 0; i < eps.rows(); ++i) {
    for (Eigen::Index k = 0; k < eps.cols(); ++k) eps(i, k) = stats.mu(k) + stats.sigma(k) * normal(rng);
  }
  Tape& t = *h.tape();
  const Var keep = ad::scale_rows(h, lambda);
  const Var drop = ad::scale_rows(t.constant(std::move(eps)), ad::add_scalar(ad::scale(lambda, -1.0), 1.0));
  return ad::add(keep, drop);
}

Var compression_loss(const Var& lambda, const Var& h, const NoiseStats& stats, ExtractionFlags* flags) {
  const Matrix& lam = lambda.value();
  const Matrix& hv = h.value();
  const auto n = static_cast<double>(hv.rows());
  const auto d = static_cast<double>(hv.cols());
  if (lam.rows() != hv.rows() || lam.cols() != 1) fail(ErrorKind::kShapeMismatch, "compression_loss: lambda shape");

  const double s_raw = (1.0 - lam.array()).square().sum();
  const bool clamped = s_raw < kCompressionFloor;
  const double s = clamped ? kCompressionFloor : s_raw;
  if (clamped && flags != nullptr) ++flags->compression_clamps;

  // Standardized rows, (N x d).
  const Matrix standardized = ((hv.rowwise() - stats.mu).array().rowwise() / stats.sigma.array()).matrix();
  const Vector row_means = standardized.rowwise().mean();
  const double m = lam.col(0).dot(row_means);

  Matrix value(1, 1);
  value(0, 0) = -0.5 * std::log(s) + s / (2.0 * n) + m * m / (2.0 * n);
  return lambda.tape()->record(
      std::move(value), {lambda, h},
      [lambda, h, stats, row_means, s, m, n, d, clamped](Tape& t, int self) {
        const double g = t.grad(self)(0, 0);
        const double dl_dm = m / n;
        if (t.needs_grad(lambda)) {
          Vector dl = dl_dm * row_means;
          if (!clamped) {
            const double dl_ds = -0.5 / s + 0.5 / n;
            dl += dl_ds * (-2.0 * (1.0 - lambda.value().col(0).array())).matrix();
          }
          t.accumulate(lambda, g * dl);
        }
        if (t.needs_grad(h)) {
          // d M / d h_ik = lambda_i / (d sigma_k)
          Matrix dh = lambda.value().col(0) * stats.sigma.cwiseInverse();
          t.accumulate(h, (g * dl_dm / d) * dh);
        }
      });
}

Var connectivity_loss(const Var& p, const Matrix& adjacency, ExtractionFlags* flags) {
  const Eigen::Index n = p.rows();
  if (adjacency.rows() != n || adjacency.cols() != n) fail(ErrorKind::kShapeMismatch, "connectivity_loss: adjacency shape");
  Matrix assign(n, 2);
  assign.col(0) = p.value().col(0);
  assign.col(1) = (1.0 - p.value().col(0).array()).matrix();
  const Matrix q = assign.transpose() * adjacency * assign;
  Eigen::Vector2d row_sum = q.rowwise().sum();
  std::array<bool, 2> normalized{};
  Matrix qn = q;
  for (int a = 0; a < 2; ++a) {
    normalized[a] = row_sum(a) >= kConnectivityRowFloor;
    if (normalized[a]) {
      qn.row(a) /= row_sum(a);
    } else if (flags != nullptr) {
      ++flags->connectivity_zero_rows;
    }
  }
  const Matrix diff = qn - Matrix::Identity(2, 2);
  const double loss = diff.norm();
  Matrix value(1, 1);
  value(0, 0) = loss;
  return p.tape()->record(
      std::move(value), {p},
      [p, adjacency, assign, q, row_sum, normalized, diff, loss](Tape& t, int self) {
        if (loss <= 0.0) return;
        const Matrix g_norm = diff * (t.grad(self)(0, 0) / loss);
        Matrix g_q(2, 2);
        for (int a = 0; a < 2; ++a) {
          if (normalized[a]) {
            const double r = row_sum(a);
            const double dot = g_norm.row(a).dot(q.row(a));
            for (int b = 0; b < 2; ++b) g_q(a, b) = g_norm(a, b) / r - dot / (r * r);
          } else {
            g_q.row(a) = g_norm.row(a);
          }
        }
        const Matrix g_assign = adjacency * assign * g_q.transpose() + adjacency.transpose() * assign * g_q;
        t.accumulate(p, (g_assign.col(0) - g_assign.col(1)).eval());
      });
}

Var pool_subgraph(const Var& z, const Var& lambda, ExtractionFlags* flags) {
  if (!z.value().allFinite()) fail(ErrorKind::kNumeric, "pool_subgraph: non-finite embeddings");
  if (lambda.rows() != z.rows() || lambda.cols() != 1) fail(ErrorKind::kShapeMismatch, "pool_subgraph: lambda shape");
  const double total = lambda.value().sum();
  if (!(total > kPoolFloor)) {
    if (flags != nullptr) ++flags->pool_fallbacks;
    return ad::scale(ad::matmul(z.tape()->constant(Matrix::Ones(1, z.rows())), z), 1.0 / static_cast<double>(z.rows()));
  }
  Matrix pooled = (lambda.value().transpose() * z.value()) / total;
  return z.tape()->record(std::move(pooled), {z, lambda}, [z, lambda, total](Tape& t, int self) {
    const Matrix& g = t.grad(self);  // 1 x d
    if (t.needs_grad(z)) t.accumulate(z, (lambda.value() * g) / total);
    if (t.needs_grad(lambda)) {
      const double pooled_dot = t.value(self).row(0).dot(g.row(0));
      Matrix dl = (z.value() * g.transpose()).array() - pooled_dot;
      t.accumulate(lambda, dl / total);
    }
  });
}

std::vector<std::size_t> rank_nodes(const Vector& p) {
  std::vector<std::size_t> order(static_cast<std::size_t>(p.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&p](std::size_t a, std::size_t b) {
    return p(static_cast<Eigen::Index>(a)) > p(static_cast<Eigen::Index>(b));
  });
  return order;
}

std::vector<std::size_t> top_k(const Vector& p, std::size_t k) {
  if (k < 1 || k > static_cast<std::size_t>(p.size())) {
    fail(ErrorKind::kInvalidArgument, "top_k: k=" + std::to_string(k) + " outside [1, " + std::to_string(p.size()) + "]");
  }
  auto order = rank_nodes(p);
  order.resize(k);
  return order;
}

}  // namespace gintrip::extract
