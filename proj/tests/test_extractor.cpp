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

#include <doctest.h>

#include <cmath>

#include "gintrip/error.hpp"
#include "gintrip/extractor.hpp"
#include "support.hpp"

using namespace gintrip;
using namespace gintrip::extract;
using testing::max_grad_error;
using testing::random_matrix;

namespace {

Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

Matrix complete_graph(Eigen::Index n) {
  Matrix a = Matrix::Ones(n, n);
  a.diagonal().setZero();
  return a;
}

}  // namespace

TEST_SUITE("extractor") {

TEST_CASE("node probabilities: zero layer, saturation, permutation") {
  ad::Tape t;
  const Matrix h = random_matrix(5, 3, 1);
  const Var zero_p = node_probabilities(t.constant(h), t.constant(Matrix::Zero(3, 1)), t.constant(Matrix::Zero(1, 1)));
  CHECK(zero_p.value().isApprox(Matrix::Constant(5, 1, 0.5)));
  const Var hi = node_probabilities(t.constant(h), t.constant(Matrix::Zero(3, 1)), t.constant(Matrix::Constant(1, 1, 50.0)));
  CHECK(hi.value().maxCoeff() == doctest::Approx(1.0 - 1e-6).epsilon(1e-12));
  const Var lo = node_probabilities(t.constant(h), t.constant(Matrix::Zero(3, 1)), t.constant(Matrix::Constant(1, 1, -50.0)));
  CHECK(lo.value().minCoeff() == doctest::Approx(1e-6).epsilon(1e-12));

  const Matrix w = random_matrix(3, 1, 2);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
  perm.indices() << 3, 0, 4, 1, 2;
  const Matrix p = node_probabilities(t.constant(h), t.constant(w), t.constant(Matrix::Zero(1, 1))).value();
  const Matrix pp = node_probabilities(t.constant(perm * h), t.constant(w), t.constant(Matrix::Zero(1, 1))).value();
  CHECK(pp.isApprox(perm * p));
  CHECK_THROWS_AS(node_probabilities(t.constant(Matrix::Constant(2, 3, NAN)), t.constant(w), t.constant(Matrix::Zero(1, 1))), Error);
}

TEST_CASE("hard gates follow the Bernoulli mean") {
  ad::Tape t;
  const Var p = t.constant(column({1.0 - 1e-6, 0.3}));
  Rng rng = make_stream(5, {});
  double ones0 = 0.0, ones1 = 0.0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const Matrix lam = sample_gates(p, GateMode::kHard, 1.0, rng).value();
    CHECK_FALSE((lam.array() * (1.0 - lam.array())).any());
    ones0 += lam(0, 0);
    ones1 += lam(1, 0);
  }
  CHECK(std::abs(ones0 / draws - (1.0 - 1e-6)) < 0.01);
  CHECK(std::abs(ones1 / draws - 0.3) < 0.01);
}

TEST_CASE("gates are deterministic given the stream") {
  ad::Tape t;
  const Var p = t.constant(column({0.2, 0.5, 0.9}));
  for (GateMode mode : {GateMode::kHard, GateMode::kSoft}) {
    Rng a = make_stream(9, {3, 4}), b = make_stream(9, {3, 4});
    CHECK(sample_gates(p, mode, 0.7, a).value() == sample_gates(p, mode, 0.7, b).value());
  }
}

TEST_CASE("soft gates sharpen toward p > 0.5 as the temperature vanishes") {
  ad::Tape t;
  const Var p = t.constant(column({0.2, 0.49, 0.51, 0.9}));
  const Matrix u = Matrix::Constant(4, 1, 0.5);
  const Matrix lam = concrete_gates(p, u, 1e-4).value();
  CHECK(lam(0, 0) < 1e-6);
  CHECK(lam(1, 0) < 1e-6);
  CHECK(lam(2, 0) > 1.0 - 1e-6);
  CHECK(lam(3, 0) > 1.0 - 1e-6);
  Rng rng = make_stream(1, {});
  const Matrix soft = sample_gates(p, GateMode::kSoft, 0.5, rng).value();
  CHECK((soft.array() > 0.0).all());
  CHECK((soft.array() < 1.0).all());
  CHECK_THROWS_AS(concrete_gates(p, u, 0.0), Error);
}

TEST_CASE("hard gates pass the gradient straight through") {
  ad::Tape t;
  const Var p = t.variable(column({0.3, 0.8}));
  Rng rng = make_stream(2, {});
  const Var lam = sample_gates(p, GateMode::kHard, 1.0, rng);
  t.backward(ad::sum(ad::scale(lam, 3.0)));
  CHECK(p.grad().isApprox(Matrix::Constant(2, 1, 3.0)));
}

TEST_CASE("noise statistics and noised embeddings") {
  const Matrix h = random_matrix(6, 3, 4);
  const NoiseStats s = noise_stats(h);
  CHECK(s.mu.isApprox(h.colwise().mean()));
  for (Eigen::Index k = 0; k < 3; ++k) {
    const double var = (h.col(k).array() - s.mu(k)).square().mean();
    CHECK(s.sigma(k) == doctest::Approx(std::sqrt(var)));
  }
  CHECK_THROWS_AS(noise_stats(Matrix::Ones(1, 3)), Error);

  ad::Tape t;
  Rng rng = make_stream(6, {});
  const Var kept = noised_embeddings(t.constant(h), t.constant(Matrix::Ones(6, 1)), s, rng);
  CHECK(kept.value().isApprox(h));

  const Matrix same = Matrix::Constant(3, 2, 1.5);
  const NoiseStats flat = noise_stats(same);
  CHECK(flat.sigma.minCoeff() == doctest::Approx(1e-6));
  const Var half = noised_embeddings(t.constant(same), t.constant(Matrix::Constant(3, 1, 0.5)), flat, rng);
  CHECK((half.value() - same).cwiseAbs().maxCoeff() < 1e-5);
  CHECK_THROWS_AS(noised_embeddings(t.constant(Matrix::Ones(1, 2)), t.constant(Matrix::Ones(1, 1)), flat, rng), Error);
}

TEST_CASE("dropped nodes are drawn around the embedding mean") {
  const Matrix h = random_matrix(4, 2, 8, 2.0);
  const NoiseStats s = noise_stats(h);
  Rng rng = make_stream(7, {});
  RowVector total = RowVector::Zero(2);
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) {
    ad::Tape t;
    total += noised_embeddings(t.constant(h), t.constant(Matrix::Zero(4, 1)), s, rng).value().row(0);
  }
  total /= draws;
  for (Eigen::Index k = 0; k < 2; ++k) CHECK(std::abs(total(k) - s.mu(k)) < 3.0 * s.sigma(k) / 100.0);
}

TEST_CASE("raising the gates moves every row toward its embedding") {
  const Matrix h = random_matrix(5, 3, 10);
  const NoiseStats s = noise_stats(h);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Matrix prev_dist;
    for (double level : {0.0, 0.3, 0.6, 0.9, 1.0}) {
      ad::Tape t;
      Rng rng = make_stream(seed, {});
      const Matrix z = noised_embeddings(t.constant(h), t.constant(Matrix::Constant(5, 1, level)), s, rng).value();
      const Matrix dist = (z - h).rowwise().norm();
      if (prev_dist.size() > 0) CHECK(((dist.array() <= prev_dist.array() + 1e-12)).all());
      prev_dist = dist;
    }
  }
}

TEST_CASE("compression loss hand cases") {
  ad::Tape t;
  const Matrix h = random_matrix(4, 3, 11);
  const Var zero_gates = t.constant(Matrix::Zero(4, 1));
  CHECK(compression_loss(zero_gates, t.constant(h), noise_stats(h)).scalar() == doctest::Approx(-0.193147).epsilon(1e-6));

  ExtractionFlags flags;
  const Matrix centred = h.rowwise() - h.colwise().mean();
  const double all_on = compression_loss(t.constant(Matrix::Ones(4, 1)), t.constant(centred), noise_stats(centred), &flags).scalar();
  CHECK(flags.compression_clamps == 1);
  CHECK(all_on == doctest::Approx(-0.5 * std::log(1e-6) + 1e-6 / 8.0));

  const Matrix equal = Matrix::Constant(2, 3, 0.7);
  const double v = compression_loss(t.constant(column({1.0, 0.0})), t.constant(equal), noise_stats(equal)).scalar();
  CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("compression loss gradients match central differences") {
  const Matrix h0 = random_matrix(6, 8, 12);
  const Matrix lam0 = (random_matrix(6, 1, 13).array().abs().min(0.9) + 0.05).matrix();
  const NoiseStats s = noise_stats(h0);
  CHECK(max_grad_error(lam0, [&](const Var& lam) {
          return compression_loss(lam, lam.tape()->constant(h0), s);
        }) < 1e-4);
  CHECK(max_grad_error(h0, [&](const Var& h) {
          return compression_loss(h.tape()->constant(lam0), h, s);
        }) < 1e-4);
}

TEST_CASE("connectivity loss hand cases") {
  ad::Tape t;
  Matrix two_edges = Matrix::Zero(4, 4);
  two_edges(0, 1) = two_edges(1, 0) = two_edges(2, 3) = two_edges(3, 2) = 1.0;
  CHECK(connectivity_loss(t.constant(column({1, 1, 0, 0})), two_edges).scalar() <= 1e-6);
  CHECK(connectivity_loss(t.constant(column({0.5, 0.5, 0.5, 0.5})), complete_graph(4)).scalar() ==
        doctest::Approx(1.0).epsilon(1e-9));
  ExtractionFlags flags;
  CHECK(connectivity_loss(t.constant(column({0.3, 0.6, 0.9})), Matrix::Zero(3, 3), &flags).scalar() ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(flags.connectivity_zero_rows == 2);
  CHECK_THROWS_AS(connectivity_loss(t.constant(column({0.5, 0.5})), Matrix::Zero(3, 3)), Error);
}

TEST_CASE("connectivity loss is zero on component indicators and positive for uniform p") {
  // Two components: a triangle and a path.
  Matrix a = Matrix::Zero(6, 6);
  auto edge = [&](int u, int v) { a(u, v) = a(v, u) = 1.0; };
  edge(0, 1);
  edge(1, 2);
  edge(0, 2);
  edge(3, 4);
  edge(4, 5);
  ad::Tape t;
  CHECK(connectivity_loss(t.constant(column({1, 1, 1, 0, 0, 0})), a).scalar() <= 1e-6);
  CHECK(connectivity_loss(t.constant(column({0, 0, 0, 1, 1, 1})), a).scalar() <= 1e-6);
  edge(2, 3);
  CHECK(connectivity_loss(t.constant(Matrix::Constant(6, 1, 0.4)), a).scalar() > 0.1);
}

TEST_CASE("connectivity loss gradient matches central differences") {
  Matrix a = random_matrix(6, 6, 14).cwiseAbs();
  a = (a + a.transpose()).eval();
  a.diagonal().setZero();
  const Matrix p0 = (random_matrix(6, 1, 15).array().abs().min(0.9) + 0.05).matrix();
  CHECK(max_grad_error(p0, [&](const Var& p) { return connectivity_loss(p, a); }) < 1e-4);
}

TEST_CASE("pooling examples and fallback") {
  ad::Tape t;
  const Matrix z = random_matrix(4, 3, 16);
  CHECK(pool_subgraph(t.constant(z), t.constant(Matrix::Ones(4, 1))).value().isApprox(z.colwise().mean()));
  CHECK(pool_subgraph(t.constant(z), t.constant(column({0, 0, 1, 0}))).value().isApprox(z.row(2)));
  CHECK(pool_subgraph(t.constant(z), t.constant(column({0.5, 0.5, 0, 0}))).value().isApprox(
      (z.row(0) + z.row(1)) / 2.0));
  ExtractionFlags flags;
  CHECK(pool_subgraph(t.constant(z), t.constant(Matrix::Zero(4, 1)), &flags).value().isApprox(z.colwise().mean()));
  CHECK(flags.pool_fallbacks == 1);

  Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
  perm.indices() << 2, 3, 0, 1;
  const Matrix lam = column({0.1, 0.7, 0.3, 0.9});
  CHECK(pool_subgraph(t.constant(perm * z), t.constant(perm * lam)).value().isApprox(
      pool_subgraph(t.constant(z), t.constant(lam)).value()));
}

TEST_CASE("pooling and concrete gate gradients match central differences") {
  const Matrix z0 = random_matrix(5, 4, 17);
  const Matrix lam0 = (random_matrix(5, 1, 18).array().abs() + 0.1).matrix();
  CHECK(max_grad_error(z0, [&](const Var& z) { return ad::sum(ad::square(pool_subgraph(z, z.tape()->constant(lam0)))); }) < 1e-4);
  CHECK(max_grad_error(lam0, [&](const Var& l) { return ad::sum(ad::square(pool_subgraph(l.tape()->constant(z0), l))); }) < 1e-4);
  const Matrix p0 = (lam0.array().min(0.9)).matrix();
  const Matrix u = (random_matrix(5, 1, 19).array().abs().min(0.95) + 0.02).matrix();
  CHECK(max_grad_error(p0, [&](const Var& p) { return ad::sum(ad::square(concrete_gates(p, u, 0.5))); }) < 1e-4);
}

TEST_CASE("top-k ordering, ties and range") {
  ad::Vector p(3);
  p << 0.9, 0.1, 0.5;
  CHECK(top_k(p, 2) == std::vector<std::size_t>{0, 2});
  CHECK(top_k(ad::Vector::Constant(4, 0.3), 2) == std::vector<std::size_t>{0, 1});
  CHECK(top_k(p, 3).size() == 3);
  CHECK(rank_nodes(p) == std::vector<std::size_t>{0, 2, 1});
  CHECK_THROWS_AS(top_k(p, 0), Error);
  CHECK_THROWS_AS(top_k(p, 4), Error);
}

}  // TEST_SUITE
