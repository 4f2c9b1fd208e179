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

#include "gintrip/autodiff.hpp"
#include "gintrip/error.hpp"
#include "support.hpp"

using namespace gintrip;
using ad::Matrix;
using ad::Var;
using testing::max_grad_error;
using testing::random_matrix;

namespace {

// Contracts an arbitrary-shaped output with fixed random weights.
Var probe(const Var& out, std::uint64_t seed = 99) {
  const Matrix w = random_matrix(out.rows(), out.cols(), seed);
  return ad::sum(ad::cwise_mul(out, out.tape()->constant(w)));
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("forward values of elementary ops") {
  ad::Tape t;
  Matrix a(2, 2);
  a << 1, -2, 3, 4;
  const Var x = t.constant(a);
  CHECK(ad::relu(x).value()(0, 1) == 0.0);
  CHECK(ad::sum(x).scalar() == doctest::Approx(6.0));
  CHECK(ad::mean(x).scalar() == doctest::Approx(1.5));
  CHECK(ad::transpose(x).value()(0, 1) == 3.0);
  CHECK(ad::sigmoid(t.constant(Matrix::Zero(1, 1))).scalar() == doctest::Approx(0.5));
  const Var flat = ad::flatten_rows(x);
  CHECK(flat.rows() == 1);
  CHECK(flat.value()(0, 1) == -2.0);
  CHECK(flat.value()(0, 2) == 3.0);
  CHECK(ad::clamp(x, 0.0, 3.5).value()(1, 1) == 3.5);
  CHECK(ad::broadcast_rows(ad::rows(x, 1, 1), 3).value().rows() == 3);
}

TEST_CASE("sigmoid is finite for large magnitudes") {
  ad::Tape t;
  Matrix a(1, 2);
  a << -800.0, 800.0;
  const Matrix s = ad::sigmoid(t.constant(a)).value();
  CHECK(s.allFinite());
  CHECK(s(0, 0) == doctest::Approx(0.0));
  CHECK(s(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("mse examples") {
  ad::Tape t;
  Matrix y = Matrix::Zero(1, 2), yh(1, 2);
  yh << 3, 4;
  CHECK(ad::mse(t.constant(yh), y).scalar() == doctest::Approx(12.5));
  Matrix o(1, 2), b(1, 2);
  o << 1, 0;
  b << 0, 1;
  CHECK(ad::mse(t.constant(o), b).scalar() == doctest::Approx(1.0));
}

TEST_CASE("softmax cross-entropy of uniform logits is ln 2") {
  ad::Tape t;
  Eigen::VectorXi labels(3);
  labels << 0, 1, 1;
  const double ce = ad::softmax_cross_entropy(t.constant(Matrix::Constant(3, 2, 0.7)), labels).scalar();
  CHECK(std::abs(ce - std::log(2.0)) < 1e-9);
}

TEST_CASE("softmax cross-entropy matches a brute-force oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix logits = random_matrix(5, 3, seed, 3.0);
    Eigen::VectorXi labels(5);
    for (int i = 0; i < 5; ++i) labels(i) = static_cast<int>((seed + static_cast<std::uint64_t>(i)) % 3);
    double expected = 0.0;
    for (int i = 0; i < 5; ++i) {
      double z = 0.0;
      for (int k = 0; k < 3; ++k) z += std::exp(logits(i, k));
      expected += -std::log(std::exp(logits(i, labels(i))) / z);
    }
    expected /= 5.0;
    ad::Tape t;
    CHECK(std::abs(ad::softmax_cross_entropy(t.constant(logits), labels).scalar() - expected) < 1e-9);
  }
}

TEST_CASE("gradients of every op match central differences") {
  const Matrix a = random_matrix(3, 4, 1);
  const Matrix b = random_matrix(3, 4, 2);
  const Matrix c = random_matrix(4, 2, 3);
  const Matrix row = random_matrix(1, 4, 4);
  const Matrix col = random_matrix(3, 1, 5);
  const Matrix positive = (random_matrix(3, 4, 6).array().abs() + 0.5).matrix();
  auto constant = [](const Var& x, const Matrix& m) { return x.tape()->constant(m); };

  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::matmul(x, constant(x, c))); }) < 1e-6);
  CHECK(max_grad_error(c, [&](const Var& x) { return probe(ad::matmul(constant(x, a), x)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::add(x, constant(x, b))); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::sub(constant(x, b), x)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::cwise_mul(x, x)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::scale(x, -2.5)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::add_scalar(x, 3.0)); }) < 1e-6);
  CHECK(max_grad_error(row, [&](const Var& x) { return probe(ad::add_row(constant(x, a), x)); }) < 1e-6);
  CHECK(max_grad_error(col, [&](const Var& x) { return probe(ad::scale_rows(constant(x, a), x)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::scale_rows(x, constant(x, col))); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::relu(x)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::sigmoid(x)); }) < 1e-6);
  CHECK(max_grad_error(positive, [&](const Var& x) { return probe(ad::log(x)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::square(x)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::clamp(x, -0.5, 0.5)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return ad::mean(ad::square(x)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::rows(x, 1, 2)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::concat_cols(x, constant(x, b))); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::concat_cols(constant(x, b), x)); }) < 1e-6);
  CHECK(max_grad_error(row, [&](const Var& x) { return probe(ad::broadcast_rows(x, 5)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::flatten_rows(x)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return probe(ad::transpose(x)); }) < 1e-6);
  CHECK(max_grad_error(a, [&](const Var& x) { return ad::mse(x, b); }) < 1e-6);
  Eigen::VectorXi labels(3);
  labels << 1, 0, 3;
  CHECK(max_grad_error(a, [&](const Var& x) { return ad::softmax_cross_entropy(x, labels); }) < 1e-6);
}

TEST_CASE("gradients accumulate over shared subexpressions") {
  ad::Tape t;
  Matrix v(1, 1);
  v << 3.0;
  const Var x = t.variable(v);
  const Var y = ad::add(ad::cwise_mul(x, x), ad::scale(x, 2.0));
  t.backward(y);
  CHECK(x.grad()(0, 0) == doctest::Approx(8.0));
}

TEST_CASE("constants receive no gradient and shape errors are typed") {
  ad::Tape t;
  const Var c = t.constant(Matrix::Ones(2, 2));
  const Var x = t.variable(Matrix::Ones(2, 2));
  t.backward(ad::sum(ad::cwise_mul(c, x)));
  CHECK(!t.needs_grad(c));
  CHECK(x.grad()(1, 1) == doctest::Approx(1.0));
  try {
    ad::add(x, t.constant(Matrix::Ones(3, 2)));
    FAIL("expected a shape mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kShapeMismatch);
  }
  CHECK_THROWS_AS(t.backward(x), Error);
}

}  // TEST_SUITE
