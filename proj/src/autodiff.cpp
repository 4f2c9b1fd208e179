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

#include "gintrip/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gintrip/error.hpp"

namespace gintrip::ad {

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, false});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, true});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  bool any = false;
  for (const Var& v : inputs) any = any || nodes_[v.id()].needs_grad;
  nodes_.push_back(Node{std::move(value), Matrix(), any ? std::move(backward) : nullptr, any});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Matrix& Tape::grad(int id) {
  ensure_grad(nodes_[id]);
  return nodes_[id].grad;
}

void Tape::backward(const Var& root) {
  require(root.tape() == this, "backward: root belongs to another tape");
  Node& r = nodes_[root.id()];
  if (r.value.size() != 1) fail(ErrorKind::kShapeMismatch, "backward: root must be a 1x1 scalar");
  if (!r.needs_grad) return;
  ensure_grad(r);
  r.grad(0, 0) += 1.0;
  for (int id = root.id(); id >= 0; --id) {
    Node& node = nodes_[id];
    if (node.backward && node.grad.size() != 0) node.backward(*this, id);
  }
}

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::kShapeMismatch,
         std::string(op) + ": shape " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
             " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    fail(ErrorKind::kShapeMismatch, "matmul: inner dimensions " + std::to_string(a.cols()) +
                                        " vs " + std::to_string(b.rows()));
  }
  Tape& t = *a.tape();
  return t.record(a.value() * b.value(), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.needs_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  return a.tape()->record(a.value() + b.value(), {a, b}, [a, b](Tape& t, int self) {
    t.accumulate(a, t.grad(self));
    t.accumulate(b, t.grad(self));
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  return a.tape()->record(a.value() - b.value(), {a, b}, [a, b](Tape& t, int self) {
    t.accumulate(a, t.grad(self));
    t.accumulate(b, -t.grad(self));
  });
}

Var cwise_mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "cwise_mul");
  return a.tape()->record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(a)) t.accumulate(a, g.cwiseProduct(b.value()));
    if (t.needs_grad(b)) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var scale(const Var& a, double s) {
  return a.tape()->record(a.value() * s, {a},
                          [a, s](Tape& t, int self) { t.accumulate(a, t.grad(self) * s); });
}

Var add_scalar(const Var& a, double s) {
  Matrix v = a.value().array() + s;
  return a.tape()->record(std::move(v), {a},
                          [a](Tape& t, int self) { t.accumulate(a, t.grad(self)); });
}

Var add_row(const Var& a, const Var& b) {
  if (b.rows() != 1 || b.cols() != a.cols()) fail(ErrorKind::kShapeMismatch, "add_row: bias shape");
  Matrix v = a.value().rowwise() + b.value().row(0);
  return a.tape()->record(std::move(v), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.accumulate(a, g);
    if (t.needs_grad(b)) t.accumulate(b, g.colwise().sum());
  });
}

Var scale_rows(const Var& a, const Var& v) {
  if (v.cols() != 1 || v.rows() != a.rows()) fail(ErrorKind::kShapeMismatch, "scale_rows: shape");
  Matrix out = v.value().col(0).asDiagonal() * a.value();
  return a.tape()->record(std::move(out), {a, v}, [a, v](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(a)) t.accumulate(a, v.value().col(0).asDiagonal() * g);
    if (t.needs_grad(v)) t.accumulate(v, g.cwiseProduct(a.value()).rowwise().sum());
  });
}

Var relu(const Var& a) {
  return a.tape()->record(a.value().cwiseMax(0.0), {a}, [a](Tape& t, int self) {
    Matrix mask = (a.value().array() > 0.0).cast<double>();
    t.accumulate(a, t.grad(self).cwiseProduct(mask));
  });
}

Var sigmoid(const Var& a) {
  Matrix s = a.value().unaryExpr([](double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  });
  return a.tape()->record(std::move(s), {a}, [a](Tape& t, int self) {
    const Matrix& s = t.value(self);
    t.accumulate(a, (t.grad(self).array() * s.array() * (1.0 - s.array())).matrix());
  });
}

Var log(const Var& a) {
  return a.tape()->record(a.value().array().log().matrix(), {a}, [a](Tape& t, int self) {
    t.accumulate(a, (t.grad(self).array() / a.value().array()).matrix());
  });
}

Var square(const Var& a) {
  return a.tape()->record(a.value().array().square().matrix(), {a}, [a](Tape& t, int self) {
    t.accumulate(a, (2.0 * t.grad(self).array() * a.value().array()).matrix());
  });
}

Var clamp(const Var& a, double lo, double hi) {
  return a.tape()->record(a.value().cwiseMax(lo).cwiseMin(hi), {a}, [a, lo, hi](Tape& t, int self) {
    Matrix mask = ((a.value().array() >= lo) && (a.value().array() <= hi)).cast<double>();
    t.accumulate(a, t.grad(self).cwiseProduct(mask));
  });
}

Var sum(const Var& a) {
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  return a.tape()->record(std::move(v), {a}, [a](Tape& t, int self) {
    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), t.grad(self)(0, 0)));
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  Matrix v(1, 1);
  v(0, 0) = a.value().sum() / n;
  return a.tape()->record(std::move(v), {a}, [a, n](Tape& t, int self) {
    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), t.grad(self)(0, 0) / n));
  });
}

Var rows(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    fail(ErrorKind::kShapeMismatch, "rows: slice [" + std::to_string(start) + ", " +
                                        std::to_string(start + count) + ") out of " +
                                        std::to_string(a.rows()));
  }
  Matrix v = a.value().middleRows(start, count);
  return a.tape()->record(std::move(v), {a}, [a, start, count](Tape& t, int self) {
    Matrix g = Matrix::Zero(a.rows(), a.cols());
    g.middleRows(start, count) = t.grad(self);
    t.accumulate(a, g);
  });
}

Var concat_cols(const Var& a, const Var& b) {
  if (a.rows() != b.rows()) fail(ErrorKind::kShapeMismatch, "concat_cols: row counts differ");
  Matrix v(a.rows(), a.cols() + b.cols());
  v << a.value(), b.value();
  return a.tape()->record(std::move(v), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.accumulate(a, g.leftCols(a.cols()));
    t.accumulate(b, g.rightCols(b.cols()));
  });
}

Var broadcast_rows(const Var& a, Eigen::Index n) {
  if (a.rows() != 1) fail(ErrorKind::kShapeMismatch, "broadcast_rows: input must be a row");
  Matrix v = a.value().replicate(n, 1);
  return a.tape()->record(std::move(v), {a}, [a](Tape& t, int self) {
    t.accumulate(a, t.grad(self).colwise().sum());
  });
}

Var flatten_rows(const Var& a) {
  const Eigen::Index r = a.rows(), c = a.cols();
  Matrix v(1, r * c);
  for (Eigen::Index i = 0; i < r; ++i) v.block(0, i * c, 1, c) = a.value().row(i);
  return a.tape()->record(std::move(v), {a}, [a, r, c](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix out(r, c);
    for (Eigen::Index i = 0; i < r; ++i) out.row(i) = g.block(0, i * c, 1, c);
    t.accumulate(a, out);
  });
}

Var transpose(const Var& a) {
  return a.tape()->record(a.value().transpose(), {a}, [a](Tape& t, int self) {
    t.accumulate(a, t.grad(self).transpose());
  });
}

Var mse(const Var& prediction, const Matrix& target) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols()) {
    fail(ErrorKind::kShapeMismatch, "mse: prediction and target shapes differ");
  }
  const double n = static_cast<double>(target.size());
  Matrix diff = prediction.value() - target;
  Matrix v(1, 1);
  v(0, 0) = diff.squaredNorm() / n;
  return prediction.tape()->record(std::move(v), {prediction},
                                   [prediction, diff = std::move(diff), n](Tape& t, int self) {
                                     t.accumulate(prediction, (2.0 * t.grad(self)(0, 0) / n) * diff);
                                   });
}

Var softmax_cross_entropy(const Var& logits, const Eigen::VectorXi& labels) {
  const Matrix& z = logits.value();
  if (labels.size() != z.rows()) fail(ErrorKind::kShapeMismatch, "softmax_cross_entropy: label count");
  Matrix probs(z.rows(), z.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const int y = labels(i);
    require(y >= 0 && y < z.cols(), "softmax_cross_entropy: label out of range");
    const double mx = z.row(i).maxCoeff();
    const double lse = mx + std::log((z.row(i).array() - mx).exp().sum());
    probs.row(i) = (z.row(i).array() - lse).exp();
    total += lse - z(i, y);
  }
  const double n = static_cast<double>(z.rows());
  Matrix v(1, 1);
  v(0, 0) = total / n;
  return logits.tape()->record(std::move(v), {logits},
                               [logits, probs = std::move(probs), labels, n](Tape& t, int self) {
                                 Matrix g = probs;
                                 for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, labels(i)) -= 1.0;
                                 t.accumulate(logits, (t.grad(self)(0, 0) / n) * g);
                               });
}

}  // namespace gintrip::ad
