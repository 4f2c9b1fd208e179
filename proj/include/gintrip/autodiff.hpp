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

#ifndef GINTRIP_AUTODIFF_HPP
#define GINTRIP_AUTODIFF_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>

// A small tape-based reverse-mode differentiator over dense float64
// matrices. Every value is a 2-D matrix; row vectors and 1x1 scalars are
// just matrices of that shape.

namespace gintrip::ad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  /// Called during the reverse sweep with the id of the node being
  /// processed; must push that node's gradient into its inputs.
  using Backward = std::function<void(Tape&, int)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);

  /// Seeds d(root)/d(root) = 1 (root must be 1x1) and runs the reverse sweep.
  void backward(const Var& root);

  const Matrix& value(int id) const { return nodes_[id].value; }
  const Matrix& grad(int id);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  bool needs_grad(const Var& v) const { return nodes_[v.id()].needs_grad; }

  template <typename Derived>
  void accumulate(const Var& v, const Eigen::MatrixBase<Derived>& g) {
    Node& node = nodes_[v.id()];
    if (!node.needs_grad) return;
    ensure_grad(node);
    node.grad += g;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    bool needs_grad = false;
  };

  static void ensure_grad(Node& node) {
    if (node.grad.size() == 0) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  }

  std::deque<Node> nodes_;
};

// ---- elementary operations -------------------------------------------------

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var cwise_mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
/// a (r x c) + b (1 x c) broadcast over rows.
Var add_row(const Var& a, const Var& b);
/// Row i of a (r x c) multiplied by v(i) for v (r x 1).
Var scale_rows(const Var& a, const Var& v);
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var log(const Var& a);
Var square(const Var& a);
/// Elementwise clamp; gradient is zero where the clamp is active.
Var clamp(const Var& a, double lo, double hi);
Var sum(const Var& a);
Var mean(const Var& a);
Var rows(const Var& a, Eigen::Index start, Eigen::Index count);
Var concat_cols(const Var& a, const Var& b);
/// Repeats a 1 x c row n times.
Var broadcast_rows(const Var& a, Eigen::Index n);
/// Row-major flatten into a 1 x (r*c) row.
Var flatten_rows(const Var& a);
Var transpose(const Var& a);

/// Mean squared error against a constant target.
Var mse(const Var& prediction, const Matrix& target);

/// Mean over rows of row-wise softmax cross-entropy; labels index columns.
Var softmax_cross_entropy(const Var& logits, const Eigen::VectorXi& labels);

}  // namespace gintrip::ad

#endif  // GINTRIP_AUTODIFF_HPP
