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

#include "gintrip/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "gintrip/error.hpp"
#include "gintrip/extractor.hpp"

namespace gintrip::eval {

void MetricAccumulator::add(const Matrix& y_hat, const Matrix& y_true) {
  if (y_hat.rows() != y_true.rows() || y_hat.cols() != y_true.cols()) {
    fail(ErrorKind::kShapeMismatch, "forecast_metrics: prediction and target shapes differ");
  }
  for (Eigen::Index i = 0; i < y_true.size(); ++i) {
    const double diff = y_hat(i) - y_true(i);
    abs_sum_ += std::abs(diff);
    sq_sum_ += diff * diff;
    ++count_;
    if (std::abs(y_true(i)) > kMapeFloor) {
      pct_sum_ += std::abs(diff) / std::abs(y_true(i));
      ++pct_count_;
    }
  }
}

MetricReport MetricAccumulator::report() const {
  MetricReport r;
  r.n_evaluated = count_;
  r.n_mape = pct_count_;
  if (count_ > 0) {
    r.mae = abs_sum_ / static_cast<double>(count_);
    r.rmse = std::sqrt(sq_sum_ / static_cast<double>(count_));
  }
  if (pct_count_ > 0) r.mape_percent = 100.0 * pct_sum_ / static_cast<double>(pct_count_);
  return r;
}

MetricReport forecast_metrics(const Matrix& y_hat, const Matrix& y_true) {
  MetricAccumulator acc;
  acc.add(y_hat, y_true);
  return acc.report();
}

MetricReport evaluate_forecasts(const Model& model, const std::vector<data::WindowSample>& samples,
                                std::uint64_t seed) {
  MetricAccumulator acc;
  const ForwardOptions options = eval_options(seed);
  for (const auto& s : samples) acc.add(model.predict(s, options).y_hat, s.y_reg);
  return acc.report();
}

data::WindowSample mask_nodes(const data::WindowSample& sample, const std::vector<std::size_t>& nodes) {
  data::WindowSample masked = sample;
  const std::size_t n = sample.n_nodes();
  const std::size_t steps = sample.window();
  for (std::size_t node : nodes) {
    require(node < n, "mask_nodes: node index out of range");
    for (std::size_t t = 0; t < steps; ++t) masked.x.row(static_cast<Eigen::Index>(t * n + node)).setZero();
  }
  return masked;
}

namespace {

std::vector<std::size_t> complement(const std::vector<std::size_t>& nodes, std::size_t n) {
  std::vector<bool> in(n, false);
  for (auto i : nodes) in[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

double fidelity(const Model& model, const std::vector<data::WindowSample>& samples, const NodeSelector& select,
                FidelityVariant variant, std::uint64_t seed) {
  require(!samples.empty(), "fidelity needs at least one sample");
  const ForwardOptions options = eval_options(seed);
  double total = 0.0;
  for (const auto& s : samples) {
    const Prediction full = model.predict(s, options);
    const std::vector<std::size_t> explanation = select(s, full.p);
    const auto masked_nodes = variant == FidelityVariant::kPlus ? explanation : complement(explanation, s.n_nodes());
    const Prediction masked = model.predict(mask_nodes(s, masked_nodes), options);
    total += std::abs(full.y_hat.mean() - masked.y_hat.mean());
  }
  return 100.0 * total / static_cast<double>(samples.size());
}

double fidelity(const Model& model, const std::vector<data::WindowSample>& samples, std::size_t k,
                FidelityVariant variant, std::uint64_t seed) {
  require(k >= 1 && k <= model.config().n_nodes, "fidelity: k must lie in [1, N]");
  return fidelity(
      model, samples, [k](const data::WindowSample&, const Vector& p) { return extract::top_k(p, k); }, variant, seed);
}

FidelityCurve sparsity_sweep(const Model& model, const std::vector<data::WindowSample>& samples,
                             std::vector<std::size_t> ks, std::uint64_t seed) {
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  FidelityCurve curve;
  if (!model.trained()) curve.warnings.push_back("model is untrained; fidelity reflects initialization only");
  for (std::size_t k : ks) {
    curve.ks.push_back(k);
    curve.fidelity_plus.push_back(fidelity(model, samples, k, FidelityVariant::kPlus, seed));
    curve.fidelity_minus.push_back(fidelity(model, samples, k, FidelityVariant::kMinus, seed));
  }
  return curve;
}

void write_fidelity_csv(const std::filesystem::path& path, const FidelityCurve& curve, FidelityConvention convention) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write fidelity file: " + path.string());
  out << "k,fidelity_plus,fidelity_minus\n";
  out.precision(10);
  const bool swap = convention == FidelityConvention::kSwapped;
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    const double plus = swap ? curve.fidelity_minus[i] : curve.fidelity_plus[i];
    const double minus = swap ? curve.fidelity_plus[i] : curve.fidelity_minus[i];
    out << curve.ks[i] << ',' << plus << ',' << minus << '\n';
  }
}

void write_metrics_json(const std::filesystem::path& path, const MetricReport& report) {
  nlohmann::json j;
  j["mae"] = report.mae;
  j["rmse"] = report.rmse;
  j["mape_percent"] = report.mape_percent ? nlohmann::json(*report.mape_percent) : nlohmann::json(nullptr);
  j["n_evaluated"] = report.n_evaluated;
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write metrics file: " + path.string());
  out << j.dump(2) << '\n';
}

void DiscreteJoint::validate() const {
  require(table.size() > 0, "joint table is empty");
  require((table.array() >= 0.0).all() && table.allFinite(), "joint table entries must be finite and >= 0");
  require(std::abs(table.sum() - 1.0) <= 1e-12, "joint table must sum to 1");
}

double mutual_information_discrete(const DiscreteJoint& joint) {
  joint.validate();
  const Vector px = joint.marginal_x(), py = joint.marginal_y();
  double mi = 0.0;
  for (Eigen::Index x = 0; x < joint.table.rows(); ++x) {
    for (Eigen::Index y = 0; y < joint.table.cols(); ++y) {
      const double pxy = joint.table(x, y);
      if (pxy > 0.0) mi += pxy * std::log(pxy / (px(x) * py(y)));
    }
  }
  return mi;
}

Matrix true_posterior(const DiscreteJoint& joint) {
  const Vector px = joint.marginal_x(), py = joint.marginal_y();
  Matrix q(joint.table.rows(), joint.table.cols());
  for (Eigen::Index x = 0; x < q.rows(); ++x) {
    if (px(x) > 0.0) {
      q.row(x) = joint.table.row(x) / px(x);
    } else {
      q.row(x) = py.transpose();
    }
  }
  return q;
}

double variational_bound(const DiscreteJoint& joint, const Matrix& q) {
  joint.validate();
  if (q.rows() != joint.table.rows() || q.cols() != joint.table.cols()) {
    fail(ErrorKind::kShapeMismatch, "variational_bound: q shape differs from the joint");
  }
  const Vector py = joint.marginal_y();
  double expected_log_q = 0.0;
  for (Eigen::Index x = 0; x < q.rows(); ++x) {
    for (Eigen::Index y = 0; y < q.cols(); ++y) {
      const double pxy = joint.table(x, y);
      if (pxy > 0.0) expected_log_q += pxy * std::log(q(x, y));
    }
  }
  double expected_log_py = 0.0;
  for (Eigen::Index y = 0; y < py.size(); ++y) {
    if (py(y) > 0.0) expected_log_py += py(y) * std::log(py(y));
  }
  return expected_log_q - expected_log_py;
}

BoundReport bound_sanity(const DiscreteJoint& joint, double delta, double tolerance) {
  BoundReport r;
  r.mutual_information = mutual_information_discrete(joint);
  const Matrix posterior = true_posterior(joint);
  r.bound_true_posterior = variational_bound(joint, posterior);
  r.equality_holds = std::abs(r.bound_true_posterior - r.mutual_information) <= tolerance;
  r.max_perturbed_bound = -std::numeric_limits<double>::infinity();
  r.perturbed_strictly_below = true;
  const Vector px = joint.marginal_x();
  for (Eigen::Index x = 0; x < posterior.rows(); ++x) {
    if (px(x) <= 0.0) continue;  // rows with no mass cannot move the bound
    for (Eigen::Index y = 0; y < posterior.cols(); ++y) {
      for (double sign : {1.0, -1.0}) {
        Matrix q = posterior;
        q(x, y) = std::max(q(x, y) + sign * delta, 1e-12);
        q.row(x) /= q.row(x).sum();
        if ((q.row(x) - posterior.row(x)).cwiseAbs().maxCoeff() < 1e-15) continue;
        const double b = variational_bound(joint, q);
        r.max_perturbed_bound = std::max(r.max_perturbed_bound, b);
        ++r.perturbations;
        if (!(b < r.mutual_information)) r.perturbed_strictly_below = false;
      }
    }
  }
  return r;
}

HistoricalAverage::HistoricalAverage(const data::TemporalSignal& signal, std::size_t train_end_step,
                                     std::size_t steps_per_day)
    : steps_per_day_(steps_per_day) {
  require(steps_per_day >= 1, "steps_per_day must be >= 1");
  require(train_end_step >= 1 && train_end_step <= signal.n_steps, "train_end_step out of range");
  const auto n = static_cast<Eigen::Index>(signal.n_nodes);
  const auto slots = static_cast<Eigen::Index>(steps_per_day);
  slot_mean_ = Matrix::Zero(n, slots);
  Matrix counts = Matrix::Zero(n, slots);
  Vector node_mean = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < train_end_step; ++t) {
      const double v = signal.at(static_cast<std::size_t>(i), 0, t);
      slot_mean_(i, static_cast<Eigen::Index>(t % steps_per_day)) += v;
      counts(i, static_cast<Eigen::Index>(t % steps_per_day)) += 1.0;
      node_mean(i) += v;
    }
    node_mean(i) /= static_cast<double>(train_end_step);
    for (Eigen::Index s = 0; s < slots; ++s) {
      slot_mean_(i, s) = counts(i, s) > 0.0 ? slot_mean_(i, s) / counts(i, s) : node_mean(i);
    }
  }
}

Matrix HistoricalAverage::predict(std::size_t window_start, std::size_t window, std::size_t horizon) const {
  Matrix out(slot_mean_.rows(), static_cast<Eigen::Index>(horizon));
  for (std::size_t h = 0; h < horizon; ++h) {
    out.col(static_cast<Eigen::Index>(h)) =
        slot_mean_.col(static_cast<Eigen::Index>((window_start + window + h) % steps_per_day_));
  }
  return out;
}

}  // namespace gintrip::eval
