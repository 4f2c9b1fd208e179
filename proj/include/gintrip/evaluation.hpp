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

#ifndef GINTRIP_EVALUATION_HPP
#define GINTRIP_EVALUATION_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gintrip/autodiff.hpp"
#include "gintrip/graph_data.hpp"
#include "gintrip/model.hpp"

namespace gintrip::eval {

using ad::Matrix;
using ad::Vector;

inline constexpr double kMapeFloor = 1e-6;

struct MetricReport {
  double mae = 0.0;
  double rmse = 0.0;
  /// Absent when no target clears the MAPE floor.
  std::optional<double> mape_percent;
  std::size_t n_evaluated = 0;
  std::size_t n_mape = 0;
};

/// Streams (prediction, truth) pairs into MAE / RMSE / MAPE.
class MetricAccumulator {
 public:
  void add(const Matrix& y_hat, const Matrix& y_true);
  MetricReport report() const;

 private:
  double abs_sum_ = 0.0;
  double sq_sum_ = 0.0;
  double pct_sum_ = 0.0;
  std::size_t count_ = 0;
  std::size_t pct_count_ = 0;
};

MetricReport forecast_metrics(const Matrix& y_hat, const Matrix& y_true);

/// Eval-mode forecasts of the model over the samples.
MetricReport evaluate_forecasts(const Model& model, const std::vector<data::WindowSample>& samples,
                                std::uint64_t seed);

enum class FidelityVariant {
  kPlus,   // explanation nodes masked
  kMinus,  // everything except the explanation masked
};

enum class FidelityConvention {
  kStandard,
  kSwapped,  // plus/minus labels swapped
};

/// Picks the explanation node set of a sample given its keep-probabilities.
using NodeSelector = std::function<std::vector<std::size_t>(const data::WindowSample&, const Vector& p)>;

/// Replaces the listed nodes' inputs by the train mean (0 after z-scoring).
data::WindowSample mask_nodes(const data::WindowSample& sample, const std::vector<std::size_t>& nodes);

/// 100 * mean over samples of |f(G) - f(G masked)|, f = mean forecast.
double fidelity(const Model& model, const std::vector<data::WindowSample>& samples, const NodeSelector& select,
                FidelityVariant variant, std::uint64_t seed);

/// Fidelity with the top-k nodes by p as the explanation.
double fidelity(const Model& model, const std::vector<data::WindowSample>& samples, std::size_t k,
                FidelityVariant variant, std::uint64_t seed);

struct FidelityCurve {
  std::vector<std::size_t> ks;
  std::vector<double> fidelity_plus;
  std::vector<double> fidelity_minus;
  std::vector<std::string> warnings;
};

/// Fidelity at each k, sorted ascending and de-duplicated.
FidelityCurve sparsity_sweep(const Model& model, const std::vector<data::WindowSample>& samples,
                             std::vector<std::size_t> ks, std::uint64_t seed);

/// `k,fidelity_plus,fidelity_minus`; kSwapped exchanges the two value columns.
void write_fidelity_csv(const std::filesystem::path& path, const FidelityCurve& curve,
                        FidelityConvention convention = FidelityConvention::kStandard);

void write_metrics_json(const std::filesystem::path& path, const MetricReport& report);

/// Joint distribution table over a finite X x Y.
struct DiscreteJoint {
  Matrix table;

  void validate() const;
  Vector marginal_x() const { return table.rowwise().sum(); }
  Vector marginal_y() const { return table.colwise().sum().transpose(); }
};

/// Exact I(X;Y) in nats with 0 log 0 = 0.
double mutual_information_discrete(const DiscreteJoint& joint);

/// E[log q(y|x)] - E[log p(y)] for a conditional table q (rows sum to 1).
double variational_bound(const DiscreteJoint& joint, const Matrix& q);

/// p(y|x) rows; rows with p(x) = 0 get the marginal p(y).
Matrix true_posterior(const DiscreteJoint& joint);

struct BoundReport {
  double mutual_information = 0.0;
  double bound_true_posterior = 0.0;
  double max_perturbed_bound = 0.0;
  std::size_t perturbations = 0;
  bool equality_holds = false;
  bool perturbed_strictly_below = false;
};

/// Checks the bound is tight at the true posterior and strictly loose for
/// every +-delta single-entry perturbation (renormalized) of it.
BoundReport bound_sanity(const DiscreteJoint& joint, double delta = 0.1, double tolerance = 1e-9);

/// Historical-average forecaster: per node and time-of-day slot, the
/// mean of the training signal; used as a forecasting baseline.
class HistoricalAverage {
 public:
  HistoricalAverage(const data::TemporalSignal& signal, std::size_t train_end_step, std::size_t steps_per_day);
  Matrix predict(std::size_t window_start, std::size_t window, std::size_t horizon) const;

 private:
  Matrix slot_mean_;  // N x steps_per_day
  std::size_t steps_per_day_;
};

}  // namespace gintrip::eval

#endif  // GINTRIP_EVALUATION_HPP
