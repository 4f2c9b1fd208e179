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

#ifndef GINTRIP_TRAINING_HPP
#define GINTRIP_TRAINING_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "gintrip/extractor.hpp"
#include "gintrip/graph_data.hpp"
#include "gintrip/model.hpp"

namespace gintrip::train {

inline constexpr std::size_t kLossCount = 5;
inline constexpr std::size_t kRatioWindow = 10;
inline constexpr std::size_t kWarmupEpochs = 2;

using Weights = std::array<double, kLossCount>;

/// Objective terms in the fixed order reg, sub, var, con, cls.
struct LossVector {
  double l_reg = 0.0;
  double l_sub = 0.0;
  double l_var = 0.0;
  double l_con = 0.0;
  double l_cls = 0.0;

  std::array<double, kLossCount> as_array() const { return {l_reg, l_sub, l_var, l_con, l_cls}; }
  static LossVector from_array(const std::array<double, kLossCount>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }
};

inline constexpr std::array<const char*, kLossCount> kLossNames = {"l_reg", "l_sub", "l_var", "l_con", "l_cls"};

/// Coefficient-of-variation weighting state.
struct WeightState {
  std::array<std::deque<double>, kLossCount> ratio_history;
  std::array<double, kLossCount> previous{};
  bool has_previous = false;
  Weights weights = uniform_weights();
  std::size_t updates = 0;
  bool fallback = false;

  static Weights uniform_weights() {
    Weights w;
    w.fill(1.0 / static_cast<double>(kLossCount));
    return w;
  }
};

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  extract::GateMode gate_mode = extract::GateMode::kSoft;
  double temperature_start = 1.0;
  double temperature_end = 0.1;
  std::size_t patience = 15;
  /// Epochs between weight updates.
  std::size_t weight_update_every = 1;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  LossVector losses;
  Weights weights{};
  double val_mae = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
};

double total_loss(const LossVector& losses, const Weights& weights);

/// Pushes the epoch-mean losses into the ratio history and recomputes the
/// weights: w_i = c_i / sum c_j with c_i = std / |mean| of the last ten
/// loss ratios. Uniform during warm-up or when every c_i vanishes.
WeightState update_weights(WeightState state, const LossVector& losses);

/// Linear temperature schedule from start to end over the epochs.
double temperature_at(const TrainConfig& config, std::size_t epoch);

class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(nn::ParameterStore& store);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<ad::Matrix> m_, v_;
};

/// Mean absolute error of eval-mode forecasts over the samples.
double mean_absolute_error(const Model& model, const std::vector<data::WindowSample>& samples, std::uint64_t seed);

/// Adam training with per-epoch CoV weight updates and early stopping on
/// validation MAE. The best-validation parameters are restored on exit.
TrainResult train(Model& model, const std::vector<data::WindowSample>& train_set,
                  const std::vector<data::WindowSample>& val_set, const TrainConfig& config);

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

struct GradCheckReport {
  std::array<double, kLossCount> max_relative_error{};
  std::size_t checked_per_loss = 0;

  double worst() const;
};

/// Finite-difference check of every loss term on one sample with soft
/// gates and fixed noise: relative error = |analytic - numeric| /
/// max(|analytic|, |numeric|, floor).
GradCheckReport grad_check(const Model& model, const data::WindowSample& sample, double step = 1e-5,
                           double floor = 1e-6, std::uint64_t seed = 0);

/// Random small instance (N=6, d_h=8, K=2, J=2) for grad_check.
struct GradCheckInstance {
  Model model;
  data::WindowSample sample;
};
GradCheckInstance random_grad_check_instance(std::uint64_t seed);

}  // namespace gintrip::train

#endif  // GINTRIP_TRAINING_HPP
