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

#include "gintrip/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "gintrip/error.hpp"

namespace gintrip::train {

using ad::Matrix;
using ad::Var;

void TrainConfig::validate() const {
  require(batch_size >= 1, "batch_size must be >= 1");
  require(learning_rate >= 0.0, "learning rate must be >= 0");
  require(temperature_start > 0.0 && temperature_end > 0.0, "gate temperatures must be positive");
  require(patience >= 1, "patience must be >= 1");
  require(weight_update_every >= 1, "weight_update_every must be >= 1");
}

double total_loss(const LossVector& losses, const Weights& weights) {
  const auto l = losses.as_array();
  double total = 0.0;
  for (std::size_t i = 0; i < kLossCount; ++i) total += weights[i] * l[i];
  return total;
}

WeightState update_weights(WeightState state, const LossVector& losses) {
  const auto current = losses.as_array();
  if (state.has_previous) {
    for (std::size_t i = 0; i < kLossCount; ++i) {
      const double prev = state.previous[i];
      // A vanished previous loss carries no progress information.
      const double ratio = std::abs(prev) > 1e-12 ? current[i] / prev : 1.0;
      auto& hist = state.ratio_history[i];
      hist.push_back(ratio);
      while (hist.size() > kRatioWindow) hist.pop_front();
    }
  }
  state.previous = current;
  state.has_previous = true;
  ++state.updates;

  state.fallback = false;
  if (state.updates <= kWarmupEpochs) {
    state.weights = WeightState::uniform_weights();
    return state;
  }
  std::array<double, kLossCount> cov{};
  double total = 0.0;
  for (std::size_t i = 0; i < kLossCount; ++i) {
    const auto& hist = state.ratio_history[i];
    if (hist.empty()) continue;
    const double n = static_cast<double>(hist.size());
    const double mean = std::accumulate(hist.begin(), hist.end(), 0.0) / n;
    double var = 0.0;
    for (double r : hist) var += (r - mean) * (r - mean);
    const double sd = std::sqrt(var / n);
    cov[i] = std::abs(mean) > 1e-12 ? sd / std::abs(mean) : 0.0;
    if (!std::isfinite(cov[i])) cov[i] = 0.0;
    total += cov[i];
  }
  if (total < 1e-9) {
    state.weights = WeightState::uniform_weights();
    state.fallback = true;
    return state;
  }
  for (std::size_t i = 0; i < kLossCount; ++i) state.weights[i] = cov[i] / total;
  return state;
}

double temperature_at(const TrainConfig& config, std::size_t epoch) {
  if (config.epochs <= 1) return config.temperature_start;
  const double frac = std::min(1.0, static_cast<double>(epoch) / static_cast<double>(config.epochs - 1));
  return config.temperature_start + frac * (config.temperature_end - config.temperature_start);
}

void Adam::step(nn::ParameterStore& store) {
  auto& params = store.all();
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    if (!p.trainable) continue;
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * p.grad;
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * p.grad.cwiseAbs2();
    p.value.array() -= lr_ * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + eps_);
  }
}

double mean_absolute_error(const Model& model, const std::vector<data::WindowSample>& samples, std::uint64_t seed) {
  double total = 0.0;
  double count = 0.0;
  const ForwardOptions options = eval_options(seed);
  for (const auto& s : samples) {
    const Prediction pred = model.predict(s, options);
    total += (pred.y_hat - s.y_reg).cwiseAbs().sum();
    count += static_cast<double>(s.y_reg.size());
  }
  return count > 0.0 ? total / count : 0.0;
}

namespace {

LossVector loss_values(const LossTerms& t) {
  return {t.reg.scalar(), t.sub.scalar(), t.var.scalar(), t.con.scalar(), t.cls.scalar()};
}

void check_finite(const LossVector& lv, std::size_t epoch) {
  const auto a = lv.as_array();
  for (std::size_t i = 0; i < kLossCount; ++i) {
    if (!std::isfinite(a[i])) {
      fail(ErrorKind::kNumeric, std::string("non-finite ") + kLossNames[i] + " at epoch " + std::to_string(epoch));
    }
  }
}

Var weighted_total(const LossTerms& t, const Weights& w) {
  Var total = ad::scale(t.reg, w[0]);
  total = ad::add(total, ad::scale(t.sub, w[1]));
  total = ad::add(total, ad::scale(t.var, w[2]));
  total = ad::add(total, ad::scale(t.con, w[3]));
  return ad::add(total, ad::scale(t.cls, w[4]));
}

}  // namespace

TrainResult train(Model& model, const std::vector<data::WindowSample>& train_set,
                  const std::vector<data::WindowSample>& val_set, const TrainConfig& config) {
  config.validate();
  require(!train_set.empty(), "training set is empty");
  require(!val_set.empty(), "validation set is empty");

  nn::ParameterStore& store = model.params();
  Adam adam(config.learning_rate);
  WeightState weights;
  TrainResult result;

  std::vector<Matrix> best;
  double best_mae = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng = make_stream(config.seed, {0x5b0f, epoch});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    ForwardOptions options;
    options.gate_mode = config.gate_mode;
    options.temperature = temperature_at(config, epoch - 1);
    options.seed = config.seed;
    options.stream = epoch;
    options.training = true;

    std::array<double, kLossCount> sums{};
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - begin);
      store.zero_grad();
      for (std::size_t k = begin; k < end; ++k) {
        ad::Tape tape;
        nn::TapeParams params(tape, store);
        const ForwardPass f = model.forward(tape, params, train_set[order[k]], options);
        const LossVector lv = loss_values(f.losses);
        check_finite(lv, epoch);
        const auto a = lv.as_array();
        for (std::size_t i = 0; i < kLossCount; ++i) sums[i] += a[i];
        tape.backward(weighted_total(f.losses, weights.weights));
        params.accumulate_into(store, inv_batch);
      }
      adam.step(store);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    for (auto& s : sums) s /= static_cast<double>(order.size());
    rec.losses = LossVector::from_array(sums);
    rec.weights = weights.weights;
    rec.val_mae = mean_absolute_error(model, val_set, config.seed);
    if (!std::isfinite(rec.val_mae)) fail(ErrorKind::kNumeric, "non-finite validation MAE at epoch " + std::to_string(epoch));
    result.history.push_back(rec);

    if (epoch % config.weight_update_every == 0) weights = update_weights(std::move(weights), rec.losses);

    if (rec.val_mae < best_mae) {
      best_mae = rec.val_mae;
      result.best_epoch = epoch;
      since_best = 0;
      best.clear();
      for (const auto& p : store.all()) best.push_back(p.value);
    } else if (++since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  if (!best.empty()) {
    for (std::size_t k = 0; k < best.size(); ++k) store.all()[k].value = best[k];
  }
  store.zero_grad();
  if (config.epochs > 0) model.set_trained(true);
  return result;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write history: " + path.string());
  out << "epoch,l_reg,l_sub,l_var,l_con,l_cls,w1,w2,w3,w4,w5,val_mae\n";
  out.precision(17);
  for (const auto& r : history) {
    out << r.epoch;
    for (double v : r.losses.as_array()) out << ',' << v;
    for (double w : r.weights) out << ',' << w;
    out << ',' << r.val_mae << '\n';
  }
}

double GradCheckReport::worst() const {
  return *std::max_element(max_relative_error.begin(), max_relative_error.end());
}

GradCheckReport grad_check(const Model& model, const data::WindowSample& sample, double step, double floor,
                           std::uint64_t seed) {
  Model probe = model;
  ForwardOptions options;
  options.gate_mode = extract::GateMode::kSoft;
  options.temperature = 0.5;
  options.seed = seed;
  options.stream = 0x9c;
  options.training = false;

  // Noise statistics carry no gradient, so finite differences must hold them fixed too.
  extract::NoiseStats stats;
  {
    ad::Tape tape;
    nn::TapeParams params(tape, probe.params(), false);
    stats = probe.forward(tape, params, sample, options).stats;
  }
  options.frozen_stats = &stats;

  auto evaluate = [&]() {
    ad::Tape tape;
    nn::TapeParams params(tape, probe.params(), false);
    return loss_values(probe.forward(tape, params, sample, options).losses).as_array();
  };

  std::array<std::vector<Matrix>, kLossCount> analytic;
  for (std::size_t i = 0; i < kLossCount; ++i) {
    ad::Tape tape;
    nn::TapeParams params(tape, probe.params());
    const ForwardPass f = probe.forward(tape, params, sample, options);
    const std::array<Var, kLossCount> terms = {f.losses.reg, f.losses.sub, f.losses.var, f.losses.con, f.losses.cls};
    probe.params().zero_grad();
    tape.backward(terms[i]);
    params.accumulate_into(probe.params());
    for (const auto& p : probe.params().all()) analytic[i].push_back(p.grad);
  }
  probe.params().zero_grad();

  GradCheckReport report;
  auto& all = probe.params().all();
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (!all[k].trainable) continue;
    Matrix& value = all[k].value;
    for (Eigen::Index e = 0; e < value.size(); ++e) {
      const double original = value(e);
      value(e) = original + step;
      const auto plus = evaluate();
      value(e) = original - step;
      const auto minus = evaluate();
      value(e) = original;
      for (std::size_t i = 0; i < kLossCount; ++i) {
        const double numeric = (plus[i] - minus[i]) / (2.0 * step);
        const double a = analytic[i][k](e);
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
        report.max_relative_error[i] = std::max(report.max_relative_error[i], rel);
      }
      ++report.checked_per_loss;
    }
  }
  return report;
}

GradCheckInstance random_grad_check_instance(std::uint64_t seed) {
  constexpr std::size_t kNodes = 6, kWindow = 8, kHorizon = 3;
  Rng rng = make_stream(seed, {0x6c});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.5, 1.5);

  Matrix a = Matrix::Zero(kNodes, kNodes);
  for (std::size_t i = 0; i < kNodes; ++i) {
    const auto u = static_cast<Eigen::Index>(i), v = static_cast<Eigen::Index>((i + 1) % kNodes);
    a(u, v) = a(v, u) = weight(rng);
  }
  a(0, 3) = a(3, 0) = weight(rng);

  ModelConfig config;
  config.n_nodes = kNodes;
  config.n_features = 1;
  config.window = kWindow;
  config.horizon = kHorizon;
  config.encoder.hidden_dim = 8;
  config.n_classes = 2;
  config.prototypes_per_class = 2;

  data::NormalizationStats stats;
  stats.mean = ad::Vector::Constant(1, 0.3);
  stats.std = ad::Vector::Constant(1, 1.7);

  data::WindowSample sample;
  sample.window_start = 0;
  sample.x.resize(kWindow * kNodes, 1);
  for (Eigen::Index i = 0; i < sample.x.size(); ++i) sample.x(i) = normal(rng);
  sample.y_reg.resize(kNodes, kHorizon);
  for (Eigen::Index i = 0; i < sample.y_reg.size(); ++i) sample.y_reg(i) = normal(rng);
  sample.y_cls.resize(kNodes);
  for (std::size_t i = 0; i < kNodes; ++i) sample.y_cls(static_cast<Eigen::Index>(i)) = static_cast<int>(i % 2);

  return GradCheckInstance{Model(config, data::make_graph(std::move(a)), stats, seed), std::move(sample)};
}

}  // namespace gintrip::train
