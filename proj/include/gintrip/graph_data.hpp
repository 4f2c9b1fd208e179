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

#ifndef GINTRIP_GRAPH_DATA_HPP
#define GINTRIP_GRAPH_DATA_HPP

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gintrip::data {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Static weighted graph. Self-loops are stripped on construction and the
/// number removed is kept for diagnostics.
struct StaticGraph {
  std::size_t n_nodes = 0;
  Matrix adjacency;
  std::vector<std::string> node_ids;
  std::size_t self_loops_removed = 0;
};

/// Validates and normalizes an adjacency matrix into a StaticGraph.
/// Empty `node_ids` are filled with "0", "1", ...
StaticGraph make_graph(Matrix adjacency, std::vector<std::string> node_ids = {});

/// Node-major, feature-next, time-last tensor of shape N x D x T.
struct TemporalSignal {
  std::size_t n_nodes = 0;
  std::size_t n_features = 0;
  std::size_t n_steps = 0;
  std::uint32_t step_seconds = 300;
  std::vector<double> values;
  std::size_t imputed = 0;

  TemporalSignal() = default;
  TemporalSignal(std::size_t n, std::size_t d, std::size_t t, std::uint32_t step = 300)
      : n_nodes(n), n_features(d), n_steps(t), step_seconds(step), values(n * d * t, 0.0) {}

  std::size_t index(std::size_t node, std::size_t feature, std::size_t step) const {
    return (node * n_features + feature) * n_steps + step;
  }
  double at(std::size_t node, std::size_t feature, std::size_t step) const {
    return values[index(node, feature, step)];
  }
  double& at(std::size_t node, std::size_t feature, std::size_t step) {
    return values[index(node, feature, step)];
  }
};

struct PseudoLabelSpec {
  double quantile = 0.1;
  Vector thresholds;
  bool positive_class_is_congested = true;
  std::vector<std::string> warnings;
};

/// One sliding window. `x` is stored time-major as a (W*N) x D matrix: row
/// t*N + i holds node i at window step t. `y_reg` is N x T' in the units of
/// the signal; `y_cls(i)` is 1 when node i's window mean of feature 0 falls
/// below its threshold.
struct WindowSample {
  Matrix x;
  Matrix y_reg;
  Eigen::VectorXi y_cls;
  std::size_t window_start = 0;

  std::size_t n_nodes() const { return static_cast<std::size_t>(y_reg.rows()); }
  std::size_t window() const { return static_cast<std::size_t>(x.rows()) / n_nodes(); }
  std::size_t horizon() const { return static_cast<std::size_t>(y_reg.cols()); }
};

struct NormalizationStats {
  Vector mean;
  Vector std;
  std::string computed_on = "train";
  std::vector<bool> zero_variance;
};

struct PlantedSpec {
  std::size_t n_nodes = 20;
  std::vector<std::size_t> informative_set;
  double noise_sigma = 0.1;
  /// Mean level of the informative input series; the rest are N(0, 1).
  double informative_level = 1.0;
  std::size_t horizon = 4;
  std::size_t window = 8;
  std::size_t n_steps = 3000;
  std::uint64_t seed = 0;

  /// Synthetic series are laid out in episodes of W + T' steps; windows
  /// aligned to episode starts are the planted samples.
  std::size_t episode_length() const { return window + horizon; }
};

struct SyntheticDataset {
  StaticGraph graph;
  TemporalSignal signal;
  std::vector<std::size_t> ground_truth;
  /// Planted linear map, horizon x |informative|, and its offset.
  Matrix coefficients;
  double offset = 0.0;
};

struct Splits {
  std::vector<WindowSample> train;
  std::vector<WindowSample> val;
  std::vector<WindowSample> test;
  std::size_t purged = 0;
};

// ---- portable file format -------------------------------------------------

struct Dataset {
  StaticGraph graph;
  TemporalSignal signal;
};

/// Reads `signal.bin` + `graph.csv` (+ optional `meta.json` with node_ids).
/// Zeros and NaNs are treated as missing and imputed (last observation
/// carried forward, then node mean); more than 20% NaN is refused.
Dataset load_dataset(const std::filesystem::path& signal_path,
                     const std::filesystem::path& graph_path,
                     const std::optional<std::filesystem::path>& meta_path = std::nullopt);

TemporalSignal read_signal(const std::filesystem::path& path);
void write_signal(const std::filesystem::path& path, const TemporalSignal& signal);
/// Edge list; returns (src, dst, weight) triples and the largest index seen.
std::vector<std::array<double, 3>> read_edges(const std::filesystem::path& path);
void write_graph(const std::filesystem::path& path, const StaticGraph& graph);
void write_meta(const std::filesystem::path& path, const StaticGraph& graph);

/// In-place imputation; returns the number of imputed entries.
std::size_t impute_missing(TemporalSignal& signal);

// ---- preprocessing --------------------------------------------------------

/// Type-7 (linear interpolation) quantile of an unsorted sample.
double quantile(std::vector<double> values, double q);

PseudoLabelSpec compute_thresholds(const TemporalSignal& signal, double q);

std::vector<WindowSample> make_windows(const TemporalSignal& signal, const PseudoLabelSpec& spec,
                                       std::size_t window, std::size_t horizon,
                                       std::size_t stride = 1);

/// Contiguous split by floor(ratio * n) for train and val, remainder to
/// test. Windows at the head of val/test whose inputs would overlap the
/// previous split's targets are purged.
Splits split_chronological(std::vector<WindowSample> samples,
                           std::array<double, 3> ratios = {0.6, 0.2, 0.2});

NormalizationStats compute_stats(const std::vector<WindowSample>& samples,
                                 const std::string& tag = "train");
std::vector<WindowSample> normalize(std::vector<WindowSample> samples,
                                    const NormalizationStats& stats);
std::vector<WindowSample> denormalize(std::vector<WindowSample> samples,
                                      const NormalizationStats& stats);

// ---- synthetic data -------------------------------------------------------

/// Random informative set of the given size, sorted ascending.
std::vector<std::size_t> random_informative_set(std::size_t n_nodes, std::size_t count,
                                                std::uint64_t seed);

SyntheticDataset generate_synthetic(const PlantedSpec& spec);

}  // namespace gintrip::data

#endif  // GINTRIP_GRAPH_DATA_HPP
