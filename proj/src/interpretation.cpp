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

#include "gintrip/interpretation.hpp"

#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "gintrip/error.hpp"
#include "gintrip/extractor.hpp"
#include "gintrip/prototype.hpp"

namespace gintrip::interpret {

std::vector<ExplanationRow> explain(const Model& model, const std::vector<data::WindowSample>& samples,
                                    std::size_t k, std::uint64_t seed) {
  const std::size_t n = model.config().n_nodes;
  if (k < 1 || k > n) {
    fail(ErrorKind::kInvalidArgument, "k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  }
  const ForwardOptions options = eval_options(seed);
  std::vector<ExplanationRow> rows;
  rows.reserve(samples.size() * k);
  for (const auto& s : samples) {
    const Prediction pred = model.predict(s, options);
    const auto top = extract::top_k(pred.p, k);
    for (std::size_t r = 0; r < top.size(); ++r) {
      rows.push_back({s.window_start, top[r], pred.p(static_cast<Eigen::Index>(top[r])), r + 1, k});
    }
  }
  return rows;
}

void write_explanations_csv(const std::filesystem::path& path, const std::vector<ExplanationRow>& rows,
                            const data::StaticGraph& graph) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write explanations: " + path.string());
  out << "window_start,node_id,p,rank,selected_at_k\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.window_start << ',' << graph.node_ids.at(r.node) << ',' << r.p << ',' << r.rank << ',' << r.k << '\n';
  }
}

std::vector<PrototypeGrounding> nearest_training_subgraph(const Model& model,
                                                          const std::vector<data::WindowSample>& samples,
                                                          std::size_t k, std::uint64_t seed) {
  if (samples.empty()) fail(ErrorKind::kInvalidArgument, "nearest_training_subgraph: dataset is empty");
  const ad::Matrix& bank = model.params().get("prototypes").value;
  const auto classes = proto::prototype_classes(model.config().n_classes, model.config().prototypes_per_class);
  std::vector<PrototypeGrounding> out(static_cast<std::size_t>(bank.rows()));
  for (std::size_t m = 0; m < out.size(); ++m) {
    out[m].prototype = m;
    out[m].pseudo_class = classes[m];
    out[m].norm = bank.row(static_cast<Eigen::Index>(m)).norm();
    out[m].gamma = -std::numeric_limits<double>::infinity();
  }
  const ForwardOptions options = eval_options(seed);
  for (const auto& s : samples) {
    const Prediction pred = model.predict(s, options);
    for (std::size_t m = 0; m < out.size(); ++m) {
      const double g = pred.gamma(static_cast<Eigen::Index>(m));
      if (g > out[m].gamma) {
        out[m].gamma = g;
        out[m].window_start = s.window_start;
        out[m].nodes = extract::top_k(pred.p, k);
      }
    }
  }
  return out;
}

void write_prototype_report(const std::filesystem::path& path, const std::vector<PrototypeGrounding>& groundings,
                            const data::StaticGraph& graph) {
  nlohmann::json report = nlohmann::json::array();
  for (const auto& g : groundings) {
    std::vector<std::string> ids;
    for (auto n : g.nodes) ids.push_back(graph.node_ids.at(n));
    report.push_back({{"prototype", g.prototype},
                      {"class", g.pseudo_class},
                      {"vector_norm", g.norm},
                      {"best_window_start", g.window_start},
                      {"node_ids", ids},
                      {"gamma", g.gamma}});
  }
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write prototype report: " + path.string());
  out << nlohmann::json{{"prototypes", report}}.dump(2) << '\n';
}

}  // namespace gintrip::interpret
