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

#ifndef GINTRIP_INTERPRETATION_HPP
#define GINTRIP_INTERPRETATION_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "gintrip/graph_data.hpp"
#include "gintrip/model.hpp"

// Explanation exports: per-window node rankings and the grounding of each
// prototype in its most similar training subgraph.

namespace gintrip::interpret {

struct ExplanationRow {
  std::size_t window_start = 0;
  std::size_t node = 0;
  double p = 0.0;
  std::size_t rank = 0;  // 1-based
  std::size_t k = 0;
};

/// Top-k nodes of every sample by keep-probability; n_samples * k rows.
std::vector<ExplanationRow> explain(const Model& model, const std::vector<data::WindowSample>& samples,
                                    std::size_t k, std::uint64_t seed);

/// `window_start,node_id,p,rank,selected_at_k`.
void write_explanations_csv(const std::filesystem::path& path, const std::vector<ExplanationRow>& rows,
                            const data::StaticGraph& graph);

struct PrototypeGrounding {
  std::size_t prototype = 0;
  int pseudo_class = 0;
  double norm = 0.0;
  std::size_t window_start = 0;
  std::vector<std::size_t> nodes;
  double gamma = 0.0;
};

/// For each prototype, the sample whose pooled subgraph embedding is most
/// similar to it (first one wins ties) and that sample's top-k nodes.
std::vector<PrototypeGrounding> nearest_training_subgraph(const Model& model,
                                                          const std::vector<data::WindowSample>& samples,
                                                          std::size_t k, std::uint64_t seed);

void write_prototype_report(const std::filesystem::path& path, const std::vector<PrototypeGrounding>& groundings,
                            const data::StaticGraph& graph);

}  // namespace gintrip::interpret

#endif  // GINTRIP_INTERPRETATION_HPP
