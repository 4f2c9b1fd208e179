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

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "gintrip/error.hpp"
#include "gintrip/interpretation.hpp"
#include "gintrip/training.hpp"
#include "support.hpp"

using namespace gintrip;
using namespace gintrip::interpret;

namespace {

std::vector<data::WindowSample> shifted_samples(const data::WindowSample& base, std::size_t count) {
  std::vector<data::WindowSample> out;
  for (std::size_t k = 0; k < count; ++k) {
    auto s = base;
    s.window_start = 10 * k;
    s.x = base.x + testing::random_matrix(base.x.rows(), base.x.cols(), 40 + k, 0.5);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_SUITE("interpretation") {

TEST_CASE("explanations have k rows per window ranked by p") {
  auto inst = train::random_grad_check_instance(1);
  const auto samples = shifted_samples(inst.sample, 4);
  const auto rows = explain(inst.model, samples, 3, 0);
  REQUIRE(rows.size() == 12);
  for (std::size_t w = 0; w < 4; ++w) {
    const auto p = inst.model.predict(samples[w], eval_options(0)).p;
    for (std::size_t r = 0; r < 3; ++r) {
      const auto& row = rows[w * 3 + r];
      CHECK(row.window_start == samples[w].window_start);
      CHECK(row.rank == r + 1);
      CHECK(row.k == 3);
      CHECK(row.p == p(static_cast<Eigen::Index>(row.node)));
      if (r > 0) CHECK(rows[w * 3 + r - 1].p >= row.p);
    }
  }
}

TEST_CASE("k equal to N lists every node once") {
  auto inst = train::random_grad_check_instance(2);
  const auto rows = explain(inst.model, {inst.sample}, 6, 0);
  std::set<std::size_t> nodes;
  for (const auto& r : rows) nodes.insert(r.node);
  CHECK(nodes.size() == 6);
  CHECK_THROWS_AS(explain(inst.model, {inst.sample}, 7, 0), Error);
  CHECK_THROWS_AS(explain(inst.model, {inst.sample}, 0, 0), Error);
}

TEST_CASE("explanation CSV uses node ids") {
  auto inst = train::random_grad_check_instance(3);
  const auto dir = testing::scratch_dir("explanations");
  write_explanations_csv(dir / "e.csv", explain(inst.model, {inst.sample}, 2, 0), inst.model.graph());
  std::ifstream in(dir / "e.csv");
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "window_start,node_id,p,rank,selected_at_k");
  std::size_t count = 0;
  while (std::getline(in, line)) ++count;
  CHECK(count == 2);
}

TEST_CASE("prototype grounding is deterministic and picks the most similar window") {
  auto inst = train::random_grad_check_instance(4);
  const auto samples = shifted_samples(inst.sample, 5);
  const auto a = nearest_training_subgraph(inst.model, samples, 2, 0);
  const auto b = nearest_training_subgraph(inst.model, samples, 2, 0);
  REQUIRE(a.size() == 4);
  for (std::size_t m = 0; m < a.size(); ++m) {
    CHECK(a[m].window_start == b[m].window_start);
    CHECK(a[m].nodes == b[m].nodes);
    CHECK(a[m].nodes.size() == 2);
    CHECK(a[m].pseudo_class == static_cast<int>(m / 2));
    double best = -1e300;
    for (const auto& s : samples) {
      best = std::max(best, inst.model.predict(s, eval_options(0)).gamma(static_cast<Eigen::Index>(m)));
    }
    CHECK(a[m].gamma == best);
  }
  CHECK_THROWS_AS(nearest_training_subgraph(inst.model, {}, 2, 0), Error);

  const auto dir = testing::scratch_dir("prototypes");
  write_prototype_report(dir / "p.json", a, inst.model.graph());
  std::ifstream in(dir / "p.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["prototypes"].size() == 4);
  CHECK(j["prototypes"][0].contains("node_ids"));
}

}  // TEST_SUITE
