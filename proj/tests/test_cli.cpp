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
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gintrip/cli.hpp"
#include "gintrip/error.hpp"
#include "support.hpp"

using namespace gintrip;
namespace fs = std::filesystem;

namespace {

/// Runs the CLI in-process, capturing stderr.
struct Invocation {
  int code = -1;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "gintrip");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream err, out;
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  Invocation r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data());
  std::cerr.rdbuf(old_err);
  std::cout.rdbuf(old_out);
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json toy_config() {
  const auto dir = testing::fixture("toy4");
  return {{"signal", (dir / "signal.bin").string()},
          {"graph", (dir / "graph.csv").string()},
          {"meta", (dir / "meta.json").string()},
          {"window", 8},
          {"horizon", 2},
          {"stride", 2},
          {"hidden_dim", 6},
          {"epochs", 2},
          {"seed", 3}};
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
  std::ofstream(dir / "run.json") << j.dump(2);
  return dir / "run.json";
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"train", "--no-such-flag"}).code == 2);
  CHECK(invoke({"train"}).code == 2);
}

TEST_CASE("missing input files exit with code 2 and name the path") {
  const auto dir = testing::scratch_dir("cli_missing");
  auto cfg = toy_config();
  cfg["signal"] = (dir / "nope.bin").string();
  const auto r = invoke({"train", "--config", write_config(dir, cfg).string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("nope.bin") != std::string::npos);
  const auto missing = invoke({"train", "--config", (dir / "absent.json").string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("absent.json") != std::string::npos);
}

TEST_CASE("config parsing") {
  const auto dir = testing::scratch_dir("cli_config");
  auto bad = toy_config();
  bad["windw"] = 4;
  const auto r = invoke({"train", "--config", write_config(dir, bad).string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("windw") != std::string::npos);

  auto rel = toy_config();
  rel["signal"] = "data/signal.bin";
  const auto c = cli::RunConfig::from_json(rel, dir);
  CHECK(c.signal == dir / "data/signal.bin");
  CHECK(c.window == 8);
  CHECK(c.encoder.hidden_dim == 6);
  CHECK(c.training.epochs == 2);
  const auto round = cli::RunConfig::from_json(c.to_json(), dir);
  CHECK(round.to_json() == c.to_json());

  auto three = toy_config();
  three["classes"] = 3;
  CHECK_THROWS_AS(cli::RunConfig::from_json(three, dir).validate(), Error);
}

TEST_CASE("train, eval and explain produce their artifacts") {
  const auto dir = testing::scratch_dir("cli_flow");
  const auto cfg = write_config(dir, toy_config()).string();
  const auto out = (dir / "out").string();
  REQUIRE(invoke({"train", "--config", cfg, "--out", out}).code == 0);
  for (const char* f : {"checkpoint.gtck", "history.csv", "config.json"}) CHECK(fs::exists(dir / "out" / f));
  CHECK(count_lines(dir / "out" / "history.csv") == 3);

  const auto ckpt = (dir / "out" / "checkpoint.gtck").string();
  const auto ev = (dir / "eval").string();
  REQUIRE(invoke({"eval", "--config", cfg, "--checkpoint", ckpt, "--out", ev}).code == 0);
  CHECK(fs::exists(dir / "eval" / "metrics.json"));
  CHECK(fs::exists(dir / "eval" / "forecast.csv"));
  CHECK(!fs::exists(dir / "eval" / "fidelity.csv"));
  CHECK(slurp(dir / "eval" / "forecast.csv").rfind("window_start,node_id,horizon_step,y_true,y_pred\n", 0) == 0);
  CHECK(slurp(dir / "eval" / "forecast.csv").find(",s100,1,") != std::string::npos);

  REQUIRE(invoke({"eval", "--config", cfg, "--checkpoint", ckpt, "--out", ev, "--ks", "3,1"}).code == 0);
  CHECK(count_lines(dir / "eval" / "fidelity.csv") == 3);
  CHECK(invoke({"eval", "--config", cfg, "--checkpoint", ckpt, "--out", ev, "--ks", "5"}).code == 2);
  CHECK(invoke({"eval", "--config", cfg, "--checkpoint", ckpt, "--out", ev, "--fidelity-convention", "x"}).code == 2);

  const auto ex = (dir / "explain").string();
  REQUIRE(invoke({"explain", "--config", cfg, "--checkpoint", ckpt, "--out", ex, "--k", "2"}).code == 0);
  CHECK(fs::exists(dir / "explain" / "prototypes.json"));
  CHECK(slurp(dir / "explain" / "explanations.csv").find(",s10") != std::string::npos);
  CHECK(invoke({"explain", "--config", cfg, "--checkpoint", ckpt, "--out", ex, "--k", "9"}).code == 2);
  CHECK(invoke({"report", "--config", cfg, "--checkpoint", ckpt, "--out", ex, "--k", "2"}).code == 0);
}

TEST_CASE("repeated runs are byte-identical") {
  const auto dir = testing::scratch_dir("cli_repeat");
  const auto cfg = write_config(dir, toy_config()).string();
  for (const char* o : {"a", "b"}) {
    REQUIRE(invoke({"train", "--config", cfg, "--out", (dir / o).string()}).code == 0);
    REQUIRE(invoke({"eval", "--config", cfg, "--checkpoint", (dir / o / "checkpoint.gtck").string(), "--out",
                    (dir / o).string(), "--ks", "1,2"})
                .code == 0);
  }
  for (const char* f : {"checkpoint.gtck", "history.csv", "metrics.json", "forecast.csv", "fidelity.csv"}) {
    INFO(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
}

TEST_CASE("zero epochs stores the initialization") {
  const auto dir = testing::scratch_dir("cli_zero");
  const auto cfg = write_config(dir, toy_config()).string();
  REQUIRE(invoke({"train", "--config", cfg, "--out", (dir / "a").string(), "--epochs", "0"}).code == 0);
  REQUIRE(invoke({"train", "--config", cfg, "--out", (dir / "b").string(), "--epochs", "0", "--lr", "0.5"}).code == 0);
  CHECK(slurp(dir / "a" / "checkpoint.gtck") == slurp(dir / "b" / "checkpoint.gtck"));
  CHECK(count_lines(dir / "a" / "history.csv") == 1);
  REQUIRE(invoke({"train", "--config", cfg, "--out", (dir / "c").string(), "--epochs", "1"}).code == 0);
  CHECK(slurp(dir / "a" / "checkpoint.gtck") != slurp(dir / "c" / "checkpoint.gtck"));
}

TEST_CASE("synth writes a runnable planted dataset") {
  const auto dir = testing::scratch_dir("cli_synth");
  REQUIRE(invoke({"synth", "--nodes", "8", "--informative", "3", "--steps", "240", "--out", dir.string()}).code == 0);
  for (const char* f : {"signal.bin", "graph.csv", "meta.json", "truth.json", "run.json"}) CHECK(fs::exists(dir / f));
  std::ifstream truth(dir / "truth.json");
  const auto t = nlohmann::json::parse(truth);
  CHECK(t["informative_nodes"].size() == 3);
  CHECK(invoke({"train", "--config", (dir / "run.json").string(), "--epochs", "1", "--out", (dir / "run").string()})
            .code == 0);
}

}  // TEST_SUITE
