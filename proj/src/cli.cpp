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

#include "gintrip/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "gintrip/error.hpp"
#include "gintrip/evaluation.hpp"
#include "gintrip/graph_data.hpp"
#include "gintrip/interpretation.hpp"

namespace gintrip::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys = {
    "signal", "graph", "meta", "window", "horizon", "stride", "split", "quantile", "hidden_dim",
    "n_blocks", "temporal_kernel", "dilations", "dropout", "classes", "prototypes_per_class",
    "gate_mode", "temperature_start", "temperature_end", "epochs", "batch_size", "lr", "patience",
    "weight_update_every", "seed", "out"};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return (path.is_absolute() || base.empty()) ? path : base / path;
}

template <typename T>
void read_key(const json& doc, const char* key, T& into) {
  if (!doc.contains(key)) return;
  try {
    into = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("config key '") + key + "': " + e.what());
  }
}

std::string gate_mode_name(extract::GateMode m) { return m == extract::GateMode::kHard ? "hard" : "soft"; }

}  // namespace

RunConfig RunConfig::from_json(const json& doc, const fs::path& base_dir) {
  require(doc.is_object(), "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (kConfigKeys.count(key) == 0) fail(ErrorKind::kInvalidArgument, "unknown config key: " + key);
  }
  RunConfig c;
  std::string s;
  if (doc.contains("signal")) { read_key(doc, "signal", s); c.signal = resolve(base_dir, s); }
  if (doc.contains("graph")) { read_key(doc, "graph", s); c.graph = resolve(base_dir, s); }
  if (doc.contains("meta")) { read_key(doc, "meta", s); c.meta = resolve(base_dir, s); }
  s = c.out.string();
  read_key(doc, "out", s);
  c.out = resolve(base_dir, s);
  read_key(doc, "window", c.window);
  read_key(doc, "horizon", c.horizon);
  read_key(doc, "stride", c.stride);
  read_key(doc, "split", c.split);
  read_key(doc, "quantile", c.quantile);
  read_key(doc, "hidden_dim", c.encoder.hidden_dim);
  read_key(doc, "n_blocks", c.encoder.n_blocks);
  read_key(doc, "temporal_kernel", c.encoder.temporal_kernel);
  read_key(doc, "dilations", c.encoder.dilations);
  read_key(doc, "dropout", c.encoder.dropout);
  read_key(doc, "classes", c.classes);
  read_key(doc, "prototypes_per_class", c.prototypes_per_class);
  if (doc.contains("gate_mode")) {
    read_key(doc, "gate_mode", s);
    if (s == "soft") {
      c.training.gate_mode = extract::GateMode::kSoft;
    } else if (s == "hard") {
      c.training.gate_mode = extract::GateMode::kHard;
    } else {
      fail(ErrorKind::kInvalidArgument, "gate_mode must be 'soft' or 'hard', got '" + s + "'");
    }
  }
  read_key(doc, "temperature_start", c.training.temperature_start);
  read_key(doc, "temperature_end", c.training.temperature_end);
  read_key(doc, "epochs", c.training.epochs);
  read_key(doc, "batch_size", c.training.batch_size);
  read_key(doc, "lr", c.training.learning_rate);
  read_key(doc, "patience", c.training.patience);
  read_key(doc, "weight_update_every", c.training.weight_update_every);
  read_key(doc, "seed", c.training.seed);
  return c;
}

json RunConfig::to_json() const {
  json j;
  j["signal"] = signal.string();
  j["graph"] = graph.string();
  if (meta) j["meta"] = meta->string();
  j["window"] = window;
  j["horizon"] = horizon;
  j["stride"] = stride;
  j["split"] = split;
  j["quantile"] = quantile;
  j["hidden_dim"] = encoder.hidden_dim;
  j["n_blocks"] = encoder.n_blocks;
  j["temporal_kernel"] = encoder.temporal_kernel;
  j["dilations"] = encoder.dilations;
  j["dropout"] = encoder.dropout;
  j["classes"] = classes;
  j["prototypes_per_class"] = prototypes_per_class;
  j["gate_mode"] = gate_mode_name(training.gate_mode);
  j["temperature_start"] = training.temperature_start;
  j["temperature_end"] = training.temperature_end;
  j["epochs"] = training.epochs;
  j["batch_size"] = training.batch_size;
  j["lr"] = training.learning_rate;
  j["patience"] = training.patience;
  j["weight_update_every"] = training.weight_update_every;
  j["seed"] = training.seed;
  j["out"] = out.string();
  return j;
}

void RunConfig::validate() const {
  require(!signal.empty(), "config is missing 'signal'");
  require(!graph.empty(), "config is missing 'graph'");
  if (!fs::exists(signal)) fail(ErrorKind::kIo, "signal file not found: " + signal.string());
  if (!fs::exists(graph)) fail(ErrorKind::kIo, "graph file not found: " + graph.string());
  if (meta && !fs::exists(*meta)) fail(ErrorKind::kIo, "meta file not found: " + meta->string());
  require(window >= 1 && horizon >= 1 && stride >= 1, "window, horizon and stride must be >= 1");
  require(quantile > 0.0 && quantile < 1.0, "quantile must lie in (0, 1)");
  require(classes == 2, "pseudo-labels are binary; classes must be 2");
  require(prototypes_per_class >= 1, "prototypes_per_class must be >= 1");
  encoder.validate(window);
  training.validate();
}

namespace {

/// Dataset, splits (normalized with the model's stats) and the model.
struct Workspace {
  data::Dataset dataset;
  data::Splits splits;
  std::optional<Model> model;
};

Workspace prepare(const RunConfig& cfg, const std::optional<fs::path>& checkpoint) {
  Workspace ws;
  ws.dataset = data::load_dataset(cfg.signal, cfg.graph, cfg.meta);
  const auto labels = data::compute_thresholds(ws.dataset.signal, cfg.quantile);
  for (const auto& w : labels.warnings) std::cerr << "warning: " << w << '\n';
  auto windows = data::make_windows(ws.dataset.signal, labels, cfg.window, cfg.horizon, cfg.stride);
  ws.splits = data::split_chronological(std::move(windows), cfg.split);

  ModelConfig mc;
  mc.n_nodes = ws.dataset.graph.n_nodes;
  mc.n_features = ws.dataset.signal.n_features;
  mc.window = cfg.window;
  mc.horizon = cfg.horizon;
  mc.encoder = cfg.encoder;
  mc.n_classes = cfg.classes;
  mc.prototypes_per_class = cfg.prototypes_per_class;
  ws.model.emplace(mc, ws.dataset.graph, data::compute_stats(ws.splits.train), cfg.training.seed);
  if (checkpoint) {
    nn::load_checkpoint(*checkpoint, ws.model->params());
    ws.model->set_trained(true);
  }
  const auto stats = ws.model->normalization();
  ws.splits.train = data::normalize(std::move(ws.splits.train), stats);
  ws.splits.val = data::normalize(std::move(ws.splits.val), stats);
  ws.splits.test = data::normalize(std::move(ws.splits.test), stats);
  return ws;
}

const std::vector<data::WindowSample>& pick_split(const Workspace& ws, const std::string& name) {
  if (name == "train") return ws.splits.train;
  if (name == "val") return ws.splits.val;
  if (name == "test") return ws.splits.test;
  fail(ErrorKind::kInvalidArgument, "unknown split '" + name + "' (train, val or test)");
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_forecasts(const fs::path& path, const Model& model, const std::vector<data::WindowSample>& samples,
                     std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write forecasts: " + path.string());
  out << "window_start,node_id,horizon_step,y_true,y_pred\n";
  out.precision(10);
  const auto options = eval_options(seed);
  for (const auto& s : samples) {
    const auto pred = model.predict(s, options);
    for (Eigen::Index i = 0; i < s.y_reg.rows(); ++i) {
      for (Eigen::Index h = 0; h < s.y_reg.cols(); ++h) {
        out << s.window_start << ',' << model.graph().node_ids[static_cast<std::size_t>(i)] << ',' << h + 1 << ','
            << s.y_reg(i, h) << ',' << pred.y_hat(i, h) << '\n';
      }
    }
  }
}

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> signal;
  std::optional<std::string> graph;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Run configuration (JSON)")->required();
  cmd->add_option("--seed", f.seed, "Override the seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--signal", f.signal, "Override the signal.bin path");
  cmd->add_option("--graph", f.graph, "Override the graph.csv path");
}

RunConfig load_config(const CommonFlags& f) {
  std::ifstream in(f.config);
  if (!in) fail(ErrorKind::kIo, "config file not found: " + f.config);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::kInvalidArgument, "config " + f.config + " is not valid JSON: " + e.what());
  }
  RunConfig c = RunConfig::from_json(doc, fs::path(f.config).parent_path());
  if (f.seed) c.training.seed = *f.seed;
  if (f.out) c.out = *f.out;
  if (f.signal) c.signal = *f.signal;
  if (f.graph) c.graph = *f.graph;
  return c;
}

int cmd_train(const RunConfig& cfg) {
  cfg.validate();
  Workspace ws = prepare(cfg, std::nullopt);
  fs::create_directories(cfg.out);
  const auto result = train::train(*ws.model, ws.splits.train, ws.splits.val, cfg.training);
  nn::save_checkpoint(cfg.out / "checkpoint.gtck", ws.model->params());
  train::write_history_csv(cfg.out / "history.csv", result.history);
  write_json(cfg.out / "config.json", cfg.to_json());
  std::cout << "trained " << result.history.size() << " epochs (best " << result.best_epoch << ")"
            << (result.early_stopped ? ", early stopped" : "") << "; artifacts in " << cfg.out.string() << '\n';
  return kExitOk;
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const long long v = std::stoll(item);
      if (v < 1) throw std::out_of_range("k");
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      fail(ErrorKind::kInvalidArgument, "bad k value '" + item + "'");
    }
  }
  return ks;
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint, const std::string& ks_text,
             const std::string& convention, const std::string& split) {
  cfg.validate();
  if (convention != "standard" && convention != "paper") {
    fail(ErrorKind::kInvalidArgument, "--fidelity-convention must be 'standard' or 'paper'");
  }
  Workspace ws = prepare(cfg, fs::path(checkpoint));
  const auto& samples = pick_split(ws, split);
  const std::uint64_t seed = cfg.training.seed;
  const auto ks = parse_ks(ks_text);
  for (auto k : ks) {
    if (k > ws.model->config().n_nodes) {
      fail(ErrorKind::kInvalidArgument, "k=" + std::to_string(k) + " exceeds N=" + std::to_string(ws.model->config().n_nodes));
    }
  }
  fs::create_directories(cfg.out);
  const auto report = eval::evaluate_forecasts(*ws.model, samples, seed);
  eval::write_metrics_json(cfg.out / "metrics.json", report);
  write_forecasts(cfg.out / "forecast.csv", *ws.model, samples, seed);
  if (!ks.empty()) {
    const auto curve = eval::sparsity_sweep(*ws.model, samples, ks, seed);
    for (const auto& w : curve.warnings) std::cerr << "warning: " << w << '\n';
    eval::write_fidelity_csv(cfg.out / "fidelity.csv", curve,
                             convention == "paper" ? eval::FidelityConvention::kSwapped : eval::FidelityConvention::kStandard);
  }
  std::cout << "MAE " << report.mae << "  RMSE " << report.rmse << "  MAPE ";
  if (report.mape_percent) {
    std::cout << *report.mape_percent << "%";
  } else {
    std::cout << "n/a";
  }
  std::cout << "  (" << report.n_evaluated << " targets)\n";
  return kExitOk;
}

int cmd_explain(const RunConfig& cfg, const std::string& checkpoint, std::size_t k, const std::string& split) {
  cfg.validate();
  Workspace ws = prepare(cfg, fs::path(checkpoint));
  const std::size_t n = ws.model->config().n_nodes;
  if (k < 1 || k > n) fail(ErrorKind::kInvalidArgument, "k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  fs::create_directories(cfg.out);
  const auto rows = interpret::explain(*ws.model, pick_split(ws, split), k, cfg.training.seed);
  interpret::write_explanations_csv(cfg.out / "explanations.csv", rows, ws.model->graph());
  const auto grounding = interpret::nearest_training_subgraph(*ws.model, ws.splits.train, k, cfg.training.seed);
  interpret::write_prototype_report(cfg.out / "prototypes.json", grounding, ws.model->graph());
  std::cout << "wrote " << rows.size() << " explanation rows and " << grounding.size() << " prototype groundings\n";
  return kExitOk;
}

int cmd_report(const RunConfig& cfg, const std::string& checkpoint, std::size_t k) {
  cfg.validate();
  Workspace ws = prepare(cfg, fs::path(checkpoint));
  const std::size_t n = ws.model->config().n_nodes;
  if (k < 1 || k > n) fail(ErrorKind::kInvalidArgument, "k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  fs::create_directories(cfg.out);
  const auto grounding = interpret::nearest_training_subgraph(*ws.model, ws.splits.train, k, cfg.training.seed);
  interpret::write_prototype_report(cfg.out / "prototypes.json", grounding, ws.model->graph());
  for (const auto& g : grounding) {
    std::cout << "prototype " << g.prototype << " (class " << g.pseudo_class << ", |v|=" << g.norm
              << "): window " << g.window_start << ", gamma " << g.gamma << ", nodes";
    for (auto node : g.nodes) std::cout << ' ' << ws.model->graph().node_ids[node];
    std::cout << '\n';
  }
  return kExitOk;
}

struct SynthFlags {
  std::size_t nodes = 20;
  std::size_t informative = 5;
  double noise = 0.1;
  std::size_t window = 8;
  std::size_t horizon = 4;
  std::size_t steps = 3000;
  std::uint64_t seed = 0;
  std::string out = "synth";
};

int cmd_synth(const SynthFlags& f) {
  require(f.nodes >= 2, "--nodes must be >= 2");
  require(f.informative >= 1 && f.informative < f.nodes, "--informative must lie in [1, nodes)");
  require(f.noise >= 0.0, "--noise must be >= 0");
  require(f.window >= 1 && f.horizon >= 1, "--window and --horizon must be >= 1");
  require(f.steps >= f.window + f.horizon, "--steps must hold at least one window plus horizon");
  data::PlantedSpec spec;
  spec.n_nodes = f.nodes;
  spec.informative_set = data::random_informative_set(f.nodes, f.informative, f.seed);
  spec.noise_sigma = f.noise;
  spec.window = f.window;
  spec.horizon = f.horizon;
  spec.n_steps = f.steps;
  spec.seed = f.seed;
  const auto ds = data::generate_synthetic(spec);

  const fs::path out(f.out);
  fs::create_directories(out);
  data::write_signal(out / "signal.bin", ds.signal);
  data::write_graph(out / "graph.csv", ds.graph);
  data::write_meta(out / "meta.json", ds.graph);
  write_json(out / "truth.json", json{{"informative_nodes", ds.ground_truth},
                                      {"noise_sigma", f.noise},
                                      {"window", f.window},
                                      {"horizon", f.horizon},
                                      {"seed", f.seed}});
  // Starter run configuration: windows aligned to the planted episodes.
  write_json(out / "run.json", json{{"signal", "signal.bin"},
                                    {"graph", "graph.csv"},
                                    {"meta", "meta.json"},
                                    {"window", f.window},
                                    {"horizon", f.horizon},
                                    {"stride", spec.episode_length()},
                                    {"hidden_dim", 16},
                                    {"dilations", {1, 2}},
                                    {"seed", f.seed},
                                    {"out", "run"}});
  std::cout << "wrote synthetic dataset (N=" << f.nodes << ", informative";
  for (auto i : ds.ground_truth) std::cout << ' ' << i;
  std::cout << ") to " << out.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Interpretable temporal graph regression: train, evaluate and explain"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint, history and resolved config");
  add_common(train_cmd, train_flags);
  train_cmd->add_option("--epochs", epochs, "Override the epoch count");
  train_cmd->add_option("--lr", lr, "Override the learning rate");

  CommonFlags eval_flags;
  std::string eval_ckpt, ks_text, convention = "standard", eval_split = "test";
  auto* eval_cmd = app.add_subcommand("eval", "Forecast metrics and fidelity/sparsity curve");
  add_common(eval_cmd, eval_flags);
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
  eval_cmd->add_option("--ks", ks_text, "Comma-separated sparsity levels; empty skips fidelity");
  eval_cmd->add_option("--fidelity-convention", convention, "standard or paper");
  eval_cmd->add_option("--split", eval_split, "train, val or test");

  CommonFlags explain_flags;
  std::string explain_ckpt, explain_split = "test";
  std::size_t explain_k = 5;
  auto* explain_cmd = app.add_subcommand("explain", "Per-window top-k nodes and prototype grounding");
  add_common(explain_cmd, explain_flags);
  explain_cmd->add_option("--checkpoint", explain_ckpt, "Checkpoint file")->required();
  explain_cmd->add_option("--k", explain_k, "Nodes per explanation");
  explain_cmd->add_option("--split", explain_split, "train, val or test");

  CommonFlags report_flags;
  std::string report_ckpt;
  std::size_t report_k = 5;
  auto* report_cmd = app.add_subcommand("report", "Prototype grounding report");
  add_common(report_cmd, report_flags);
  report_cmd->add_option("--checkpoint", report_ckpt, "Checkpoint file")->required();
  report_cmd->add_option("--k", report_k, "Nodes per grounded subgraph");

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a planted-subgraph dataset");
  synth_cmd->add_option("--nodes", synth.nodes, "Node count");
  synth_cmd->add_option("--informative", synth.informative, "Informative node count");
  synth_cmd->add_option("--noise", synth.noise, "Target noise sigma");
  synth_cmd->add_option("--window", synth.window, "Input window W");
  synth_cmd->add_option("--horizon", synth.horizon, "Forecast horizon T'");
  synth_cmd->add_option("--steps", synth.steps, "Total time steps");
  synth_cmd->add_option("--seed", synth.seed, "Seed");
  synth_cmd->add_option("--out", synth.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) {
      RunConfig cfg = load_config(train_flags);
      if (epochs) cfg.training.epochs = *epochs;
      if (lr) cfg.training.learning_rate = *lr;
      return cmd_train(cfg);
    }
    if (*eval_cmd) return cmd_eval(load_config(eval_flags), eval_ckpt, ks_text, convention, eval_split);
    if (*explain_cmd) return cmd_explain(load_config(explain_flags), explain_ckpt, explain_k, explain_split);
    if (*report_cmd) return cmd_report(load_config(report_flags), report_ckpt, report_k);
    if (*synth_cmd) return cmd_synth(synth);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::kNumeric ? kExitNumeric : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gintrip::cli
