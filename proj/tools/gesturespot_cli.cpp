// Copyright 2026 The gesturespot Authors
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

// gesturespot command-line tool: gen, train, detect, eval, sweep, features.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gesturespot/gesturespot.h"

namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(gs_status s, const std::string& what) {
  if (s != GS_OK) throw Failure(what + ": " + gs_status_name(s) + ": " + gs_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<gs_config, Deleter<gs_config, gs_config_free>>;
using DatasetPtr = std::unique_ptr<gs_dataset, Deleter<gs_dataset, gs_dataset_free>>;
using ModelPtr = std::unique_ptr<gs_model, Deleter<gs_model, gs_model_free>>;
using PredictionsPtr = std::unique_ptr<gs_predictions, Deleter<gs_predictions, gs_predictions_free>>;
using ReportPtr = std::unique_ptr<gs_report, Deleter<gs_report, gs_report_free>>;

// A flag bound to a configuration key.
struct KeyFlag {
  std::string key;
  std::optional<std::string> value;
};

struct Command {
  CLI::App* app = nullptr;
  std::string out;
  std::string config_path;
  std::vector<std::string> params;  // key=value
  std::vector<std::unique_ptr<KeyFlag>> flags;

  void bind(const std::string& flag, const std::string& key, const std::string& help) {
    flags.push_back(std::make_unique<KeyFlag>(KeyFlag{key, std::nullopt}));
    app->add_option(flag, flags.back()->value, help + " (" + key + ")");
  }
};

Command& add_command(CLI::App& root, std::vector<std::unique_ptr<Command>>& cmds, const std::string& name,
                     const std::string& help) {
  cmds.push_back(std::make_unique<Command>());
  Command& c = *cmds.back();
  c.app = root.add_subcommand(name, help);
  c.app->add_option("--out", c.out, "Output directory")->required();
  c.app->add_option("--config", c.config_path, "Configuration file (key = value)")->check(CLI::ExistingFile);
  c.app->add_option("--param", c.params, "Override a configuration key (key=value), repeatable");
  return c;
}

// Defaults, then `base` (if any), then the file, then --param, then flags.
ConfigPtr effective_config(const Command& c, gs_config* base = nullptr) {
  gs_config* raw = base;
  if (!raw) check(gs_config_create(&raw), "config");
  ConfigPtr cfg(raw);
  if (!c.config_path.empty()) check(gs_config_load_file(cfg.get(), c.config_path.c_str()), c.config_path);
  for (const auto& p : c.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw Failure("--param expects key=value, got '" + p + "'");
    check(gs_config_set(cfg.get(), p.substr(0, eq).c_str(), p.substr(eq + 1).c_str()), "--param " + p);
  }
  for (const auto& f : c.flags)
    if (f->value) check(gs_config_set(cfg.get(), f->key.c_str(), f->value->c_str()), "flag for " + f->key);
  return cfg;
}

fs::path prepare_out(const Command& c, const gs_config* cfg) {
  fs::path out(c.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Failure("cannot create " + out.string() + ": " + ec.message());
  check(gs_config_write_file(cfg, (out / "config.txt").c_str()), "config.txt");
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Failure("cannot write " + path.string());
}

std::string config_value(const gs_config* cfg, const char* key) {
  size_t needed = 0;
  check(gs_config_get(cfg, key, nullptr, 0, &needed), key);
  std::string v(needed, '\0');
  check(gs_config_get(cfg, key, v.data(), v.size(), &needed), key);
  v.resize(needed - 1);
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  return v;
}

DatasetPtr load_dataset(const std::string& dir) {
  gs_dataset* d = nullptr;
  check(gs_dataset_load(dir.c_str(), &d), dir);
  return DatasetPtr(d);
}

PredictionsPtr load_predictions(const std::string& path, const gs_dataset* truth, bool oracle) {
  gs_predictions* p = nullptr;
  if (oracle)
    check(gs_predictions_from_dataset(truth, &p), "oracle predictions");
  else
    check(gs_predictions_load(path.c_str(), &p), path);
  return PredictionsPtr(p);
}

std::string format_timing(const gs_timing& t) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "steps=%zu mean_ms=%.6f p50_ms=%.6f p95_ms=%.6f max_ms=%.6f\n", t.steps, t.mean_ms,
                t.p50_ms, t.p95_ms, t.max_ms);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online hand-gesture spotting on skeleton streams"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gs_version());
  std::vector<std::unique_ptr<Command>> cmds;

  auto& gen = add_command(app, cmds, "gen", "Generate a synthetic annotated dataset");
  gen.bind("--seed", "gen.seed", "Generator seed");
  gen.bind("--sequences", "gen.sequences", "Number of sequences");
  gen.bind("--fps", "gen.fps", "Frame rate");
  gen.bind("--noise", "gen.noise", "Joint noise standard deviation");

  std::string train_data;
  auto& train = add_command(app, cmds, "train", "Train a detection model");
  train.app->add_option("--data", train_data, "Dataset directory")->required();
  train.bind("--strategy", "train.strategy", "voting, fsm, proposal or baseline");
  train.bind("--features", "train.features", "Feature set");
  train.bind("--seed", "train.seed", "Training seed");
  train.bind("--epochs", "train.epochs", "Epochs per fold");
  train.bind("--folds", "train.folds", "Folds (ensemble size)");
  train.bind("--window", "train.window", "Window length");
  train.bind("--jobs", "train.jobs", "Worker threads");

  std::string detect_data, detect_model;
  auto& detect = add_command(app, cmds, "detect", "Detect gestures in a dataset");
  detect.app->add_option("--data", detect_data, "Dataset directory")->required();
  detect.app->add_option("--model", detect_model, "Model file")->required()->check(CLI::ExistingFile);
  detect.bind("--min-chunk", "detect.min_chunk", "Minimum chunk length");
  detect.bind("--fsm-wi", "detect.fsm_wi", "Gesture frames confirming a start");
  detect.bind("--fsm-we", "detect.fsm_we", "Background frames confirming an end");

  std::string eval_data, eval_preds;
  bool eval_oracle = false;
  auto& eval = add_command(app, cmds, "eval", "Score predictions against annotations");
  eval.app->add_option("--data", eval_data, "Dataset directory")->required();
  auto* eval_pred_opt = eval.app->add_option("--predictions", eval_preds, "Prediction file");
  auto* eval_oracle_opt = eval.app->add_flag("--oracle", eval_oracle, "Use the annotations as predictions");
  eval_pred_opt->excludes(eval_oracle_opt);
  eval.bind("--min-overlap", "eval.min_overlap", "Minimum overlap ratio");

  std::string sweep_data, sweep_preds;
  bool sweep_oracle = false;
  auto& sweep = add_command(app, cmds, "sweep", "Detection rate against the minimum overlap ratio");
  sweep.app->add_option("--data", sweep_data, "Dataset directory")->required();
  auto* sweep_pred_opt = sweep.app->add_option("--predictions", sweep_preds, "Prediction file");
  auto* sweep_oracle_opt = sweep.app->add_flag("--oracle", sweep_oracle, "Use the annotations as predictions");
  sweep_pred_opt->excludes(sweep_oracle_opt);
  sweep.bind("--thresholds", "sweep.thresholds", "Comma-separated thresholds");

  std::string feat_data, feat_seq;
  auto& features = add_command(app, cmds, "features", "Dump per-frame features of one sequence");
  features.app->add_option("--data", feat_data, "Dataset directory")->required();
  features.app->add_option("--sequence", feat_seq, "Sequence id")->required();
  features.bind("--features", "train.features", "Feature set");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  if (eval.app->parsed() && eval_preds.empty() && !eval_oracle) {
    std::cerr << "error: eval needs --predictions or --oracle\n\n" << eval.app->help();
    return 2;
  }
  if (sweep.app->parsed() && sweep_preds.empty() && !sweep_oracle) {
    std::cerr << "error: sweep needs --predictions or --oracle\n\n" << sweep.app->help();
    return 2;
  }

  try {
    if (gen.app->parsed()) {
      auto cfg = effective_config(gen);
      gs_dataset* raw = nullptr;
      check(gs_dataset_generate(cfg.get(), &raw), "generate");
      DatasetPtr ds(raw);
      const auto out = prepare_out(gen, cfg.get());
      check(gs_dataset_save(ds.get(), out.c_str()), "save dataset");
      std::cout << "wrote " << gs_dataset_size(ds.get()) << " sequences to " << out.string() << "\n";
    } else if (train.app->parsed()) {
      auto cfg = effective_config(train);
      auto ds = load_dataset(train_data);
      const auto out = prepare_out(train, cfg.get());
      gs_model* raw = nullptr;
      check(gs_model_train(ds.get(), cfg.get(), &raw), "train");
      ModelPtr model(raw);
      check(gs_model_save(model.get(), (out / "model.txt").c_str()), "model.txt");
      check(gs_model_write_curve(model.get(), (out / "curve.csv").c_str()), "curve.csv");
      write_file(out / "train_log.txt", gs_model_log(model.get()));
      std::cout << "trained " << gs_model_parameter_count(model.get()) << " parameters; model written to "
                << (out / "model.txt").string() << "\n";
    } else if (detect.app->parsed()) {
      gs_model* raw = nullptr;
      check(gs_model_load(detect_model.c_str(), &raw), detect_model);
      ModelPtr model(raw);
      gs_config* base = nullptr;
      check(gs_model_config(model.get(), &base), "model configuration");
      auto cfg = effective_config(detect, base);
      auto ds = load_dataset(detect_data);
      const auto out = prepare_out(detect, cfg.get());
      gs_predictions* praw = nullptr;
      gs_timing timing{};
      check(gs_detect(model.get(), ds.get(), cfg.get(), &praw, &timing), "detect");
      PredictionsPtr preds(praw);
      check(gs_predictions_save(preds.get(), (out / "predictions.txt").c_str()), "predictions.txt");
      const auto t = format_timing(timing);
      write_file(out / "timing.txt", t);
      std::cout << gs_predictions_count(preds.get()) << " predictions\n" << t;
    } else if (eval.app->parsed()) {
      auto cfg = effective_config(eval);
      auto ds = load_dataset(eval_data);
      auto preds = load_predictions(eval_preds, ds.get(), eval_oracle);
      const auto out = prepare_out(eval, cfg.get());
      gs_report* raw = nullptr;
      check(gs_evaluate(ds.get(), preds.get(), std::stod(config_value(cfg.get(), "eval.min_overlap")), &raw),
            "evaluate");
      ReportPtr report(raw);
      check(gs_report_write_csv(report.get(), (out / "report.csv").c_str()), "report.csv");
      std::cout << gs_report_to_string(report.get());
    } else if (sweep.app->parsed()) {
      auto cfg = effective_config(sweep);
      auto ds = load_dataset(sweep_data);
      auto preds = load_predictions(sweep_preds, ds.get(), sweep_oracle);
      const auto out = prepare_out(sweep, cfg.get());
      const auto th = parse_list(config_value(cfg.get(), "sweep.thresholds"));
      check(gs_sweep_write_csv(ds.get(), preds.get(), th.data(), th.size(), (out / "sweep.csv").c_str()),
            "sweep");
      std::cout << "wrote " << (out / "sweep.csv").string() << "\n";
    } else if (features.app->parsed()) {
      auto cfg = effective_config(features);
      auto ds = load_dataset(feat_data);
      const auto out = prepare_out(features, cfg.get());
      const auto set = config_value(cfg.get(), "train.features");
      check(gs_features_dump(ds.get(), feat_seq.c_str(), set.c_str(), (out / "features.csv").c_str()), "features");
      std::cout << "wrote " << (out / "features.csv").string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
