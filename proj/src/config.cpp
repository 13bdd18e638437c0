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

#include "gesturespot/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <limits>

#include "gesturespot/io.hpp"

namespace gesturespot {

namespace {

struct Entry {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

Error bad_value(std::string_view key, std::string_view value, std::string_view what) {
  return Error(ErrorKind::kInvalidArgument,
               "config key '" + std::string(key) + "': invalid value '" + std::string(value) + "' (" +
                   std::string(what) + ")");
}

template <class Ref>
Entry int_entry(std::string key, Ref ref) {
  return {key, [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref, key](RunConfig& c, std::string_view v) {
            long long x = 0;
            try {
              x = parse_integer(v);
            } catch (const Error&) {
              throw bad_value(key, v, "expected an integer");
            }
            if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
              throw bad_value(key, v, "out of range");
            ref(c) = static_cast<int>(x);
          }};
}

template <class Ref>
Entry seed_entry(std::string key, Ref ref) {
  return {key, [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref, key](RunConfig& c, std::string_view v) {
            std::uint64_t x = 0;
            const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
            if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size())
              throw bad_value(key, v, "expected a non-negative integer");
            ref(c) = x;
          }};
}

template <class Ref>
Entry double_entry(std::string key, Ref ref) {
  return {key, [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); },
          [ref, key](RunConfig& c, std::string_view v) {
            try {
              ref(c) = parse_double(v);
            } catch (const Error&) {
              throw bad_value(key, v, "expected a number");
            }
          }};
}

const std::vector<Entry>& table() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back(seed_entry("gen.seed", [](RunConfig& c) -> std::uint64_t& { return c.gen.seed; }));
    e.push_back(int_entry("gen.sequences", [](RunConfig& c) -> int& { return c.gen.sequences; }));
    e.push_back(int_entry("gen.min_gestures", [](RunConfig& c) -> int& { return c.gen.min_gestures; }));
    e.push_back(int_entry("gen.max_gestures", [](RunConfig& c) -> int& { return c.gen.max_gestures; }));
    e.push_back(int_entry("gen.gap_min", [](RunConfig& c) -> int& { return c.gen.gap_min; }));
    e.push_back(int_entry("gen.gap_max", [](RunConfig& c) -> int& { return c.gen.gap_max; }));
    e.push_back(double_entry("gen.fps", [](RunConfig& c) -> double& { return c.gen.fps; }));
    e.push_back(double_entry("gen.timestamp_jitter_ms", [](RunConfig& c) -> double& { return c.gen.timestamp_jitter_ms; }));
    e.push_back(double_entry("gen.noise", [](RunConfig& c) -> double& { return c.gen.noise; }));
    e.push_back(int_entry("gen.max_frames", [](RunConfig& c) -> int& { return c.gen.max_frames; }));

    e.push_back({"train.strategy", [](const RunConfig& c) { return std::string(strategy_name(c.strategy)); },
                 [](RunConfig& c, std::string_view v) { c.strategy = parse_strategy(v); }});
    e.push_back({"train.features", [](const RunConfig& c) { return std::string(feature_set_name(c.features)); },
                 [](RunConfig& c, std::string_view v) { c.features = parse_feature_set(v); }});
    e.push_back(seed_entry("train.seed", [](RunConfig& c) -> std::uint64_t& { return c.train.seed; }));
    e.push_back(int_entry("train.window", [](RunConfig& c) -> int& { return c.train.window; }));
    e.push_back(int_entry("train.batch", [](RunConfig& c) -> int& { return c.train.batch; }));
    e.push_back(int_entry("train.epochs", [](RunConfig& c) -> int& { return c.train.epochs; }));
    e.push_back(int_entry("train.folds", [](RunConfig& c) -> int& { return c.train.folds; }));
    e.push_back(double_entry("train.l2", [](RunConfig& c) -> double& { return c.train.l2; }));
    e.push_back(double_entry("train.learning_rate", [](RunConfig& c) -> double& { return c.train.learning_rate; }));
    e.push_back(double_entry("train.momentum", [](RunConfig& c) -> double& { return c.train.momentum; }));
    e.push_back(double_entry("train.ema_decay", [](RunConfig& c) -> double& { return c.train.ema_decay; }));
    e.push_back(double_entry("train.background_keep", [](RunConfig& c) -> double& { return c.train.background_keep; }));
    e.push_back(int_entry("train.eval_every", [](RunConfig& c) -> int& { return c.train.eval_every; }));
    e.push_back(int_entry("train.jobs", [](RunConfig& c) -> int& { return c.train.jobs; }));
    e.push_back(double_entry("train.leaky_slope", [](RunConfig& c) -> double& { return c.leaky_slope; }));
    e.push_back(int_entry("train.proposal_window", [](RunConfig& c) -> int& { return c.proposal_window; }));
    e.push_back(int_entry("train.large_window", [](RunConfig& c) -> int& { return c.large_window; }));
    e.push_back(double_entry("train.regression_weight", [](RunConfig& c) -> double& { return c.regression_weight; }));
    e.push_back(int_entry("train.baseline_steps", [](RunConfig& c) -> int& { return c.baseline_steps; }));
    e.push_back(int_entry("train.baseline_jitter", [](RunConfig& c) -> int& { return c.baseline_jitter; }));
    e.push_back({"train.threshold_mode",
                 [](const RunConfig& c) {
                   return std::string(c.threshold_mode == ThresholdMode::kPooled ? "pooled" : "per_class");
                 },
                 [](RunConfig& c, std::string_view v) {
                   if (v == "per_class")
                     c.threshold_mode = ThresholdMode::kPerClass;
                   else if (v == "pooled")
                     c.threshold_mode = ThresholdMode::kPooled;
                   else
                     throw bad_value("train.threshold_mode", v, "expected per_class or pooled");
                 }});

    e.push_back(int_entry("detect.fsm_buffer", [](RunConfig& c) -> int& { return c.fsm.buffer; }));
    e.push_back(int_entry("detect.fsm_wi", [](RunConfig& c) -> int& { return c.fsm.wi; }));
    e.push_back(int_entry("detect.fsm_we", [](RunConfig& c) -> int& { return c.fsm.we; }));
    e.push_back(int_entry("detect.min_chunk", [](RunConfig& c) -> int& { return c.min_chunk; }));
    e.push_back(int_entry("detect.window_min", [](RunConfig& c) -> int& { return c.variable_window.min_size; }));
    e.push_back(int_entry("detect.window_max", [](RunConfig& c) -> int& { return c.variable_window.max_size; }));
    e.push_back(int_entry("detect.window_step", [](RunConfig& c) -> int& { return c.variable_window.size_step; }));
    e.push_back(int_entry("detect.end_stride", [](RunConfig& c) -> int& { return c.variable_window.end_stride; }));

    e.push_back(double_entry("eval.min_overlap", [](RunConfig& c) -> double& { return c.min_overlap; }));
    e.push_back({"sweep.thresholds",
                 [](const RunConfig& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.sweep_thresholds.size(); ++i)
                     s += (i ? "," : "") + format_double(c.sweep_thresholds[i]);
                   return s;
                 },
                 [](RunConfig& c, std::string_view v) {
                   std::vector<double> t;
                   try {
                     for (auto f : split_fields(v)) t.push_back(parse_double(trim(f)));
                   } catch (const Error&) {
                     throw bad_value("sweep.thresholds", v, "expected comma-separated numbers");
                   }
                   if (t.empty()) throw bad_value("sweep.thresholds", v, "empty list");
                   c.sweep_thresholds = std::move(t);
                 }});
    return e;
  }();
  return entries;
}

const Entry& find(std::string_view key) {
  for (const auto& e : table())
    if (e.key == key) return e;
  throw Error(ErrorKind::kInvalidArgument, "unknown config key '" + std::string(key) + "'");
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) { find(key).set(*this, trim(value)); }

std::string RunConfig::get(std::string_view key) const { return find(key).get(*this); }

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> k;
  for (const auto& e : table()) k.push_back(e.key);
  return k;
}

void RunConfig::merge_text(std::string_view text) {
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::kParse, "config line " + std::to_string(line_no) + ": expected key=value");
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.kind(), "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig c;
  c.merge_text(text);
  return c;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& e : table()) out += e.key + '=' + e.get(*this) + '\n';
  return out;
}

void RunConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::kInvalidArgument, m); };
  gen.validate();
  train.validate();
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) bad("train.leaky_slope must lie in [0, 1)");
  if (proposal_window < 1) bad("train.proposal_window must be positive");
  if (large_window < 2) bad("train.large_window must be at least 2");
  if (!(regression_weight >= 0.0)) bad("train.regression_weight must be non-negative");
  if (baseline_steps < 2) bad("train.baseline_steps must be at least 2");
  if (baseline_jitter < 0) bad("train.baseline_jitter must be non-negative");
  if (fsm.buffer < 1 || fsm.wi < 1 || fsm.we < 1) bad("fsm parameters must be positive");
  if (min_chunk < 0) bad("detect.min_chunk must be non-negative");
  if (variable_window.min_size < 2 || variable_window.max_size < variable_window.min_size ||
      variable_window.size_step < 1 || variable_window.end_stride < 1)
    bad("invalid variable-window sizes");
  if (!(min_overlap >= 0.0 && min_overlap <= 1.0)) bad("eval.min_overlap must lie in [0, 1]");
  for (std::size_t i = 0; i < sweep_thresholds.size(); ++i)
    if (!(sweep_thresholds[i] >= 0.0 && sweep_thresholds[i] <= 1.0) ||
        (i > 0 && sweep_thresholds[i] < sweep_thresholds[i - 1]))
      bad("sweep.thresholds must be ascending values in [0, 1]");
}

}  // namespace gesturespot
