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

#pragma once

// Flat key=value run configuration. Keys are dotted (gen.seed, train.folds,
// detect.fsm_wi, ...); '#' starts a comment; unknown keys are rejected.

#include <string>
#include <string_view>
#include <vector>

#include "gesturespot/detect.hpp"
#include "gesturespot/model_io.hpp"
#include "gesturespot/synthgen.hpp"
#include "gesturespot/training.hpp"

namespace gesturespot {

struct RunConfig {
  GenConfig gen;

  Strategy strategy = Strategy::kVoting;
  FeatureSet features = FeatureSet::kAngles;
  TrainConfig train;
  double leaky_slope = 0.01;
  int proposal_window = 10;  // l
  int large_window = 80;     // L
  double regression_weight = 1.0;
  int baseline_steps = 30;
  int baseline_jitter = 4;   // jittered copies per gesture segment

  FsmConfig fsm;
  int min_chunk = 9;
  VariableWindowOptions variable_window;
  ThresholdMode threshold_mode = ThresholdMode::kPerClass;

  double min_overlap = 0.5;
  std::vector<double> sweep_thresholds = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  static std::vector<std::string> keys();

  // Applies every key=value line of `text` on top of the current values.
  void merge_text(std::string_view text);
  static RunConfig parse(std::string_view text);
  // All keys, one per line, in keys() order.
  std::string to_text() const;
  void validate() const;
};

}  // namespace gesturespot
