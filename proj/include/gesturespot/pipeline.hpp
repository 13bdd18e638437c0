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

// Dataset-level training and detection for every strategy.

#include <string>
#include <vector>

#include "gesturespot/config.hpp"
#include "gesturespot/detect.hpp"
#include "gesturespot/io.hpp"
#include "gesturespot/model_io.hpp"

namespace gesturespot {

ModelBundle train_model(const Dataset& data, const RunConfig& config, std::vector<std::string>* log = nullptr);

// role,fold,batch,train_loss,val_accuracy
std::string training_curve_csv(const ModelBundle& model);

struct DetectResult {
  IntervalMap predictions;  // one entry per input sequence
  StepTiming timing;
  std::vector<std::string> warnings;
};

DetectResult detect_sequence_set(const Dataset& data, const ModelBundle& model, const RunConfig& config);
std::vector<GestureInterval> detect_sequence(const GestureSequence& seq, const ModelBundle& model,
                                             const RunConfig& config, StepTiming* timing = nullptr,
                                             std::vector<std::string>* warnings = nullptr);

// Clamps to [0, length - 1], drops background and empty intervals, sorts by
// start and fills a missing last_frame_used with the end frame.
std::vector<GestureInterval> sanitize_predictions(std::vector<GestureInterval> preds, int length);

std::string timing_summary(const StepTiming& timing);

// One row per frame, header naming each column by feature block. Kinematic
// sets are normalized with statistics of `seq` itself.
std::string feature_dump_csv(const GestureSequence& seq, FeatureSet set);

}  // namespace gesturespot
