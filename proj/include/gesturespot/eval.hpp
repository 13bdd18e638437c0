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

// Detection scoring: matching, detection rate, false-positive score, Jaccard
// index and latency, per class, per category and in aggregate.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gesturespot/skeleton.hpp"

namespace gesturespot {

enum class MatchStatus { kCorrect, kFalsePositive, kDiscarded };

std::string_view match_status_name(MatchStatus s);

struct MatchResult {
  std::vector<int> gt_match;            // per gt: index of its CORRECT prediction, or -1 (missed)
  std::vector<MatchStatus> status;      // per prediction
  std::vector<int> target;              // per prediction: gt index when CORRECT, else -1
  std::vector<bool> duplicate;          // DISCARDED only because its gt was already taken
  int duplicates = 0;
};

// p qualifies for g iff labels agree and |p ∩ g| > min_overlap * |g|.
bool qualifies(const GestureInterval& p, const GestureInterval& g, double min_overlap);

// Predictions are visited in decision order (last_frame_used, then start,
// then input order). Each picks the gt it covers best (largest |p ∩ g| / |g|,
// earliest on ties) among those it qualifies for; the first prediction to
// pick a gt is CORRECT, later ones are DISCARDED duplicates. Predictions that
// intersect some gt but qualify for none are DISCARDED; predictions that
// intersect no gt are FALSE_POSITIVE. Throws kValidation on overlapping gt.
MatchResult match_detections(std::span<const GestureInterval> gt, std::span<const GestureInterval> preds,
                             double min_overlap = 0.5);

// Frame-set Jaccard index of one class in one sequence; nullopt when both
// sets are empty.
std::optional<double> sequence_jaccard(std::span<const GestureInterval> gt, std::span<const GestureInterval> preds,
                                       Label label);

struct ClassMetrics {
  int gt_count = 0;
  int predictions = 0;
  int correct = 0;
  int false_positives = 0;
  int discarded = 0;
  int duplicates = 0;
  int delay_samples = 0;
  std::optional<double> detection_rate;
  std::optional<double> fp_score;
  std::optional<double> jaccard;
  std::optional<double> delay_from_start;
  std::optional<double> delay_from_end;
};

// Unweighted mean over the classes where each metric is defined.
struct Summary {
  int classes = 0;
  std::optional<double> detection_rate;
  std::optional<double> fp_score;
  std::optional<double> jaccard;
  std::optional<double> delay_from_start;
  std::optional<double> delay_from_end;
};

struct EvalReport {
  double min_overlap = 0.5;
  std::array<ClassMetrics, kNumGestureClasses> classes;
  std::array<Summary, 4> categories;  // static, coarse, fine, periodic
  Summary aggregate;
  std::vector<std::string> warnings;

  std::string to_csv() const;
  std::string to_table() const;
};

// Sequences are the union of ids in both maps; a missing side is empty.
EvalReport evaluate(const IntervalMap& gt, const IntervalMap& preds, double min_overlap = 0.5);

struct SweepPoint {
  double threshold = 0.0;
  double detection_rate = 0.0;
};

// Aggregate detection rate per threshold. Thresholds must lie in [0, 1] and
// be sorted ascending.
std::vector<SweepPoint> overlap_sweep(const IntervalMap& gt, const IntervalMap& preds,
                                      std::span<const double> thresholds);
std::string sweep_to_csv(std::span<const SweepPoint> points);

}  // namespace gesturespot
