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

#include "gesturespot/skeleton.hpp"

#include <algorithm>
#include <cmath>

namespace gesturespot {

namespace {

constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "ONE",  "TWO",   "THREE", "FOUR",  "OK",    "MENU", "LEFT", "RIGHT",      "CIRCLE",
    "V",    "CROSS", "GRAB",  "PINCH", "DENY",  "WAVE", "KNOB", "NON_GESTURE",
};

}  // namespace

Label label_from_index(int index) {
  if (index < 0 || index >= kNumLabels)
    throw Error(ErrorKind::kInvalidArgument, "label index out of range: " + std::to_string(index));
  return static_cast<Label>(index);
}

bool is_gesture(Label l) { return l != Label::kNonGesture; }

Category category_of(Label l) {
  const int i = index_of(l);
  if (i <= index_of(Label::kMenu)) return Category::kStatic;
  if (i <= index_of(Label::kCross)) return Category::kCoarse;
  if (i <= index_of(Label::kPinch)) return Category::kFine;
  if (i <= index_of(Label::kKnob)) return Category::kPeriodic;
  return Category::kBackground;
}

std::string_view label_name(Label l) { return kLabelNames[static_cast<std::size_t>(l)]; }

std::optional<Label> parse_label(std::string_view name) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i)
    if (kLabelNames[i] == name) return static_cast<Label>(i);
  return std::nullopt;
}

std::string_view category_name(Category c) {
  switch (c) {
    case Category::kStatic: return "static";
    case Category::kCoarse: return "coarse";
    case Category::kFine: return "fine";
    case Category::kPeriodic: return "periodic";
    case Category::kBackground: return "background";
  }
  return "?";
}

int overlap_frames(int a_start, int a_end, int b_start, int b_end) {
  return std::max(0, std::min(a_end, b_end) - std::max(a_start, b_start) + 1);
}

int overlap_frames(const GestureInterval& a, const GestureInterval& b) {
  return overlap_frames(a.start, a.end, b.start, b.end);
}

double interval_iou(int a_start, int a_end, int b_start, int b_end) {
  const int inter = overlap_frames(a_start, a_end, b_start, b_end);
  const int uni = (a_end - a_start + 1) + (b_end - b_start + 1) - inter;
  return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

void validate_sequence(const GestureSequence& seq) {
  if (seq.frames.empty()) throw Error(ErrorKind::kValidation, "sequence '" + seq.id + "' is empty");
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const auto& f = seq.frames[t];
    if (t > 0 && f.timestamp_ms <= seq.frames[t - 1].timestamp_ms)
      throw Error(ErrorKind::kValidation, "sequence '" + seq.id + "': timestamp not increasing at frame " +
                                              std::to_string(t));
    if (f.timestamp_ms < 0)
      throw Error(ErrorKind::kValidation, "sequence '" + seq.id + "': negative timestamp");
    for (const auto& j : f.joints)
      if (!j.allFinite())
        throw Error(ErrorKind::kValidation, "sequence '" + seq.id + "': non-finite coordinate at frame " +
                                                std::to_string(t));
  }
}

void validate_annotations(std::span<const GestureInterval> intervals, int sequence_length,
                          bool allow_overlap) {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& g = intervals[i];
    if (!is_gesture(g.label)) throw Error(ErrorKind::kValidation, "interval labeled NON_GESTURE");
    if (g.start < 0 || g.end < g.start)
      throw Error(ErrorKind::kValidation, "inverted or negative interval [" + std::to_string(g.start) + ", " +
                                              std::to_string(g.end) + "]");
    if (sequence_length >= 0 && g.end >= sequence_length)
      throw Error(ErrorKind::kValidation, "interval end " + std::to_string(g.end) +
                                              " beyond sequence length " + std::to_string(sequence_length));
    if (!allow_overlap)
      for (std::size_t k = 0; k < i; ++k)
        if (overlap_frames(g, intervals[k]) > 0)
          throw Error(ErrorKind::kValidation, "overlapping ground-truth intervals");
  }
}

Topology Topology::hololens() {
  Topology t;
  t.parent[joint::kPalm] = joint::kWrist;
  t.parent[joint::kWrist] = -1;
  t.parent[2] = joint::kWrist;
  t.parent[3] = 2;
  t.parent[4] = 3;
  t.parent[5] = 4;
  for (int finger = 0; finger < 4; ++finger) {
    const int base = 6 + 5 * finger;
    t.parent[base] = joint::kWrist;
    for (int k = 1; k < 5; ++k) t.parent[base + k] = base + k - 1;
  }
  return t;
}

int Topology::root() const {
  for (int j = 0; j < kNumJoints; ++j)
    if (parent[j] < 0) return j;
  throw Error(ErrorKind::kValidation, "topology has no root");
}

std::vector<int> Topology::segment_children() const {
  std::vector<int> out;
  for (int j = 0; j < kNumJoints; ++j) {
    if (parent[j] >= kNumJoints) throw Error(ErrorKind::kValidation, "topology parent out of range");
    if (parent[j] >= 0) out.push_back(j);
  }
  if (out.size() != kNumJoints - 1)
    throw Error(ErrorKind::kValidation, "topology must have exactly one root");
  return out;
}

std::vector<Pose> resample_uniform(std::span<const Pose> poses, int target) {
  if (poses.empty()) throw Error(ErrorKind::kInvalidArgument, "resample: empty slice");
  if (target < 2) throw Error(ErrorKind::kInvalidArgument, "resample: target must be >= 2");
  std::vector<Pose> out(static_cast<std::size_t>(target));
  const int last = static_cast<int>(poses.size()) - 1;
  for (int i = 0; i < target; ++i) {
    if (i == 0 || last == 0) {
      out[i] = poses.front();
      continue;
    }
    if (i == target - 1) {
      out[i] = poses.back();
      continue;
    }
    const double u = static_cast<double>(i) * last / (target - 1);
    const int lo = std::min(static_cast<int>(std::floor(u)), last - 1);
    const double a = u - lo;
    for (int j = 0; j < kNumJoints; ++j) out[i][j] = (1.0 - a) * poses[lo][j] + a * poses[lo + 1][j];
  }
  return out;
}

std::vector<Pose> resample_uniform(const GestureSequence& seq, FrameRange range, int target) {
  if (range.first < 0 || range.last >= seq.size() || range.last < range.first)
    throw Error(ErrorKind::kInvalidArgument, "resample: empty or out-of-range slice");
  std::vector<Pose> slice;
  slice.reserve(static_cast<std::size_t>(range.size()));
  for (int t = range.first; t <= range.last; ++t) slice.push_back(seq.pose(t));
  return resample_uniform(slice, target);
}

}  // namespace gesturespot
