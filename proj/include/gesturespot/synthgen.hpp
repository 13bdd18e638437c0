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

// Synthetic annotated hand-skeleton streams.
//
// A parametric hand (finger curls, thumb opposition, orientation, position)
// is driven through background wandering and gesture-specific trajectories,
// then posed with forward kinematics. Coordinates are head-anchored with the
// hand roughly 0.4 m from the origin.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gesturespot/io.hpp"
#include "gesturespot/skeleton.hpp"

namespace gesturespot {

struct LengthRange {
  int min = 0;
  int max = 0;
};

// Per-class gesture lengths in frames.
std::array<LengthRange, kNumGestureClasses> default_gesture_lengths();

struct GenConfig {
  int sequences = 288;
  int min_gestures = 3;
  int max_gestures = 5;
  int gap_min = 40;  // background frames between gestures (and at both ends)
  int gap_max = 120;
  double fps = 20.0;
  double timestamp_jitter_ms = 5.0;
  double noise = 0.001;  // per-coordinate Gaussian sd, meters
  int max_frames = 0;    // 0 = no cap on sequence length
  std::uint64_t seed = 1;
  std::array<LengthRange, kNumGestureClasses> lengths = default_gesture_lengths();

  void validate() const;
};

// Parameters of the hand model.
struct HandState {
  std::array<double, 5> curl{};  // thumb, index, middle, ring, little; 0 = straight, 1 = fist
  double spread = 0.5;
  double opposition = 0.0;       // thumb swing across the palm
  double roll = 0.0;             // about the forward axis (z)
  double pitch = 0.0;            // about the lateral axis (x)
  double yaw = 0.0;              // about the finger axis, applied first
  Vec3 position = Vec3::Zero();  // wrist position
  double scale = 1.0;
};

HandState lerp(const HandState& a, const HandState& b, double u);
Pose pose_hand(const HandState& state);

// Hand state for gesture `label` at normalized time u in [0, 1]. `variant`
// holds per-instance randomization (amplitudes, offsets) drawn by the caller.
struct GestureVariant {
  double amplitude = 1.0;
  double roll_offset = 0.0;
  double pitch_offset = 0.0;
  int cycles = 2;
  Vec3 direction = Vec3::UnitX();
};
HandState gesture_state(Label label, double u, const HandState& anchor, const GestureVariant& variant);

struct GeneratedSequence {
  GestureSequence sequence;
  std::vector<GestureInterval> gestures;
  std::uint64_t seed = 0;
};

// One sequence holding the given gestures in order.
GeneratedSequence generate_sequence(const std::string& id, std::span<const Label> gestures, const GenConfig& config,
                                    std::uint64_t seed);

struct GeneratedDataset {
  Dataset data;
  std::vector<std::uint64_t> seeds;  // parallel to data.sequences
};

GeneratedDataset generate_dataset(const GenConfig& config);
// "id;seed;gesture count" per line.
std::string write_manifest(const GeneratedDataset& dataset);

// Concatenates (label, run length) pairs.
std::vector<Label> generate_label_stream(std::span<const std::pair<Label, int>> pattern);

}  // namespace gesturespot
