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

// Core data model: 26-joint hand poses, timestamped frames, gesture labels
// and the inclusive frame intervals used for annotations and predictions.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gesturespot {

inline constexpr int kNumJoints = 26;
inline constexpr int kNumGestureClasses = 16;
inline constexpr int kNumLabels = 17;  // 16 gestures + background

using Vec3 = Eigen::Vector3d;
using Pose = std::array<Vec3, kNumJoints>;

enum class ErrorKind { kInvalidArgument, kParse, kIo, kValidation, kNumeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Class indices 0..15 are gestures in dictionary order, 16 is background.
enum class Label : std::uint8_t {
  kOne = 0,
  kTwo,
  kThree,
  kFour,
  kOk,
  kMenu,
  kLeft,
  kRight,
  kCircle,
  kV,
  kCross,
  kGrab,
  kPinch,
  kDeny,
  kWave,
  kKnob,
  kNonGesture,
};

enum class Category { kStatic, kCoarse, kFine, kPeriodic, kBackground };

inline constexpr int index_of(Label l) { return static_cast<int>(l); }
Label label_from_index(int index);
bool is_gesture(Label l);
Category category_of(Label l);
std::string_view label_name(Label l);
std::optional<Label> parse_label(std::string_view name);
std::string_view category_name(Category c);

// Frames are addressed by 0-based index; intervals are inclusive.
struct GestureInterval {
  Label label = Label::kOne;
  int start = 0;
  int end = 0;
  std::optional<int> last_frame_used;

  int length() const { return end - start + 1; }
  bool operator==(const GestureInterval&) const = default;
};

int overlap_frames(int a_start, int a_end, int b_start, int b_end);
int overlap_frames(const GestureInterval& a, const GestureInterval& b);
double interval_iou(int a_start, int a_end, int b_start, int b_end);

struct FrameRange {
  int first = 0;
  int last = 0;  // inclusive
  int size() const { return last - first + 1; }
};

struct SkeletonFrame {
  std::int64_t timestamp_ms = 0;
  Pose joints{};
};

struct GestureSequence {
  std::string id;
  std::vector<SkeletonFrame> frames;

  int size() const { return static_cast<int>(frames.size()); }
  const Pose& pose(int t) const { return frames[static_cast<std::size_t>(t)].joints; }
};

using IntervalMap = std::map<std::string, std::vector<GestureInterval>>;

// Throws kValidation when a frame has non-finite coordinates or timestamps do
// not strictly increase.
void validate_sequence(const GestureSequence& seq);
// Intervals must be in range, carry gesture labels and (for ground truth)
// not overlap one another.
void validate_annotations(std::span<const GestureInterval> intervals, int sequence_length,
                          bool allow_overlap);

// Parent array of the joint tree; -1 marks the root. The default follows the
// Hololens 2 joint order: palm, wrist, 4 thumb joints, then metacarpal,
// proximal, intermediate, distal, tip for index, middle, ring and little.
struct Topology {
  std::array<int, kNumJoints> parent{};
  static Topology hololens();
  int root() const;
  // Child joints in increasing index order; segment s goes parent -> child.
  std::vector<int> segment_children() const;
};

namespace joint {
inline constexpr int kPalm = 0;
inline constexpr int kWrist = 1;
inline constexpr int kThumbMetacarpal = 2;
inline constexpr int kThumbTip = 5;
inline constexpr int kIndexMetacarpal = 6;
inline constexpr int kIndexTip = 10;
inline constexpr int kMiddleTip = 15;
inline constexpr int kRingTip = 20;
inline constexpr int kLittleMetacarpal = 21;
inline constexpr int kLittleTip = 25;
}  // namespace joint

// Uniformly resamples frames [range.first, range.last] to `target` poses by
// linear interpolation in frame-index space. Endpoints are reproduced exactly.
std::vector<Pose> resample_uniform(const GestureSequence& seq, FrameRange range, int target);
std::vector<Pose> resample_uniform(std::span<const Pose> poses, int target);

}  // namespace gesturespot
