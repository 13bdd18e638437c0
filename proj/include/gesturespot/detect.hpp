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

// Online detection strategies. Each turns per-window classifier output into
// GestureIntervals that carry the last frame consumed when they were decided.
//
//   voting    every window votes for all frames it covers; a frame is
//             labeled once the n-th covering window reports (delay n - 1),
//             followed by chunk post-processing
//   fsm       four-state machine over per-frame labels
//   proposal  energy-triggered short windows, a tiny classifier, and a long
//             window classifier + interval regressor matched against it
//   baseline  variable-size windows resampled to a fixed length, accepted
//             against per-class probability thresholds

#include <array>
#include <chrono>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gesturespot/features.hpp"
#include "gesturespot/skeleton.hpp"
#include "gesturespot/training.hpp"

namespace gesturespot {

// Per-frame labels plus the frame at which each label was decided
// (-1: never finalized; such frames carry background).
struct LabelStream {
  std::vector<Label> labels;
  std::vector<int> last_used;
};

// ---------------------------------------------------------------- voting --

struct FrameVerdict {
  int frame = 0;
  Label label = Label::kNonGesture;
  int last_frame_used = 0;
};

class VoteAccumulator {
 public:
  explicit VoteAccumulator(int window);

  // Verdict of the window [window_end - n + 1, window_end]. Windows must
  // arrive in order starting at window_end = n - 1. Returns the verdict of
  // frame window_end - n + 1, which has now received every vote it will get.
  FrameVerdict push(int window_end, Label verdict);
  int votes_for(int frame, Label label) const;

 private:
  int n_;
  int next_end_;
  std::vector<std::array<int, kNumLabels>> counts_;  // ring indexed by frame % n
};

struct StepTiming {
  std::vector<double> step_ms;
  double mean() const;
  double percentile(double p) const;
  double max() const;
};

// Streams frames through feature extraction and the ensemble one at a time.
class OnlineVotingDetector {
 public:
  explicit OnlineVotingDetector(const TcnEnsemble& ensemble, StepTiming* timing = nullptr);

  // Feeds the next frame; returns the frame finalized by it, if any.
  std::optional<FrameVerdict> push(const SkeletonFrame& frame);
  // Label of the window ending at the most recent frame (combined logits).
  std::optional<Label> last_window_label() const { return last_window_label_; }
  int frames_seen() const { return frames_seen_; }

 private:
  const TcnEnsemble& ensemble_;
  StepTiming* timing_;
  VoteAccumulator votes_;
  GestureSequence history_;  // last three frames, for kinematic features
  FeatureMatrix ring_;        // last n feature rows, ring_(t % n)
  FeatureMatrix window_;
  int frames_seen_ = 0;
  std::optional<Label> last_window_label_;
};

// Window label = argmax of the summed L2-normalized member logits.
Label ensemble_window_label(const TcnEnsemble& ensemble, const WindowRef& window);

// Runs the online voting detector over a whole sequence. Sequences shorter
// than n yield an empty stream and a warning.
LabelStream vote_stream(const GestureSequence& seq, const TcnEnsemble& ensemble, StepTiming* timing = nullptr,
                        std::vector<std::string>* warnings = nullptr);

// Causal per-frame labels: frame t takes the label of the window ending at t
// (background before the first full window).
LabelStream window_label_stream(const GestureSequence& seq, const TcnEnsemble& ensemble,
                                StepTiming* timing = nullptr);

struct Chunk {
  Label label = Label::kNonGesture;
  int start = 0;
  int end = 0;
  int length() const { return end - start + 1; }
};

std::vector<Chunk> find_chunks(std::span<const Label> labels);

// For adjacent gesture chunks C0 | C1: (a) if |C0| > |C1| and |C0| < n, C1
// becomes background; (b) otherwise if |C0| < n, C0 becomes background.
// Repeated to a fixed point, then gesture chunks shorter than min_chunk with
// background (or the stream edge) on both sides become background.
std::vector<Label> postprocess_chunks(std::span<const Label> labels, int n, int min_chunk = 9);

// Each maximal gesture chunk becomes one interval; last_frame_used is the
// decision frame of the chunk's first frame.
std::vector<GestureInterval> chunks_to_predictions(std::span<const Label> labels, std::span<const int> last_used);

// ------------------------------------------------------------- proposals --

struct ProposalWindow {
  int start = 0;
  int end = 0;  // end - start == l
  double energy = 0.0;
  Label verdict = Label::kNonGesture;
  double confidence = 0.0;
};

// Window i spans frames [i, i + l]; it is proposed iff i > 0 and its energy
// exceeds the mean energy of windows 0..i-1.
std::vector<ProposalWindow> energy_proposals(const GestureSequence& seq, int l = 10);
std::vector<ProposalWindow> proposals_from_energies(std::span<const double> energies, int l);

struct RegressionTarget {
  double center = 0.0;
  double length = 0.0;
};

// center = (mid - window_start) / L, length = (end - start) / L. Throws
// kInvalidArgument when either leaves [0, 1].
RegressionTarget regression_targets(const GestureInterval& gesture, int window_start, int L = 80);
// Inverse of regression_targets, rounded to whole frames.
std::pair<int, int> decode_regression(const RegressionTarget& target, int window_start, int L = 80);

struct LargeVerdict {
  Label label = Label::kNonGesture;
  int start = 0;
  int end = 0;
};

// Accepts when both classifiers agree on a gesture class and the proposal
// span overlaps the regressed span.
std::optional<GestureInterval> match_and_fuse(const ProposalWindow& tiny, const LargeVerdict& large);

// ------------------------------------------------------------------- fsm --

enum class FsmPhase { kIdle, kConfirmStart, kInGesture, kConfirmEnd };

struct FsmConfig {
  int buffer = 10;
  int wi = 5;
  int we = 10;
};

struct FsmState {
  FsmPhase phase = FsmPhase::kIdle;
  std::deque<Label> buffer;  // newest at the back
  int frame = -1;            // index of the newest frame
  int tentative_start = -1;
  int gesture_frames = 0;    // gesture-labeled frames since tentative_start
  int windows_checked = 0;   // windows seen while confirming the start
  int background_run = 0;    // trailing consecutive background frames
  int last_gesture_frame = -1;
  int consumed_until = -1;   // frames <= this cannot open a new gesture
  std::array<int, kNumLabels> class_votes{};

  bool operator==(const FsmState&) const = default;
};

// Pure transition function.
std::pair<FsmState, std::optional<GestureInterval>> fsm_step(const FsmState& state, Label newest,
                                                              const FsmConfig& config = {});
// Emits a gesture still open at end of stream (IN_GESTURE / CONFIRM_END).
std::optional<GestureInterval> fsm_flush(const FsmState& state);

std::vector<GestureInterval> fsm_detect(std::span<const Label> labels, const FsmConfig& config = {},
                                        bool flush_at_end = true);

// ------------------------------------------------------------ thresholds --

struct ScoredDetection {
  int true_label = 0;
  Eigen::VectorXd probabilities;
};

enum class ThresholdMode { kPerClass, kPooled };

// Per class: mean over correct detections of (top probability + runner-up)
// / 2. Classes without correct detections take the pooled mean.
std::array<double, kNumLabels> calibrate_thresholds(std::span<const ScoredDetection> detections,
                                                    ThresholdMode mode = ThresholdMode::kPerClass);

// The argmax class when it is a gesture whose probability reaches its
// threshold.
std::optional<Label> accept_detection(const Eigen::VectorXd& probabilities,
                                      const std::array<double, kNumLabels>& thresholds);

// ------------------------------------------------------- variable window --

struct VariableWindowOptions {
  int min_size = 5;
  int max_size = 60;
  int size_step = 5;
  int end_stride = 1;
};

using SegmentScorer = std::function<Eigen::VectorXd(const GestureSequence&, FrameRange)>;

// For each end frame, windows of every size are scored; the most probable
// gesture window passing its class threshold claims its frames (higher
// probability wins contested frames). Maximal same-class runs become
// predictions whose last_frame_used is the earliest end frame that claimed
// any of their frames.
std::vector<GestureInterval> variable_window_detect(const GestureSequence& seq, const SegmentScorer& scorer,
                                                    const std::array<double, kNumLabels>& thresholds,
                                                    const VariableWindowOptions& options = {},
                                                    StepTiming* timing = nullptr);

}  // namespace gesturespot
