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

#include "gesturespot/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gesturespot {

namespace {

constexpr int kBackground = static_cast<int>(Label::kNonGesture);

int argmax_counts(const std::array<int, kNumLabels>& counts) {
  int best = 0;
  for (int i = 1; i < kNumLabels; ++i)
    if (counts[i] > counts[best]) best = i;
  return best;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

// ---------------------------------------------------------------- voting --

VoteAccumulator::VoteAccumulator(int window)
    : n_(window), next_end_(window - 1), counts_(static_cast<std::size_t>(window)) {
  if (window <= 0) throw Error(ErrorKind::kInvalidArgument, "vote window must be positive");
  for (auto& c : counts_) c.fill(0);
}

FrameVerdict VoteAccumulator::push(int window_end, Label verdict) {
  if (window_end != next_end_)
    throw Error(ErrorKind::kInvalidArgument, "windows must arrive in order (expected end " +
                                                 std::to_string(next_end_) + ")");
  // Frame window_end enters the ring; the slot it reuses was finalized by the
  // previous window (the first window's slots all start empty).
  if (window_end >= n_) counts_[static_cast<std::size_t>(window_end % n_)].fill(0);
  for (int f = std::max(0, window_end - n_ + 1); f <= window_end; ++f)
    ++counts_[static_cast<std::size_t>(f % n_)][static_cast<std::size_t>(index_of(verdict))];
  ++next_end_;
  const int frame = window_end - n_ + 1;
  FrameVerdict v;
  v.frame = frame;
  v.label = label_from_index(argmax_counts(counts_[static_cast<std::size_t>(frame % n_)]));
  v.last_frame_used = window_end;
  return v;
}

int VoteAccumulator::votes_for(int frame, Label label) const {
  return counts_[static_cast<std::size_t>(frame % n_)][static_cast<std::size_t>(index_of(label))];
}

double StepTiming::mean() const {
  if (step_ms.empty()) return 0.0;
  return std::accumulate(step_ms.begin(), step_ms.end(), 0.0) / static_cast<double>(step_ms.size());
}

double StepTiming::percentile(double p) const {
  if (step_ms.empty()) return 0.0;
  std::vector<double> v = step_ms;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::clamp(p, 0.0, 1.0) * static_cast<double>(v.size() - 1) + 0.5);
  return v[idx];
}

double StepTiming::max() const {
  return step_ms.empty() ? 0.0 : *std::max_element(step_ms.begin(), step_ms.end());
}

Label ensemble_window_label(const TcnEnsemble& ensemble, const WindowRef& window) {
  return label_from_index(argmax(ensemble.combined_logits(window)));
}

OnlineVotingDetector::OnlineVotingDetector(const TcnEnsemble& ensemble, StepTiming* timing)
    : ensemble_(ensemble), timing_(timing), votes_(std::max(1, ensemble.window())) {
  ensemble_.validate();
  if (ensemble_.input != InputKind::kFrames)
    throw Error(ErrorKind::kInvalidArgument, "voting needs a frame-feature ensemble");
  const int n = ensemble_.window();
  const int dim = ensemble_.members.front().shape().input_dim;
  ring_ = FeatureMatrix::Zero(n, dim);
  window_ = FeatureMatrix::Zero(n, dim);
}

std::optional<FrameVerdict> OnlineVotingDetector::push(const SkeletonFrame& frame) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = ensemble_.window();
  history_.frames.push_back(frame);
  if (history_.frames.size() > 3) history_.frames.erase(history_.frames.begin());

  // Feature row of the newest frame, identical to frame_features() on the
  // full sequence (kinematics only look two frames back).
  FeatureMatrix row;
  if (is_angle_set(ensemble_.features.set)) {
    GestureSequence one;
    one.frames.push_back(frame);
    row = frame_features(one, ensemble_.features);
  } else {
    row = frame_features(history_, ensemble_.features).bottomRows(1);
  }
  ensemble_.scaler.apply_inplace(row);
  const int t = frames_seen_++;
  ring_.row(t % n) = row.row(0);
  if (t < n - 1) return std::nullopt;

  for (int i = 0; i < n; ++i) window_.row(i) = ring_.row((t - n + 1 + i) % n);
  WindowRef ref;
  ref.source = &window_;
  const Label verdict = ensemble_window_label(ensemble_, ref);
  last_window_label_ = verdict;
  const auto out = votes_.push(t, verdict);
  if (timing_) timing_->step_ms.push_back(elapsed_ms(t0));
  return out;
}

LabelStream vote_stream(const GestureSequence& seq, const TcnEnsemble& ensemble, StepTiming* timing,
                        std::vector<std::string>* warnings) {
  LabelStream out;
  const int n = ensemble.window();
  if (seq.size() < n) {
    if (warnings) warnings->push_back("sequence '" + seq.id + "' shorter than the window; no output");
    return out;
  }
  out.labels.assign(static_cast<std::size_t>(seq.size()), Label::kNonGesture);
  out.last_used.assign(static_cast<std::size_t>(seq.size()), -1);
  OnlineVotingDetector det(ensemble, timing);
  for (const auto& f : seq.frames) {
    const auto v = det.push(f);
    if (!v) continue;
    out.labels[static_cast<std::size_t>(v->frame)] = v->label;
    out.last_used[static_cast<std::size_t>(v->frame)] = v->last_frame_used;
  }
  return out;
}

LabelStream window_label_stream(const GestureSequence& seq, const TcnEnsemble& ensemble, StepTiming* timing) {
  LabelStream out;
  out.labels.assign(static_cast<std::size_t>(seq.size()), Label::kNonGesture);
  out.last_used.resize(static_cast<std::size_t>(seq.size()));
  std::iota(out.last_used.begin(), out.last_used.end(), 0);
  OnlineVotingDetector det(ensemble, timing);
  for (int t = 0; t < seq.size(); ++t) {
    det.push(seq.frames[static_cast<std::size_t>(t)]);
    if (auto l = det.last_window_label(); l && t >= ensemble.window() - 1) out.labels[static_cast<std::size_t>(t)] = *l;
  }
  return out;
}

std::vector<Chunk> find_chunks(std::span<const Label> labels) {
  std::vector<Chunk> out;
  for (int i = 0; i < static_cast<int>(labels.size());) {
    int j = i;
    while (j + 1 < static_cast<int>(labels.size()) && labels[j + 1] == labels[i]) ++j;
    out.push_back({labels[i], i, j});
    i = j + 1;
  }
  return out;
}

std::vector<Label> postprocess_chunks(std::span<const Label> labels, int n, int min_chunk) {
  std::vector<Label> out(labels.begin(), labels.end());
  auto clear = [&out](const Chunk& c) {
    std::fill(out.begin() + c.start, out.begin() + c.end + 1, Label::kNonGesture);
  };
  for (bool changed = true; changed;) {
    changed = false;
    const auto chunks = find_chunks(out);
    for (std::size_t i = 0; i + 1 < chunks.size(); ++i) {
      const Chunk& c0 = chunks[i];
      const Chunk& c1 = chunks[i + 1];
      if (!is_gesture(c0.label) || !is_gesture(c1.label)) continue;
      if (c0.length() > c1.length() && c0.length() < n) {
        clear(c1);
        changed = true;
      } else if (c0.length() < n) {
        clear(c0);
        changed = true;
      }
      if (changed) break;
    }
  }
  const auto chunks = find_chunks(out);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const Chunk& c = chunks[i];
    if (!is_gesture(c.label) || c.length() >= min_chunk) continue;
    const bool left_bg = i == 0 || !is_gesture(chunks[i - 1].label);
    const bool right_bg = i + 1 == chunks.size() || !is_gesture(chunks[i + 1].label);
    if (left_bg && right_bg) clear(c);
  }
  return out;
}

std::vector<GestureInterval> chunks_to_predictions(std::span<const Label> labels, std::span<const int> last_used) {
  if (labels.size() != last_used.size()) throw Error(ErrorKind::kInvalidArgument, "label/decision length mismatch");
  std::vector<GestureInterval> out;
  for (const auto& c : find_chunks(labels)) {
    if (!is_gesture(c.label)) continue;
    GestureInterval g;
    g.label = c.label;
    g.start = c.start;
    g.end = c.end;
    const int used = last_used[static_cast<std::size_t>(c.start)];
    g.last_frame_used = used >= 0 ? used : c.end;
    out.push_back(g);
  }
  return out;
}

// ------------------------------------------------------------- proposals --

std::vector<ProposalWindow> proposals_from_energies(std::span<const double> energies, int l) {
  std::vector<ProposalWindow> out;
  double sum = 0.0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (i > 0 && energies[i] > sum / static_cast<double>(i)) {
      ProposalWindow p;
      p.start = static_cast<int>(i);
      p.end = static_cast<int>(i) + l;
      p.energy = energies[i];
      out.push_back(p);
    }
    sum += energies[i];
  }
  return out;
}

std::vector<ProposalWindow> energy_proposals(const GestureSequence& seq, int l) {
  if (l <= 0) throw Error(ErrorKind::kInvalidArgument, "proposal window must be positive");
  std::vector<double> energies;
  std::vector<Pose> poses;
  for (const auto& f : seq.frames) poses.push_back(f.joints);
  for (int i = 0; i + l < seq.size(); ++i)
    energies.push_back(window_energy(std::span<const Pose>(poses).subspan(static_cast<std::size_t>(i),
                                                                         static_cast<std::size_t>(l + 1))));
  return proposals_from_energies(energies, l);
}

RegressionTarget regression_targets(const GestureInterval& gesture, int window_start, int L) {
  if (L <= 0) throw Error(ErrorKind::kInvalidArgument, "regression window must be positive");
  const double mid = (gesture.start + gesture.end) / 2.0;
  RegressionTarget t;
  t.center = (mid - window_start) / L;
  t.length = static_cast<double>(gesture.end - gesture.start) / L;
  if (t.center < 0.0 || t.center > 1.0 || t.length < 0.0 || t.length > 1.0)
    throw Error(ErrorKind::kInvalidArgument, "regression target outside [0, 1]: window start " +
                                                 std::to_string(window_start) + " does not frame the gesture");
  return t;
}

std::pair<int, int> decode_regression(const RegressionTarget& target, int window_start, int L) {
  const double mid = window_start + target.center * L;
  const double half = std::max(0.0, target.length) * L / 2.0;
  int start = static_cast<int>(std::lround(mid - half));
  int end = static_cast<int>(std::lround(mid + half));
  if (end < start) std::swap(start, end);
  return {start, end};
}

std::optional<GestureInterval> match_and_fuse(const ProposalWindow& tiny, const LargeVerdict& large) {
  if (!is_gesture(tiny.verdict) || tiny.verdict != large.label) return std::nullopt;
  if (interval_iou(tiny.start, tiny.end, large.start, large.end) <= 0.0) return std::nullopt;
  GestureInterval g;
  g.label = tiny.verdict;
  g.start = large.start;
  g.end = large.end;
  g.last_frame_used = tiny.end;
  return g;
}

// ------------------------------------------------------------------- fsm --

namespace {

GestureInterval fsm_interval(const FsmState& s) {
  GestureInterval g;
  g.label = label_from_index(argmax_counts(s.class_votes));
  g.start = s.tentative_start;
  g.end = std::max(s.tentative_start, s.last_gesture_frame);
  g.last_frame_used = s.frame;
  return g;
}

void fsm_reset(FsmState& s) {
  s.phase = FsmPhase::kIdle;
  s.tentative_start = -1;
  s.gesture_frames = 0;
  s.windows_checked = 0;
  s.last_gesture_frame = -1;
  s.class_votes.fill(0);
  s.consumed_until = s.frame;
}

void fsm_count(FsmState& s, Label l, int frame) {
  ++s.gesture_frames;
  ++s.class_votes[static_cast<std::size_t>(index_of(l))];
  s.last_gesture_frame = frame;
}

}  // namespace

std::pair<FsmState, std::optional<GestureInterval>> fsm_step(const FsmState& state, Label newest,
                                                              const FsmConfig& config) {
  FsmState s = state;
  ++s.frame;
  s.buffer.push_back(newest);
  while (static_cast<int>(s.buffer.size()) > config.buffer) s.buffer.pop_front();
  s.background_run = is_gesture(newest) ? 0 : s.background_run + 1;
  if (static_cast<int>(s.buffer.size()) < config.buffer) return {s, std::nullopt};

  const bool all_background =
      std::none_of(s.buffer.begin(), s.buffer.end(), [](Label l) { return is_gesture(l); });
  const int first_frame = s.frame - config.buffer + 1;

  switch (s.phase) {
    case FsmPhase::kIdle: {
      for (int i = 0; i < config.buffer; ++i) {
        const int f = first_frame + i;
        const Label l = s.buffer[static_cast<std::size_t>(i)];
        if (!is_gesture(l) || f <= s.consumed_until) continue;
        if (s.tentative_start < 0) {
          s.phase = FsmPhase::kConfirmStart;
          s.tentative_start = f;
          s.windows_checked = 1;
        }
        fsm_count(s, l, f);
      }
      break;
    }
    case FsmPhase::kConfirmStart: {
      ++s.windows_checked;
      if (is_gesture(newest)) fsm_count(s, newest, s.frame);
      if (all_background || s.windows_checked >= config.buffer) {
        if (s.gesture_frames >= config.wi)
          s.phase = all_background ? FsmPhase::kConfirmEnd : FsmPhase::kInGesture;
        else
          fsm_reset(s);
      }
      break;
    }
    case FsmPhase::kInGesture:
      if (is_gesture(newest)) fsm_count(s, newest, s.frame);
      if (all_background) s.phase = FsmPhase::kConfirmEnd;
      break;
    case FsmPhase::kConfirmEnd:
      if (is_gesture(newest)) {
        fsm_count(s, newest, s.frame);
        s.phase = FsmPhase::kInGesture;
      }
      break;
  }

  if (s.phase == FsmPhase::kConfirmEnd && s.background_run >= config.we) {
    const auto g = fsm_interval(s);
    fsm_reset(s);
    return {s, g};
  }
  return {s, std::nullopt};
}

std::optional<GestureInterval> fsm_flush(const FsmState& state) {
  if (state.phase == FsmPhase::kInGesture || state.phase == FsmPhase::kConfirmEnd) return fsm_interval(state);
  return std::nullopt;
}

std::vector<GestureInterval> fsm_detect(std::span<const Label> labels, const FsmConfig& config, bool flush_at_end) {
  if (config.buffer <= 0 || config.wi <= 0 || config.we <= 0)
    throw Error(ErrorKind::kInvalidArgument, "fsm parameters must be positive");
  std::vector<GestureInterval> out;
  FsmState s;
  for (Label l : labels) {
    auto [next, emitted] = fsm_step(s, l, config);
    s = std::move(next);
    if (emitted) out.push_back(*emitted);
  }
  if (flush_at_end)
    if (auto g = fsm_flush(s)) out.push_back(*g);
  return out;
}

// ------------------------------------------------------------ thresholds --

std::array<double, kNumLabels> calibrate_thresholds(std::span<const ScoredDetection> detections, ThresholdMode mode) {
  std::array<double, kNumLabels> sum{}, thr{};
  std::array<int, kNumLabels> count{};
  double pooled = 0.0;
  int pooled_n = 0;
  for (const auto& d : detections) {
    if (d.true_label < 0 || d.true_label >= kNumGestureClasses) continue;
    if (d.probabilities.size() != kNumLabels)
      throw Error(ErrorKind::kInvalidArgument, "detection probabilities must have 17 entries");
    if (argmax(d.probabilities) != d.true_label) continue;
    double second = 0.0;
    for (int c = 0; c < kNumLabels; ++c)
      if (c != d.true_label) second = std::max(second, d.probabilities[c]);
    const double stat = (d.probabilities[d.true_label] + second) / 2.0;
    sum[static_cast<std::size_t>(d.true_label)] += stat;
    ++count[static_cast<std::size_t>(d.true_label)];
    pooled += stat;
    ++pooled_n;
  }
  const double pooled_mean = pooled_n > 0 ? pooled / pooled_n : 0.0;
  for (int c = 0; c < kNumGestureClasses; ++c) {
    const auto i = static_cast<std::size_t>(c);
    thr[i] = (mode == ThresholdMode::kPooled || count[i] == 0) ? pooled_mean : sum[i] / count[i];
  }
  thr[kBackground] = 0.0;
  return thr;
}

std::optional<Label> accept_detection(const Eigen::VectorXd& probabilities,
                                      const std::array<double, kNumLabels>& thresholds) {
  if (probabilities.size() != kNumLabels) throw Error(ErrorKind::kInvalidArgument, "expected 17 probabilities");
  const int c = argmax(probabilities);
  if (c == kBackground || probabilities[c] < thresholds[static_cast<std::size_t>(c)]) return std::nullopt;
  return label_from_index(c);
}

// ------------------------------------------------------- variable window --

std::vector<GestureInterval> variable_window_detect(const GestureSequence& seq, const SegmentScorer& scorer,
                                                    const std::array<double, kNumLabels>& thresholds,
                                                    const VariableWindowOptions& options, StepTiming* timing) {
  if (options.min_size < 2 || options.max_size < options.min_size || options.size_step <= 0 ||
      options.end_stride <= 0)
    throw Error(ErrorKind::kInvalidArgument, "invalid variable-window options");
  const int T = seq.size();
  std::vector<double> claim_prob(static_cast<std::size_t>(T), -1.0);
  std::vector<Label> claim_label(static_cast<std::size_t>(T), Label::kNonGesture);
  std::vector<int> claim_end(static_cast<std::size_t>(T), -1);

  for (int e = options.min_size - 1; e < T; e += options.end_stride) {
    const auto t0 = std::chrono::steady_clock::now();
    int best_label = -1, best_start = 0;
    double best_prob = -1.0;
    for (int size = options.min_size; size <= options.max_size; size += options.size_step) {
      const int start = e - size + 1;
      if (start < 0) break;
      const Eigen::VectorXd p = scorer(seq, {start, e});
      const auto accepted = accept_detection(p, thresholds);
      if (!accepted) continue;
      const int c = index_of(*accepted);
      if (p[c] > best_prob) {
        best_prob = p[c];
        best_label = c;
        best_start = start;
      }
    }
    if (timing) timing->step_ms.push_back(elapsed_ms(t0));
    if (best_label < 0) continue;
    for (int f = best_start; f <= e; ++f) {
      const auto i = static_cast<std::size_t>(f);
      if (best_prob > claim_prob[i]) {
        claim_prob[i] = best_prob;
        claim_label[i] = label_from_index(best_label);
        claim_end[i] = e;
      }
    }
  }

  std::vector<GestureInterval> out;
  for (const auto& c : find_chunks(claim_label)) {
    if (!is_gesture(c.label)) continue;
    GestureInterval g;
    g.label = c.label;
    g.start = c.start;
    g.end = c.end;
    int used = claim_end[static_cast<std::size_t>(c.start)];
    for (int f = c.start; f <= c.end; ++f) used = std::min(used, claim_end[static_cast<std::size_t>(f)]);
    g.last_frame_used = used;
    out.push_back(g);
  }
  return out;
}

}  // namespace gesturespot
