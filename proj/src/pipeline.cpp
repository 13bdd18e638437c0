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

#include "gesturespot/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace gesturespot {

namespace {

FrameFeatureSpec frame_spec(FeatureSet set) {
  FrameFeatureSpec s;
  s.set = set;
  return s;
}

struct Inputs {
  std::vector<GestureSequence> sequences;
  std::vector<std::vector<GestureInterval>> annotations;
};

Inputs split_inputs(const Dataset& data) {
  Inputs in;
  for (const auto& s : data.sequences) {
    in.sequences.push_back(s);
    const auto it = data.annotations.find(s.id);
    in.annotations.push_back(it == data.annotations.end() ? std::vector<GestureInterval>{} : it->second);
  }
  return in;
}

TcnShape base_shape(const RunConfig& config) {
  TcnShape s;
  s.leaky_slope = config.leaky_slope;
  return s;
}

void log_line(std::vector<std::string>* log, std::string line) {
  if (log) log->push_back(std::move(line));
}

TcnEnsemble assemble(std::vector<TrainResult>& results, InputKind input, std::vector<std::string>* log,
                     const std::string& role) {
  TcnEnsemble e;
  e.input = input;
  for (auto& r : results) {
    log_line(log, role + " fold " + std::to_string(e.members.size()) + ": best validation accuracy " +
                      format_double(r.best_val_accuracy));
    e.members.push_back(std::move(r.model));
    e.curve.insert(e.curve.end(), r.curve.begin(), r.curve.end());
  }
  return e;
}

TcnEnsemble train_large(const Inputs& in, const RunConfig& config, std::vector<std::string>* log) {
  const int L = config.large_window;
  auto prepared = prepare_frame_features(in.sequences, frame_spec(config.features));
  const auto occurrences = list_occurrences(in.annotations);
  std::mt19937_64 rng(derive_seed(config.train.seed, 31));
  std::bernoulli_distribution keep(config.train.background_keep);

  FoldedSamples samples;
  for (std::size_t o = 0; o < occurrences.size(); ++o) {
    const auto& g = occurrences[o].interval;
    int lo = g.end - L + 1, hi = g.start;
    if (lo > hi) lo = hi = static_cast<int>(std::floor((g.start + g.end) / 2.0 - L / 2.0));
    std::vector<int> starts;
    for (int k = 0; k < 4; ++k) starts.push_back(std::uniform_int_distribution<int>(lo, hi)(rng));
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    for (int ws : starts) {
      if (g.end - g.start > L) break;
      const auto t = regression_targets(g, ws, L);
      WindowRef r;
      r.source = &prepared.features[static_cast<std::size_t>(occurrences[o].sequence)];
      r.start = ws;
      r.label = index_of(g.label);
      r.has_target = true;
      r.target[0] = t.center;
      r.target[1] = t.length;
      samples.refs.push_back(r);
      samples.occurrence.push_back(static_cast<int>(o));
    }
  }
  for (std::size_t s = 0; s < in.sequences.size(); ++s) {
    const int len = in.sequences[s].size();
    for (int ws = 0; ws + L <= len; ws += std::max(1, L / 4)) {
      bool clear = true;
      for (const auto& g : in.annotations[s]) clear = clear && overlap_frames(ws, ws + L - 1, g.start, g.end) == 0;
      if (!clear || !keep(rng)) continue;
      WindowRef r;
      r.source = &prepared.features[s];
      r.start = ws;
      r.label = index_of(Label::kNonGesture);
      samples.refs.push_back(r);
      samples.occurrence.push_back(-1);
    }
  }
  log_line(log, "large: " + std::to_string(samples.refs.size()) + " training windows");

  TcnShape shape = base_shape(config);
  shape.input_dim = feature_set_dimension(config.features);
  shape.window = L;
  shape.regression = 2;
  TrainConfig tc = config.train;
  tc.window = L;
  auto results = train_folds(shape, samples, occurrences, tc, {config.train.l2, config.regression_weight});
  TcnEnsemble e = assemble(results, InputKind::kFrames, log, "large");
  e.features = prepared.spec;
  e.scaler = prepared.scaler;
  return e;
}

TcnEnsemble train_segments(const Inputs& in, const RunConfig& config, std::array<double, kNumLabels>& thresholds,
                           std::vector<std::string>* log) {
  BaselineOptions opts;
  opts.steps = config.baseline_steps;
  const auto occurrences = list_occurrences(in.annotations);
  std::mt19937_64 rng(derive_seed(config.train.seed, 41));
  const int min_size = config.variable_window.min_size, max_size = config.variable_window.max_size;

  struct Segment {
    int sequence, first, last, label, occurrence;
  };
  std::vector<Segment> segments;
  for (std::size_t o = 0; o < occurrences.size(); ++o) {
    const auto& g = occurrences[o].interval;
    const int s = occurrences[o].sequence;
    const int len = in.sequences[static_cast<std::size_t>(s)].size();
    segments.push_back({s, g.start, g.end, index_of(g.label), static_cast<int>(o)});
    const int jitter = std::max(1, static_cast<int>(0.15 * g.length()));
    std::uniform_int_distribution<int> d(-jitter, jitter);
    for (int k = 0; k < config.baseline_jitter; ++k) {
      int a = std::clamp(g.start + d(rng), 0, len - 1);
      int b = std::clamp(g.end + d(rng), 0, len - 1);
      if (b - a + 1 < 2) continue;
      segments.push_back({s, a, b, index_of(g.label), static_cast<int>(o)});
    }
  }
  std::uniform_int_distribution<int> size_dist(min_size, max_size);
  for (std::size_t s = 0; s < in.sequences.size(); ++s) {
    const int len = in.sequences[s].size();
    const int wanted = 2 * std::max<int>(1, static_cast<int>(in.annotations[s].size()));
    int made = 0;
    for (int attempt = 0; attempt < 20 * wanted && made < wanted; ++attempt) {
      const int size = size_dist(rng);
      if (size > len) continue;
      const int a = std::uniform_int_distribution<int>(0, len - size)(rng);
      bool clear = true;
      for (const auto& g : in.annotations[s]) clear = clear && overlap_frames(a, a + size - 1, g.start, g.end) == 0;
      if (!clear) continue;
      segments.push_back({static_cast<int>(s), a, a + size - 1, index_of(Label::kNonGesture), -1});
      ++made;
    }
  }

  std::vector<FeatureMatrix> mats;
  mats.reserve(segments.size());
  for (const auto& sg : segments)
    mats.push_back(baseline_features(in.sequences[static_cast<std::size_t>(sg.sequence)], {sg.first, sg.last}, opts)
                       .stacked());
  std::vector<const FeatureMatrix*> ptrs;
  for (const auto& m : mats) ptrs.push_back(&m);
  const InputScaler scaler = InputScaler::fit(ptrs);
  for (auto& m : mats) scaler.apply_inplace(m);

  FoldedSamples samples;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    WindowRef r;
    r.source = &mats[i];
    r.label = segments[i].label;
    samples.refs.push_back(r);
    samples.occurrence.push_back(segments[i].occurrence);
  }
  log_line(log, "segment: " + std::to_string(samples.refs.size()) + " training segments");

  TcnShape shape = base_shape(config);
  shape.input_dim = static_cast<int>(mats.empty() ? 0 : mats.front().cols());
  shape.window = opts.steps;
  TrainConfig tc = config.train;
  tc.window = opts.steps;
  std::vector<std::vector<int>> validation;
  auto results = train_folds(shape, samples, occurrences, tc, {config.train.l2, 1.0}, &validation);

  std::vector<ScoredDetection> scored;
  for (std::size_t f = 0; f < results.size(); ++f)
    for (int i : validation[f]) {
      const auto& r = samples.refs[static_cast<std::size_t>(i)];
      if (r.label == index_of(Label::kNonGesture)) continue;
      scored.push_back({r.label, softmax(results[f].model.forward(r).logits)});
    }
  thresholds = calibrate_thresholds(scored, config.threshold_mode);

  TcnEnsemble e = assemble(results, InputKind::kBaselineSegment, log, "segment");
  e.baseline = opts;
  e.scaler = scaler;
  return e;
}

std::vector<GestureInterval> detect_proposal(const GestureSequence& seq, const ModelBundle& model,
                                             const RunConfig& config, StepTiming* timing) {
  const auto& tiny = model.ensemble("tiny");
  const auto& large = model.ensemble("large");
  const int l = tiny.window() - 1;
  const int L = large.window();
  if (seq.size() <= l) return {};
  const FeatureMatrix ft = tiny.sequence_features(seq);
  const FeatureMatrix fl = large.sequence_features(seq);
  (void)config;

  std::vector<GestureInterval> accepted;
  for (auto p : energy_proposals(seq, l)) {
    const auto t0 = std::chrono::steady_clock::now();
    WindowRef tr;
    tr.source = &ft;
    tr.start = p.start;
    const Eigen::VectorXd probs = tiny.mean_probabilities(tr);
    p.verdict = label_from_index(argmax(tiny.combined_logits(tr)));
    p.confidence = probs[index_of(p.verdict)];
    std::optional<GestureInterval> fused;
    int used = p.end;
    if (is_gesture(p.verdict)) {
      WindowRef lr;
      lr.source = &fl;
      lr.start = p.start - L / 8;
      used = std::min(lr.start + L - 1, seq.size() - 1);
      LargeVerdict v;
      v.label = label_from_index(argmax(large.combined_logits(lr)));
      const Eigen::VectorXd reg = large.mean_regression(lr);
      std::tie(v.start, v.end) = decode_regression({reg[0], reg[1]}, lr.start, L);
      fused = match_and_fuse(p, v);
    }
    if (timing)
      timing->step_ms.push_back(
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    if (!fused) continue;
    fused->last_frame_used = std::max(used, *fused->last_frame_used);
    fused->start = std::clamp(fused->start, 0, seq.size() - 1);
    fused->end = std::clamp(fused->end, 0, seq.size() - 1);
    const bool duplicate = std::any_of(accepted.begin(), accepted.end(), [&](const GestureInterval& a) {
      return a.label == fused->label && overlap_frames(a, *fused) > 0;
    });
    if (!duplicate) accepted.push_back(*fused);
  }
  return accepted;
}

}  // namespace

ModelBundle train_model(const Dataset& data, const RunConfig& config, std::vector<std::string>* log) {
  config.validate();
  validate_dataset(data);
  const Inputs in = split_inputs(data);
  ModelBundle m;
  m.strategy = config.strategy;
  m.config = config.to_text();
  EnsembleTrainSpec spec;
  spec.shape = base_shape(config);
  spec.config = config.train;
  spec.loss.l2 = config.train.l2;
  switch (config.strategy) {
    case Strategy::kVoting:
    case Strategy::kFsm:
      m.ensembles["window"] = train_window_ensemble(in.sequences, in.annotations, frame_spec(config.features), spec, log);
      break;
    case Strategy::kProposal:
      spec.config.window = config.proposal_window + 1;
      m.ensembles["tiny"] = train_window_ensemble(in.sequences, in.annotations, frame_spec(config.features), spec, log);
      m.ensembles["large"] = train_large(in, config, log);
      break;
    case Strategy::kBaseline: {
      std::array<double, kNumLabels> thr{};
      m.ensembles["segment"] = train_segments(in, config, thr, log);
      m.thresholds = thr;
      break;
    }
  }
  return m;
}

std::string training_curve_csv(const ModelBundle& model) {
  std::string out = "role,fold,batch,train_loss,val_accuracy\n";
  for (const auto& [role, e] : model.ensembles)
    for (const auto& p : e.curve)
      out += role + ',' + std::to_string(p.fold) + ',' + std::to_string(p.batch) + ',' + format_double(p.train_loss) +
             ',' + format_double(p.val_accuracy) + '\n';
  return out;
}

std::vector<GestureInterval> sanitize_predictions(std::vector<GestureInterval> preds, int length) {
  std::vector<GestureInterval> out;
  if (length <= 0) return out;
  for (auto g : preds) {
    if (!is_gesture(g.label)) continue;
    g.start = std::clamp(g.start, 0, length - 1);
    g.end = std::clamp(g.end, 0, length - 1);
    if (g.end < g.start) continue;
    if (!g.last_frame_used) g.last_frame_used = g.end;
    out.push_back(g);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  return out;
}

std::vector<GestureInterval> detect_sequence(const GestureSequence& seq, const ModelBundle& model,
                                             const RunConfig& config, StepTiming* timing,
                                             std::vector<std::string>* warnings) {
  std::vector<GestureInterval> preds;
  switch (model.strategy) {
    case Strategy::kVoting: {
      const auto& e = model.ensemble("window");
      const auto ls = vote_stream(seq, e, timing, warnings);
      if (ls.labels.empty()) break;
      const auto labels = postprocess_chunks(ls.labels, e.window(), config.min_chunk);
      preds = chunks_to_predictions(labels, ls.last_used);
      break;
    }
    case Strategy::kFsm: {
      const auto& e = model.ensemble("window");
      const auto ls = window_label_stream(seq, e, timing);
      preds = fsm_detect(ls.labels, config.fsm, true);
      break;
    }
    case Strategy::kProposal:
      preds = detect_proposal(seq, model, config, timing);
      break;
    case Strategy::kBaseline: {
      const auto& e = model.ensemble("segment");
      if (!model.thresholds) throw Error(ErrorKind::kValidation, "baseline model lacks thresholds");
      SegmentScorer scorer = [&e](const GestureSequence& s, FrameRange r) {
        FeatureMatrix m = baseline_features(s, r, e.baseline).stacked();
        e.scaler.apply_inplace(m);
        WindowRef ref;
        ref.source = &m;
        return e.mean_probabilities(ref);
      };
      preds = variable_window_detect(seq, scorer, *model.thresholds, config.variable_window, timing);
      break;
    }
  }
  return sanitize_predictions(std::move(preds), seq.size());
}

DetectResult detect_sequence_set(const Dataset& data, const ModelBundle& model, const RunConfig& config) {
  config.validate();
  DetectResult r;
  for (const auto& seq : data.sequences)
    r.predictions[seq.id] = detect_sequence(seq, model, config, &r.timing, &r.warnings);
  return r;
}

std::string timing_summary(const StepTiming& timing) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "steps=%zu\nmean_ms=%.6f\np50_ms=%.6f\np95_ms=%.6f\nmax_ms=%.6f\n",
                timing.step_ms.size(), timing.mean(), timing.percentile(0.5), timing.percentile(0.95), timing.max());
  return buf;
}

std::string feature_dump_csv(const GestureSequence& seq, FeatureSet set) {
  FrameFeatureSpec spec;
  spec.set = set;
  if (!is_angle_set(set)) spec.stats = NormalizationStats::compute(std::span<const GestureSequence>(&seq, 1));
  const FeatureMatrix m = frame_features(seq, spec);

  std::vector<std::string> names;
  if (is_angle_set(set)) {
    constexpr int kVectors = kNumJoints;
    for (int a = 0; a < kVectors; ++a)
      for (int b = a + 1; b < kVectors; ++b) names.push_back("angle_" + std::to_string(a) + "_" + std::to_string(b));
    while (static_cast<int>(names.size()) < m.cols()) names.push_back("angle_pad_" + std::to_string(names.size()));
  } else {
    const bool dist = set != FeatureSet::kKinematic;
    const bool sph = set == FeatureSet::kKinematicFull;
    for (int j = 0; j < kNumJoints; ++j) {
      const std::string p = "j" + std::to_string(j) + "_";
      for (const char* block : {"pos", "speed", "acc"})
        for (const char* axis : {"x", "y", "z"}) names.push_back(p + block + "_" + axis);
      if (dist)
        for (int k = 0; k < kNumJoints; ++k) names.push_back(p + "dist_" + std::to_string(k));
      if (sph)
        for (const char* c : {"r", "theta", "phi"}) names.push_back(p + "sph_" + c);
    }
  }
  std::string out = "frame";
  for (const auto& n : names) out += ',' + n;
  out += '\n';
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    out += std::to_string(t);
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += ',' + format_double(m(t, c));
    out += '\n';
  }
  return out;
}

}  // namespace gesturespot
