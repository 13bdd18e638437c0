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

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gesturespot/features.hpp"
#include "gesturespot/tcn.hpp"

namespace gesturespot {

struct TrainConfig {
  int window = 20;
  int batch = 15;
  int epochs = 100;
  int folds = 6;
  double l2 = 1e-4;
  double learning_rate = 1e-3;
  double momentum = 0.0;  // 0 = plain SGD
  double ema_decay = 0.999;
  double background_keep = 0.10;
  int eval_every = 1000;  // batches between EMA validations
  std::uint64_t seed = 1;
  int jobs = 1;

  void validate() const;
};

// Per-dimension standardization fitted on training windows.
struct InputScaler {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd inv_std;

  bool empty() const { return mean.size() == 0; }
  static InputScaler fit(std::span<const FeatureMatrix* const> sources);
  void apply_inplace(FeatureMatrix& m) const;
};

// A sample drawn from a feature stream: window [start, start + n) of
// sequence `sequence`, labeled with `label` (kNumGestureClasses = background).
struct WindowSample {
  int sequence = 0;
  int start = 0;
  int label = 0;
  int occurrence = -1;  // index into the occurrence list, -1 for background
  bool has_target = false;
  double target[2] = {0.0, 0.0};
};

struct Occurrence {
  int sequence = 0;
  GestureInterval interval;
};

std::vector<Occurrence> list_occurrences(std::span<const std::vector<GestureInterval>> annotations);

// Every stride-1 window of length config.window: labeled with the gesture it
// overlaps by >= ceil(n/2) frames (larger overlap wins, earlier on ties),
// background when it overlaps nothing (kept with probability
// background_keep), excluded otherwise. Sequences shorter than n are skipped.
std::vector<WindowSample> sample_training_windows(std::span<const int> sequence_lengths,
                                                  std::span<const std::vector<GestureInterval>> annotations,
                                                  const TrainConfig& config, std::mt19937_64& rng,
                                                  std::vector<std::string>* warnings = nullptr);

// Fold of every occurrence, stratified per class: occurrences of a class are
// shuffled and dealt round-robin. Throws kValidation when a present class has
// fewer than `folds` occurrences.
std::vector<int> stratified_folds(std::span<const Occurrence> occurrences, int folds, std::mt19937_64& rng);

// Exponential moving average of a parameter vector, seeded with the initial
// parameters.
struct ParameterEma {
  double decay = 0.999;
  Eigen::VectorXd value;
  void update(const Eigen::VectorXd& p) { value = decay * value + (1.0 - decay) * p; }
};

struct CurvePoint {
  int fold = 0;
  long batch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  TcnModel model;  // EMA snapshot with the best validation accuracy
  double best_val_accuracy = 0.0;
  std::vector<CurvePoint> curve;
};

// Mini-batch SGD with EMA tracking. The EMA parameters are evaluated every
// eval_every batches and at the end; the best evaluation is kept. With an
// empty validation set the final EMA snapshot is returned.
TrainResult train_classifier(const TcnShape& shape, std::span<const WindowRef> train,
                             std::span<const WindowRef> validation, const TrainConfig& config,
                             std::uint64_t seed, int fold = 0, const LossOptions& loss = {});

double window_accuracy(const TcnModel& model, std::span<const WindowRef> windows);

enum class InputKind { kFrames, kBaselineSegment };

struct TcnEnsemble {
  InputKind input = InputKind::kFrames;
  FrameFeatureSpec features;
  BaselineOptions baseline;
  InputScaler scaler;
  std::vector<TcnModel> members;
  std::vector<CurvePoint> curve;

  int window() const { return members.empty() ? 0 : members.front().shape().window; }
  // Features for a whole sequence, already scaled.
  FeatureMatrix sequence_features(const GestureSequence& seq) const;
  // L2-normalized member logits, summed.
  Eigen::VectorXd combined_logits(const WindowRef& window) const;
  std::vector<Eigen::VectorXd> combined_logits_batch(std::span<const WindowRef> windows) const;
  // Mean of member softmax outputs.
  Eigen::VectorXd mean_probabilities(const WindowRef& window) const;
  // Mean of member regression outputs.
  Eigen::VectorXd mean_regression(const WindowRef& window) const;
  void validate() const;
};

struct EnsembleTrainSpec {
  TcnShape shape;  // input_dim and window are filled in from the data/config
  TrainConfig config;
  LossOptions loss;
};

// Frame features of every training sequence with normalization stats (for
// non-angle sets) and the input scaler fitted on them; features are scaled.
struct PreparedFeatures {
  FrameFeatureSpec spec;
  InputScaler scaler;
  std::vector<FeatureMatrix> features;
};

PreparedFeatures prepare_frame_features(std::span<const GestureSequence> sequences, const FrameFeatureSpec& features);

// k-fold ensemble over per-frame feature windows (the voting classifier).
TcnEnsemble train_window_ensemble(std::span<const GestureSequence> sequences,
                                  std::span<const std::vector<GestureInterval>> annotations,
                                  const FrameFeatureSpec& features, EnsembleTrainSpec spec,
                                  std::vector<std::string>* log = nullptr);

// Generic k-fold driver: samples carry an occurrence (stratified) or are
// background (random fold). `make_ref` turns a sample into a model input.
struct FoldedSamples {
  std::vector<WindowRef> refs;
  std::vector<int> occurrence;  // -1 for background
};

std::vector<TrainResult> train_folds(const TcnShape& shape, const FoldedSamples& samples,
                                     std::span<const Occurrence> occurrences, const TrainConfig& config,
                                     const LossOptions& loss, std::vector<std::vector<int>>* validation_sets = nullptr);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace gesturespot
