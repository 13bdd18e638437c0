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

#include "gesturespot/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace gesturespot {

void TrainConfig::validate() const {
  if (window <= 0 || batch <= 0 || epochs <= 0 || folds <= 0 || eval_every <= 0 || jobs <= 0)
    throw Error(ErrorKind::kInvalidArgument, "train config: window, batch, epochs, folds, eval_every and jobs must be positive");
  if (!(l2 >= 0.0) || !(learning_rate > 0.0) || !(momentum >= 0.0 && momentum < 1.0))
    throw Error(ErrorKind::kInvalidArgument, "train config: bad l2, learning rate or momentum");
  if (!(ema_decay >= 0.0 && ema_decay < 1.0))
    throw Error(ErrorKind::kInvalidArgument, "train config: ema decay must be in [0, 1)");
  if (!(background_keep > 0.0 && background_keep <= 1.0))
    throw Error(ErrorKind::kInvalidArgument, "train config: background keep-rate must be in (0, 1]");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined state
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

InputScaler InputScaler::fit(std::span<const FeatureMatrix* const> sources) {
  InputScaler s;
  Eigen::Index dim = -1;
  double count = 0.0;
  Eigen::RowVectorXd sum, sq;
  for (const auto* m : sources) {
    if (dim < 0) {
      dim = m->cols();
      sum = Eigen::RowVectorXd::Zero(dim);
      sq = Eigen::RowVectorXd::Zero(dim);
    }
    sum += m->colwise().sum();
    count += static_cast<double>(m->rows());
  }
  if (dim < 0 || count == 0.0) return s;
  s.mean = sum / count;
  for (const auto* m : sources) sq += (m->rowwise() - s.mean).array().square().colwise().sum().matrix();
  s.inv_std.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double sd = std::sqrt(sq[i] / count);
    s.inv_std[i] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  return s;
}

void InputScaler::apply_inplace(FeatureMatrix& m) const {
  if (empty()) return;
  if (m.cols() != mean.size()) throw Error(ErrorKind::kInvalidArgument, "scaler dimension mismatch");
  m.rowwise() -= mean;
  m.array().rowwise() *= inv_std.array();
}

std::vector<Occurrence> list_occurrences(std::span<const std::vector<GestureInterval>> annotations) {
  std::vector<Occurrence> out;
  for (std::size_t s = 0; s < annotations.size(); ++s)
    for (const auto& g : annotations[s]) out.push_back({static_cast<int>(s), g});
  return out;
}

std::vector<WindowSample> sample_training_windows(std::span<const int> sequence_lengths,
                                                  std::span<const std::vector<GestureInterval>> annotations,
                                                  const TrainConfig& config, std::mt19937_64& rng,
                                                  std::vector<std::string>* warnings) {
  if (sequence_lengths.size() != annotations.size())
    throw Error(ErrorKind::kInvalidArgument, "sequence/annotation count mismatch");
  const int n = config.window;
  const int need = (n + 1) / 2;
  std::bernoulli_distribution keep(config.background_keep);
  std::vector<WindowSample> out;
  int occurrence_base = 0;
  for (std::size_t s = 0; s < annotations.size(); ++s) {
    const auto& gts = annotations[s];
    const int len = sequence_lengths[s];
    if (len < n) {
      if (warnings) warnings->push_back("sequence " + std::to_string(s) + " shorter than the window; skipped");
      occurrence_base += static_cast<int>(gts.size());
      continue;
    }
    for (int start = 0; start + n <= len; ++start) {
      const int end = start + n - 1;
      int best = -1, best_overlap = 0;
      bool any = false;
      for (std::size_t g = 0; g < gts.size(); ++g) {
        const int ov = overlap_frames(start, end, gts[g].start, gts[g].end);
        if (ov > 0) any = true;
        if (ov > best_overlap) {
          best_overlap = ov;
          best = static_cast<int>(g);
        }
      }
      WindowSample w;
      w.sequence = static_cast<int>(s);
      w.start = start;
      if (best >= 0 && best_overlap >= need) {
        w.label = index_of(gts[best].label);
        w.occurrence = occurrence_base + best;
        out.push_back(w);
      } else if (!any) {
        if (!keep(rng)) continue;
        w.label = index_of(Label::kNonGesture);
        out.push_back(w);
      }
    }
    occurrence_base += static_cast<int>(gts.size());
  }
  return out;
}

std::vector<int> stratified_folds(std::span<const Occurrence> occurrences, int folds, std::mt19937_64& rng) {
  std::vector<int> fold(occurrences.size(), 0);
  for (int c = 0; c < kNumGestureClasses; ++c) {
    std::vector<int> members;
    for (std::size_t i = 0; i < occurrences.size(); ++i)
      if (index_of(occurrences[i].interval.label) == c) members.push_back(static_cast<int>(i));
    if (members.empty()) continue;
    if (static_cast<int>(members.size()) < folds)
      throw Error(ErrorKind::kValidation, "class " + std::string(label_name(label_from_index(c))) + " has " +
                                              std::to_string(members.size()) + " occurrences, fewer than " +
                                              std::to_string(folds) + " folds");
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i) fold[members[i]] = static_cast<int>(i % folds);
  }
  return fold;
}

double window_accuracy(const TcnModel& model, std::span<const WindowRef> windows) {
  if (windows.empty()) return 0.0;
  constexpr std::size_t kChunk = 64;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < windows.size(); i += kChunk) {
    const auto chunk = windows.subspan(i, std::min(kChunk, windows.size() - i));
    const auto outs = model.forward_batch(chunk);
    for (std::size_t b = 0; b < chunk.size(); ++b)
      if (argmax(outs[b].logits) == chunk[b].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(windows.size());
}

TrainResult train_classifier(const TcnShape& shape, std::span<const WindowRef> train,
                             std::span<const WindowRef> validation, const TrainConfig& config, std::uint64_t seed,
                             int fold, const LossOptions& loss) {
  config.validate();
  if (train.empty()) throw Error(ErrorKind::kValidation, "no training windows");
  TcnModel model = TcnModel::initialized(shape, derive_seed(seed, 0));
  std::mt19937_64 rng(derive_seed(seed, 1));
  ParameterEma ema{config.ema_decay, model.parameters()};
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(model.parameters().size());
  TcnModel snapshot = model;

  TrainResult result;
  result.best_val_accuracy = -1.0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<WindowRef> batch;
  long batches = 0;
  long last_eval = -1;
  double loss_acc = 0.0;
  int loss_count = 0;

  auto evaluate = [&] {
    snapshot.parameters() = ema.value;
    CurvePoint p;
    p.fold = fold;
    p.batch = batches;
    p.train_loss = loss_count > 0 ? loss_acc / loss_count : 0.0;
    p.val_accuracy = validation.empty() ? 0.0 : window_accuracy(snapshot, validation);
    result.curve.push_back(p);
    loss_acc = 0.0;
    loss_count = 0;
    last_eval = batches;
    if (validation.empty() || p.val_accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = p.val_accuracy;
      result.model = snapshot;
    }
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(config.batch)) {
      batch.clear();
      for (std::size_t j = i; j < std::min(order.size(), i + static_cast<std::size_t>(config.batch)); ++j)
        batch.push_back(train[order[j]]);
      LossAndGrad lg;
      try {
        lg = model.loss_and_grad(batch, {config.l2, loss.regression_weight});
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kNumeric)
          throw Error(ErrorKind::kNumeric, "training diverged at batch " + std::to_string(batches) + " (fold " +
                                               std::to_string(fold) + "): " + e.what());
        throw;
      }
      if (config.momentum > 0.0) {
        velocity = config.momentum * velocity + lg.grad;
        model.parameters() -= config.learning_rate * velocity;
      } else {
        model.parameters() -= config.learning_rate * lg.grad;
      }
      ema.update(model.parameters());
      ++batches;
      loss_acc += lg.data_loss;
      ++loss_count;
      if (batches % config.eval_every == 0) evaluate();
    }
  }
  if (last_eval != batches) evaluate();
  return result;
}

std::vector<TrainResult> train_folds(const TcnShape& shape, const FoldedSamples& samples,
                                     std::span<const Occurrence> occurrences, const TrainConfig& config,
                                     const LossOptions& loss, std::vector<std::vector<int>>* validation_sets) {
  config.validate();
  const int k = config.folds;
  // k == 1: one model, 1/5 of the occurrences held out for validation.
  const int parts = k == 1 ? 5 : k;
  std::mt19937_64 rng(derive_seed(config.seed, 101));
  const auto occ_fold = stratified_folds(occurrences, k == 1 ? 1 : k, rng);
  std::vector<int> sample_fold(samples.refs.size());
  std::uniform_int_distribution<int> pick(0, parts - 1);
  std::vector<int> k1_part;
  if (k == 1) {
    // deal each class round-robin over 5 parts
    k1_part.assign(occurrences.size(), 0);
    std::vector<int> counter(kNumGestureClasses, 0);
    std::vector<std::size_t> order(occurrences.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      const int c = index_of(occurrences[i].interval.label);
      k1_part[i] = counter[c]++ % parts;
    }
  }
  for (std::size_t i = 0; i < samples.refs.size(); ++i) {
    const int occ = samples.occurrence[i];
    if (occ >= 0)
      sample_fold[i] = k == 1 ? k1_part[static_cast<std::size_t>(occ)] : occ_fold[static_cast<std::size_t>(occ)];
    else
      sample_fold[i] = pick(rng);
  }

  std::vector<TrainResult> results(static_cast<std::size_t>(k));
  if (validation_sets) validation_sets->assign(static_cast<std::size_t>(k), {});
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
  auto run = [&](int f) {
    try {
      std::vector<WindowRef> tr, va;
      std::vector<int> va_idx;
      for (std::size_t i = 0; i < samples.refs.size(); ++i) {
        if (sample_fold[i] == f) {
          va.push_back(samples.refs[i]);
          va_idx.push_back(static_cast<int>(i));
        } else {
          tr.push_back(samples.refs[i]);
        }
      }
      results[static_cast<std::size_t>(f)] =
          train_classifier(shape, tr, va, config, derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(f)), f, loss);
      if (validation_sets) (*validation_sets)[static_cast<std::size_t>(f)] = std::move(va_idx);
    } catch (...) {
      errors[static_cast<std::size_t>(f)] = std::current_exception();
    }
  };

  const int workers = std::max(1, std::min(config.jobs, k));
  if (workers == 1) {
    for (int f = 0; f < k; ++f) run(f);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int f = next++; f < k; f = next++) run(f);
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

FeatureMatrix TcnEnsemble::sequence_features(const GestureSequence& seq) const {
  if (input != InputKind::kFrames) throw Error(ErrorKind::kInvalidArgument, "ensemble does not consume frame features");
  FeatureMatrix m = frame_features(seq, features);
  scaler.apply_inplace(m);
  return m;
}

Eigen::VectorXd TcnEnsemble::combined_logits(const WindowRef& window) const {
  return combined_logits_batch(std::span<const WindowRef>(&window, 1)).front();
}

std::vector<Eigen::VectorXd> TcnEnsemble::combined_logits_batch(std::span<const WindowRef> windows) const {
  std::vector<Eigen::VectorXd> out(windows.size());
  for (const auto& m : members) {
    const auto outs = m.forward_batch(windows);
    for (std::size_t b = 0; b < windows.size(); ++b) {
      const double norm = outs[b].logits.norm();
      const Eigen::VectorXd v = norm > 0.0 ? Eigen::VectorXd(outs[b].logits / norm) : outs[b].logits;
      if (out[b].size() == 0)
        out[b] = v;
      else
        out[b] += v;
    }
  }
  return out;
}

Eigen::VectorXd TcnEnsemble::mean_probabilities(const WindowRef& window) const {
  Eigen::VectorXd acc;
  for (const auto& m : members) {
    const auto p = softmax(m.forward(window).logits);
    acc = acc.size() == 0 ? p : Eigen::VectorXd(acc + p);
  }
  return acc / static_cast<double>(members.size());
}

Eigen::VectorXd TcnEnsemble::mean_regression(const WindowRef& window) const {
  Eigen::VectorXd acc;
  for (const auto& m : members) {
    const auto r = m.forward(window).regression;
    acc = acc.size() == 0 ? r : Eigen::VectorXd(acc + r);
  }
  return acc / static_cast<double>(members.size());
}

void TcnEnsemble::validate() const {
  if (members.empty()) throw Error(ErrorKind::kValidation, "ensemble has no members");
  for (const auto& m : members)
    if (m.shape().input_dim != members.front().shape().input_dim || m.shape().window != members.front().shape().window)
      throw Error(ErrorKind::kValidation, "ensemble members disagree on input dimension or window");
  if (!scaler.empty() && scaler.mean.size() != members.front().shape().input_dim)
    throw Error(ErrorKind::kValidation, "ensemble scaler does not match the input dimension");
}

PreparedFeatures prepare_frame_features(std::span<const GestureSequence> sequences, const FrameFeatureSpec& features) {
  PreparedFeatures p;
  p.spec = features;
  if (!is_angle_set(features.set)) p.spec.stats = NormalizationStats::compute(sequences);
  p.features.reserve(sequences.size());
  for (const auto& s : sequences) p.features.push_back(frame_features(s, p.spec));
  std::vector<const FeatureMatrix*> ptrs;
  for (const auto& f : p.features) ptrs.push_back(&f);
  p.scaler = InputScaler::fit(ptrs);
  for (auto& f : p.features) p.scaler.apply_inplace(f);
  return p;
}

TcnEnsemble train_window_ensemble(std::span<const GestureSequence> sequences,
                                  std::span<const std::vector<GestureInterval>> annotations,
                                  const FrameFeatureSpec& features, EnsembleTrainSpec spec,
                                  std::vector<std::string>* log) {
  spec.config.validate();
  if (sequences.size() != annotations.size())
    throw Error(ErrorKind::kInvalidArgument, "sequence/annotation count mismatch");
  TcnEnsemble ens;
  ens.input = InputKind::kFrames;
  auto prepared = prepare_frame_features(sequences, features);
  ens.features = prepared.spec;
  ens.scaler = prepared.scaler;
  const auto& feats = prepared.features;

  std::vector<int> lengths;
  for (const auto& s : sequences) lengths.push_back(s.size());
  std::mt19937_64 rng(derive_seed(spec.config.seed, 7));
  const auto windows = sample_training_windows(lengths, annotations, spec.config, rng, log);
  const auto occurrences = list_occurrences(annotations);

  FoldedSamples samples;
  for (const auto& w : windows) {
    WindowRef r;
    r.source = &feats[static_cast<std::size_t>(w.sequence)];
    r.start = w.start;
    r.label = w.label;
    samples.refs.push_back(r);
    samples.occurrence.push_back(w.occurrence);
  }
  if (log) log->push_back("sampled " + std::to_string(samples.refs.size()) + " training windows");

  spec.shape.input_dim = feature_set_dimension(ens.features.set);
  spec.shape.window = spec.config.window;
  auto results = train_folds(spec.shape, samples, occurrences, spec.config, spec.loss);
  for (auto& r : results) {
    if (log)
      log->push_back("fold " + std::to_string(ens.members.size()) + ": best validation accuracy " +
                     std::to_string(r.best_val_accuracy));
    ens.members.push_back(std::move(r.model));
    ens.curve.insert(ens.curve.end(), r.curve.begin(), r.curve.end());
  }
  return ens;
}

}  // namespace gesturespot
