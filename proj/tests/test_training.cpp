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

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "gesturespot/synthgen.hpp"
#include "gesturespot/training.hpp"

using namespace gesturespot;

namespace {

const WindowSample* find_start(const std::vector<WindowSample>& v, int seq, int start) {
  for (const auto& w : v)
    if (w.sequence == seq && w.start == start) return &w;
  return nullptr;
}

// Four separable classes: each adds a class-specific bump to a noisy window.
struct Toy {
  std::vector<FeatureMatrix> windows;
  std::vector<WindowRef> train, validation;
};

Toy make_toy(int per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.6);
  Toy toy;
  toy.windows.reserve(static_cast<std::size_t>(per_class) * 4);
  for (int i = 0; i < per_class * 4; ++i) {
    const int c = i % 4;
    FeatureMatrix m(10, 8);
    for (int t = 0; t < 10; ++t)
      for (int d = 0; d < 8; ++d) m(t, d) = noise(rng) + ((d == 2 * c || d == 2 * c + 1) && t >= 3 + c ? 1.0 : 0.0);
    toy.windows.push_back(std::move(m));
  }
  for (std::size_t i = 0; i < toy.windows.size(); ++i) {
    WindowRef r;
    r.source = &toy.windows[i];
    r.label = static_cast<int>(i % 4);
    (i % 5 == 4 ? toy.validation : toy.train).push_back(r);
  }
  return toy;
}

TcnShape toy_shape() {
  TcnShape s;
  s.input_dim = 8;
  s.window = 10;
  s.conv1 = 16;
  s.conv2 = 8;
  s.kernel = 3;
  s.classes = 4;
  return s;
}

}  // namespace

TEST_CASE("training windows follow the half-overlap rule") {
  const std::vector<int> lengths{200};
  const std::vector<std::vector<GestureInterval>> ann{{GestureInterval{Label::kWave, 100, 139, std::nullopt}}};
  TrainConfig cfg;
  cfg.background_keep = 1.0;
  std::mt19937_64 rng(1);
  const auto w = sample_training_windows(lengths, ann, cfg, rng);

  const auto* in = find_start(w, 0, 95);  // [95,114] overlaps 15 frames
  REQUIRE(in != nullptr);
  CHECK(in->label == index_of(Label::kWave));
  CHECK(in->occurrence == 0);
  CHECK(find_start(w, 0, 131) == nullptr);  // [131,150] overlaps 9 frames
  const auto* edge = find_start(w, 0, 130);  // overlaps 10 frames
  REQUIRE(edge != nullptr);
  CHECK(edge->label == index_of(Label::kWave));
  const auto* bg = find_start(w, 0, 10);
  REQUIRE(bg != nullptr);
  CHECK(bg->label == kNumGestureClasses);
  CHECK(bg->occurrence == -1);
  CHECK(find_start(w, 0, 85) == nullptr);  // overlaps 5 frames
  CHECK(find_start(w, 0, 80) != nullptr);  // [80,99] touches nothing

  int labeled = 0;
  for (const auto& s : w) labeled += s.label == index_of(Label::kWave) ? 1 : 0;
  CHECK(labeled == 130 - 90 + 1);  // starts 90..130
}

TEST_CASE("background windows are subsampled at the keep rate") {
  const std::vector<int> lengths{120};
  const std::vector<std::vector<GestureInterval>> ann{{}};
  TrainConfig cfg;
  std::mt19937_64 a(7), b(7);
  const auto wa = sample_training_windows(lengths, ann, cfg, a);
  const auto wb = sample_training_windows(lengths, ann, cfg, b);
  CHECK(wa.size() == wb.size());
  CHECK(wa.size() >= 2);
  CHECK(wa.size() <= 25);

  std::size_t total = 0;
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 200; ++rep) total += sample_training_windows(lengths, ann, cfg, rng).size();
  CHECK(static_cast<double>(total) / 200.0 == doctest::Approx(10.1).epsilon(0.1));

  cfg.background_keep = 1.0;
  CHECK(sample_training_windows(lengths, ann, cfg, rng).size() == 101);
}

TEST_CASE("sequences shorter than the window are skipped with a warning") {
  const std::vector<int> lengths{15, 40};
  const std::vector<std::vector<GestureInterval>> ann{{}, {}};
  TrainConfig cfg;
  cfg.background_keep = 1.0;
  std::mt19937_64 rng(1);
  std::vector<std::string> warnings;
  const auto w = sample_training_windows(lengths, ann, cfg, rng, &warnings);
  CHECK(w.size() == 21);
  CHECK(warnings.size() == 1);
}

TEST_CASE("stratified folds deal every class round-robin") {
  std::vector<Occurrence> occ;
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 7 + c; ++i) occ.push_back({i, GestureInterval{label_from_index(c), 10 * i, 10 * i + 5, {}}});
  std::mt19937_64 rng(3);
  const auto folds = stratified_folds(occ, 3, rng);
  REQUIRE(folds.size() == occ.size());
  std::map<int, std::array<int, 3>> per_class;
  for (std::size_t i = 0; i < occ.size(); ++i) per_class[index_of(occ[i].interval.label)][folds[i]]++;
  for (const auto& [c, counts] : per_class) {
    const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
    CHECK(*mx - *mn <= 1);
  }
  std::vector<Occurrence> scarce(occ.begin(), occ.begin() + 2);
  CHECK_THROWS_AS(stratified_folds(scarce, 3, rng), Error);
}

TEST_CASE("EMA is the closed-form convex combination") {
  const double d = 0.9;
  ParameterEma ema{d, Eigen::VectorXd::Constant(1, 2.0)};
  const std::vector<double> theta{1.0, -3.0, 0.5, 4.0, 2.5, -1.0};
  for (double t : theta) ema.update(Eigen::VectorXd::Constant(1, t));
  const int m = static_cast<int>(theta.size());
  double expected = std::pow(d, m) * 2.0;
  for (int i = 1; i <= m; ++i) expected += (1 - d) * std::pow(d, m - i) * theta[static_cast<std::size_t>(i - 1)];
  CHECK(ema.value[0] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("toy four-class problem is learned") {
  const Toy toy = make_toy(100, 11);
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.batch = 15;
  cfg.learning_rate = 0.01;
  cfg.eval_every = 50;
  const auto r = train_classifier(toy_shape(), toy.train, toy.validation, cfg, 5);
  CHECK(r.best_val_accuracy >= 0.95);
  CHECK(window_accuracy(r.model, toy.validation) == doctest::Approx(r.best_val_accuracy));
  CHECK_FALSE(r.curve.empty());
}

TEST_CASE("training is bit-reproducible") {
  const Toy toy = make_toy(20, 12);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.eval_every = 7;
  const auto a = train_classifier(toy_shape(), toy.train, toy.validation, cfg, 9);
  const auto b = train_classifier(toy_shape(), toy.train, toy.validation, cfg, 9);
  CHECK(a.model.parameters() == b.model.parameters());
  cfg.momentum = 0.9;
  const auto c = train_classifier(toy_shape(), toy.train, toy.validation, cfg, 9);
  CHECK(c.model.parameters() != a.model.parameters());
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.background_keep = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.batch = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.ema_decay = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("input scaler standardizes every column") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(3.0, 2.0);
  FeatureMatrix a(50, 4), b(30, 4);
  for (int r = 0; r < 50; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = c == 3 ? 1.0 : n(rng);
  for (int r = 0; r < 30; ++r)
    for (int c = 0; c < 4; ++c) b(r, c) = c == 3 ? 1.0 : n(rng);
  const FeatureMatrix* src[] = {&a, &b};
  const auto s = InputScaler::fit(src);
  s.apply_inplace(a);
  s.apply_inplace(b);
  FeatureMatrix all(80, 4);
  all << a, b;
  for (int c = 0; c < 3; ++c) {
    const double mean = all.col(c).mean();
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::sqrt((all.col(c).array() - mean).square().mean()) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(all.col(3).isZero(0));
}

TEST_CASE("k = 1 trains one model on a single split") {
  const Toy toy = make_toy(25, 13);
  FoldedSamples samples;
  std::vector<Occurrence> occ;
  for (std::size_t i = 0; i < toy.train.size(); ++i) {
    samples.refs.push_back(toy.train[i]);
    samples.occurrence.push_back(static_cast<int>(i));
    occ.push_back({0, GestureInterval{label_from_index(toy.train[i].label), 0, 1, {}}});
  }
  TrainConfig cfg;
  cfg.folds = 1;
  cfg.epochs = 1;
  std::vector<std::vector<int>> val;
  const auto r = train_folds(toy_shape(), samples, occ, cfg, {}, &val);
  REQUIRE(r.size() == 1);
  REQUIRE(val.size() == 1);
  CHECK(val[0].size() == doctest::Approx(samples.refs.size() / 5.0).epsilon(0.1));
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 10; ++s)
    for (std::uint64_t k = 0; k < 10; ++k) seen.insert(derive_seed(s, k));
  CHECK(seen.size() == 100);
}

TEST_CASE("window ensemble on a small generated corpus") {
  GenConfig gen;
  gen.sequences = 16;
  gen.min_gestures = 4;
  gen.max_gestures = 4;
  const auto data = generate_dataset(gen);
  std::vector<std::vector<GestureInterval>> ann;
  for (const auto& s : data.data.sequences) ann.push_back(data.data.annotations.at(s.id));
  EnsembleTrainSpec spec;
  spec.config.folds = 2;
  spec.config.epochs = 1;
  std::vector<std::string> log;
  const auto e = train_window_ensemble(data.data.sequences, ann, FrameFeatureSpec{}, spec, &log);
  CHECK(e.members.size() == 2);
  CHECK(e.window() == 20);
  CHECK(e.members[0].parameter_count() == 125233);
  CHECK(e.scaler.mean.size() == 325);
  CHECK_FALSE(log.empty());
  CHECK_NOTHROW(e.validate());
  const auto f = e.sequence_features(data.data.sequences[0]);
  WindowRef r;
  r.source = &f;
  r.start = 5;
  const auto p = e.mean_probabilities(r);
  CHECK(p.sum() == doctest::Approx(1.0));
}
