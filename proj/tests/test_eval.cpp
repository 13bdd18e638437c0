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

#include <random>
#include <sstream>

#include "doctest.h"
#include "eval_oracle.hpp"
#include "gesturespot/eval.hpp"

using namespace gesturespot;

namespace {

GestureInterval iv(Label l, int s, int e, std::optional<int> used = std::nullopt) {
  return GestureInterval{l, s, e, used};
}

}  // namespace

TEST_CASE("matching examples") {
  const std::vector<GestureInterval> gt{iv(Label::kWave, 100, 140)};
  const auto one = [&](GestureInterval p) {
    return match_detections(gt, std::vector<GestureInterval>{p}).status.at(0);
  };
  CHECK(one(iv(Label::kWave, 95, 121)) == MatchStatus::kCorrect);
  CHECK(one(iv(Label::kWave, 95, 118)) == MatchStatus::kDiscarded);
  CHECK(one(iv(Label::kWave, 10, 40)) == MatchStatus::kFalsePositive);
  CHECK(one(iv(Label::kPinch, 95, 140)) == MatchStatus::kDiscarded);
  CHECK(qualifies(iv(Label::kWave, 95, 121), gt[0], 0.5));
  CHECK_FALSE(qualifies(iv(Label::kWave, 95, 118), gt[0], 0.5));
}

TEST_CASE("a second prediction on the same gesture is a discarded duplicate") {
  const std::vector<GestureInterval> gt{iv(Label::kWave, 100, 140)};
  const std::vector<GestureInterval> p{iv(Label::kWave, 100, 135, 150), iv(Label::kWave, 100, 140, 140)};
  const auto m = match_detections(gt, p);
  CHECK(m.status[1] == MatchStatus::kCorrect);  // decided first
  CHECK(m.status[0] == MatchStatus::kDiscarded);
  CHECK(m.duplicate[0]);
  CHECK(m.gt_match[0] == 1);
  CHECK(m.duplicates == 1);
}

TEST_CASE("overlapping ground truth is rejected") {
  const std::vector<GestureInterval> gt{iv(Label::kWave, 0, 10), iv(Label::kGrab, 10, 20)};
  CHECK_THROWS_AS(match_detections(gt, {}), Error);
}

TEST_CASE("detection rate and false-positive score examples") {
  IntervalMap gt, preds;
  for (int i = 0; i < 36; ++i) {
    gt["s"].push_back(iv(Label::kWave, 100 * i, 100 * i + 39));
    if (i < 27) preds["s"].push_back(iv(Label::kWave, 100 * i, 100 * i + 39, 100 * i + 39));
  }
  for (int i = 0; i < 9; ++i) preds["s"].push_back(iv(Label::kWave, 100 * i + 50, 100 * i + 80, 100 * i + 80));
  const auto r = evaluate(gt, preds);
  const auto& wave = r.classes[static_cast<std::size_t>(index_of(Label::kWave))];
  CHECK(wave.detection_rate == 27.0 / 36.0);
  CHECK(*wave.detection_rate == 0.75);
  CHECK(*wave.fp_score == 0.25);
  CHECK_FALSE(r.classes[static_cast<std::size_t>(index_of(Label::kGrab))].detection_rate);

  const auto none = evaluate(gt, {});
  CHECK(*none.classes[static_cast<std::size_t>(index_of(Label::kWave))].detection_rate == 0.0);
  CHECK(*none.classes[static_cast<std::size_t>(index_of(Label::kWave))].fp_score == 0.0);
}

TEST_CASE("Jaccard index examples") {
  const std::vector<GestureInterval> gt{iv(Label::kCircle, 10, 20)};
  const std::vector<GestureInterval> p{iv(Label::kCircle, 15, 25)};
  CHECK(*sequence_jaccard(gt, p, Label::kCircle) == 0.375);
  CHECK(*sequence_jaccard(gt, gt, Label::kCircle) == 1.0);
  CHECK_FALSE(sequence_jaccard(gt, p, Label::kWave));
}

TEST_CASE("delay examples") {
  IntervalMap gt{{"s", {iv(Label::kWave, 50, 90)}}};
  auto r = evaluate(gt, IntervalMap{{"s", {iv(Label::kWave, 50, 90, 69)}}});
  const auto wave = static_cast<std::size_t>(index_of(Label::kWave));
  CHECK(*r.classes[wave].delay_from_start == 19.0);
  CHECK(*r.classes[wave].delay_from_end == -21.0);
  r = evaluate(gt, IntervalMap{{"s", {iv(Label::kWave, 50, 90, 45)}}});
  CHECK(*r.classes[wave].delay_from_start == -5.0);
  r = evaluate(gt, IntervalMap{{"s", {iv(Label::kWave, 50, 90)}}});
  CHECK_FALSE(r.classes[wave].delay_from_start);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("evaluation equals the frame-set oracle on random instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto [gt, preds] = gstest::random_instance(rng);
    const double theta = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
    const auto r = evaluate(gt, preds, theta);
    const auto o = gstest::oracle_evaluate(gt, preds, theta);
    for (int c = 0; c < kNumGestureClasses; ++c) {
      const auto& m = r.classes[static_cast<std::size_t>(c)];
      const auto& x = o.classes[static_cast<std::size_t>(c)];
      REQUIRE(m.gt_count == x.gt);
      REQUIRE(m.correct == x.correct);
      REQUIRE(m.false_positives == x.false_positives);
      REQUIRE(m.discarded == x.discarded);
      REQUIRE(m.correct <= m.gt_count);
      REQUIRE(m.predictions == m.correct + m.false_positives + m.discarded);
      if (x.gt > 0) {
        REQUIRE(*m.detection_rate == static_cast<double>(x.correct) / x.gt);
        REQUIRE(*m.fp_score == static_cast<double>(x.false_positives) / x.gt);
      }
      REQUIRE(m.jaccard.has_value() == !x.jaccards.empty());
      if (m.jaccard) {
        double sum = 0.0;
        for (double j : x.jaccards) sum += j;
        REQUIRE(*m.jaccard == sum / static_cast<double>(x.jaccards.size()));
        REQUIRE(*m.jaccard >= 0.0);
        REQUIRE(*m.jaccard <= 1.0);
      }
      if (x.correct > 0) {
        REQUIRE(*m.delay_from_start == doctest::Approx(x.delay_start_sum / x.correct).epsilon(1e-12));
        REQUIRE(*m.delay_from_end == doctest::Approx(x.delay_end_sum / x.correct).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("every prediction gets exactly one status and each gt at most one match") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const auto [gt, preds] = gstest::random_instance(rng);
    for (const auto& [id, g] : gt) {
      const auto& p = preds.at(id);
      const auto m = match_detections(g, p);
      REQUIRE(m.status.size() == p.size());
      std::vector<int> hits(g.size(), 0);
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (m.status[i] == MatchStatus::kCorrect) {
          REQUIRE(m.target[i] >= 0);
          REQUIRE(qualifies(p[i], g[static_cast<std::size_t>(m.target[i])], 0.5));
          ++hits[static_cast<std::size_t>(m.target[i])];
        } else {
          REQUIRE(m.target[i] == -1);
        }
      }
      for (std::size_t j = 0; j < g.size(); ++j) {
        REQUIRE(hits[j] <= 1);
        REQUIRE((hits[j] == 1) == (m.gt_match[j] >= 0));
      }
    }
  }
}

TEST_CASE("overlap sweep is non-increasing and flat for exact predictions") {
  std::mt19937_64 rng(11);
  std::vector<double> thresholds;
  for (int i = 0; i <= 20; ++i) thresholds.push_back(i / 20.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [gt, preds] = gstest::random_instance(rng);
    const auto curve = overlap_sweep(gt, preds, thresholds);
    REQUIRE(curve.size() == thresholds.size());
    for (std::size_t i = 1; i < curve.size(); ++i) REQUIRE(curve[i].detection_rate <= curve[i - 1].detection_rate);
  }
  IntervalMap gt{{"a", {iv(Label::kWave, 0, 9), iv(Label::kCircle, 20, 40)}}, {"b", {iv(Label::kGrab, 5, 60)}}};
  for (const auto& p : overlap_sweep(gt, gt, thresholds)) {
    // at threshold 1 the strict rule can never hold
    if (p.threshold < 1.0) CHECK(p.detection_rate == 1.0);
  }
  const std::vector<double> unsorted{0.5, 0.2};
  CHECK_THROWS_AS(overlap_sweep(gt, gt, unsorted), Error);
  const std::vector<double> out_of_range{0.5, 1.5};
  CHECK_THROWS_AS(overlap_sweep(gt, gt, out_of_range), Error);
}

TEST_CASE("report CSV layout") {
  IntervalMap gt{{"a", {iv(Label::kWave, 0, 9, 9)}}};
  const auto r = evaluate(gt, gt);
  const auto csv = r.to_csv();
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "scope,name,gt,predictions,correct,false_positives,discarded,duplicates,detection_rate,fp_score,jaccard,"
        "delay_from_start,delay_from_end");
  int rows = 0;
  bool saw_wave = false;
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("class,WAVE,", 0) == 0) {
      saw_wave = true;
      CHECK(line == "class,WAVE,1,1,1,0,0,0,1.000000,0.000000,1.000000,9.000000,0.000000");
    }
  }
  CHECK(saw_wave);
  CHECK(rows == kNumGestureClasses + 4 + 1);
  CHECK(*r.aggregate.detection_rate == 1.0);
  CHECK(r.aggregate.classes == 1);

  const std::vector<SweepPoint> pts{{0.0, 1.0}, {0.5, 0.25}};
  CHECK(sweep_to_csv(pts) == "threshold,detection_rate\n0.000000,1.000000\n0.500000,0.250000\n");
}
