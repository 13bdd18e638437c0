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

#include "gesturespot/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

namespace gesturespot {

namespace {

// Sorted, merged [start, end] runs.
std::vector<std::pair<int, int>> merged_runs(std::span<const GestureInterval> intervals, Label label) {
  std::vector<std::pair<int, int>> runs;
  for (const auto& g : intervals)
    if (g.label == label) runs.emplace_back(g.start, g.end);
  std::sort(runs.begin(), runs.end());
  std::vector<std::pair<int, int>> out;
  for (const auto& r : runs) {
    if (!out.empty() && r.first <= out.back().second + 1)
      out.back().second = std::max(out.back().second, r.second);
    else
      out.push_back(r);
  }
  return out;
}

long long total_length(const std::vector<std::pair<int, int>>& runs) {
  long long n = 0;
  for (const auto& [a, b] : runs) n += b - a + 1;
  return n;
}

long long intersection_length(const std::vector<std::pair<int, int>>& a, const std::vector<std::pair<int, int>>& b) {
  long long n = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    n += overlap_frames(a[i].first, a[i].second, b[j].first, b[j].second);
    if (a[i].second < b[j].second)
      ++i;
    else
      ++j;
  }
  return n;
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Summary summarize(std::span<const ClassMetrics* const> classes) {
  Summary s;
  std::vector<double> dr, fp, ji, ds, de;
  for (const auto* c : classes) {
    if (c->gt_count > 0) ++s.classes;
    if (c->detection_rate) dr.push_back(*c->detection_rate);
    if (c->fp_score) fp.push_back(*c->fp_score);
    if (c->jaccard) ji.push_back(*c->jaccard);
    if (c->delay_from_start) ds.push_back(*c->delay_from_start);
    if (c->delay_from_end) de.push_back(*c->delay_from_end);
  }
  s.detection_rate = mean_of(dr);
  s.fp_score = mean_of(fp);
  s.jaccard = mean_of(ji);
  s.delay_from_start = mean_of(ds);
  s.delay_from_end = mean_of(de);
  return s;
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::string fmt_table(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

constexpr std::array<Category, 4> kCategories = {Category::kStatic, Category::kCoarse, Category::kFine,
                                                 Category::kPeriodic};

}  // namespace

std::string_view match_status_name(MatchStatus s) {
  switch (s) {
    case MatchStatus::kCorrect: return "CORRECT";
    case MatchStatus::kFalsePositive: return "FALSE_POSITIVE";
    case MatchStatus::kDiscarded: return "DISCARDED";
  }
  return "?";
}

bool qualifies(const GestureInterval& p, const GestureInterval& g, double min_overlap) {
  if (p.label != g.label) return false;
  return static_cast<double>(overlap_frames(p, g)) > min_overlap * g.length();
}

MatchResult match_detections(std::span<const GestureInterval> gt, std::span<const GestureInterval> preds,
                             double min_overlap) {
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = i + 1; j < gt.size(); ++j)
      if (overlap_frames(gt[i], gt[j]) > 0) throw Error(ErrorKind::kValidation, "overlapping ground-truth intervals");

  MatchResult r;
  r.gt_match.assign(gt.size(), -1);
  r.status.assign(preds.size(), MatchStatus::kFalsePositive);
  r.target.assign(preds.size(), -1);
  r.duplicate.assign(preds.size(), false);

  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int i) {
    const auto& p = preds[static_cast<std::size_t>(i)];
    return std::make_pair(p.last_frame_used.value_or(p.start), p.start);
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });

  for (int pi : order) {
    const auto& p = preds[static_cast<std::size_t>(pi)];
    int best = -1;
    double best_ratio = -1.0;
    bool intersects = false;
    for (std::size_t gi = 0; gi < gt.size(); ++gi) {
      const int ov = overlap_frames(p, gt[gi]);
      if (ov > 0) intersects = true;
      if (!qualifies(p, gt[gi], min_overlap)) continue;
      const double ratio = static_cast<double>(ov) / gt[gi].length();
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = static_cast<int>(gi);
      }
    }
    auto& st = r.status[static_cast<std::size_t>(pi)];
    if (best >= 0 && r.gt_match[static_cast<std::size_t>(best)] < 0) {
      st = MatchStatus::kCorrect;
      r.gt_match[static_cast<std::size_t>(best)] = pi;
      r.target[static_cast<std::size_t>(pi)] = best;
    } else if (best >= 0) {
      st = MatchStatus::kDiscarded;
      r.duplicate[static_cast<std::size_t>(pi)] = true;
      ++r.duplicates;
    } else {
      st = intersects ? MatchStatus::kDiscarded : MatchStatus::kFalsePositive;
    }
  }
  return r;
}

std::optional<double> sequence_jaccard(std::span<const GestureInterval> gt, std::span<const GestureInterval> preds,
                                       Label label) {
  const auto a = merged_runs(gt, label);
  const auto b = merged_runs(preds, label);
  const long long inter = intersection_length(a, b);
  const long long uni = total_length(a) + total_length(b) - inter;
  if (uni == 0) return std::nullopt;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

EvalReport evaluate(const IntervalMap& gt, const IntervalMap& preds, double min_overlap) {
  if (!(min_overlap >= 0.0 && min_overlap <= 1.0))
    throw Error(ErrorKind::kInvalidArgument, "min_overlap must lie in [0, 1]");
  EvalReport report;
  report.min_overlap = min_overlap;

  std::set<std::string> ids;
  for (const auto& [id, _] : gt) ids.insert(id);
  for (const auto& [id, _] : preds) ids.insert(id);

  const std::vector<GestureInterval> empty;
  std::array<std::vector<double>, kNumGestureClasses> ji, from_start, from_end;
  for (const auto& id : ids) {
    const auto git = gt.find(id);
    const auto pit = preds.find(id);
    const auto& g = git == gt.end() ? empty : git->second;
    const auto& p = pit == preds.end() ? empty : pit->second;
    const auto m = match_detections(g, p, min_overlap);
    for (const auto& gi : g) ++report.classes[static_cast<std::size_t>(index_of(gi.label))].gt_count;
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto& c = report.classes[static_cast<std::size_t>(index_of(p[i].label))];
      ++c.predictions;
      switch (m.status[i]) {
        case MatchStatus::kCorrect: {
          ++c.correct;
          const auto& target = g[static_cast<std::size_t>(m.target[i])];
          if (!p[i].last_frame_used) {
            report.warnings.push_back("prediction " + std::to_string(i) + " of '" + id +
                                      "' lacks last_frame_used; excluded from delays");
            break;
          }
          from_start[static_cast<std::size_t>(index_of(target.label))].push_back(*p[i].last_frame_used - target.start);
          from_end[static_cast<std::size_t>(index_of(target.label))].push_back(*p[i].last_frame_used - target.end);
          break;
        }
        case MatchStatus::kFalsePositive: ++c.false_positives; break;
        case MatchStatus::kDiscarded:
          ++c.discarded;
          if (m.duplicate[i]) ++c.duplicates;
          break;
      }
    }
    for (int c = 0; c < kNumGestureClasses; ++c)
      if (auto j = sequence_jaccard(g, p, label_from_index(c))) ji[static_cast<std::size_t>(c)].push_back(*j);
  }

  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    auto& m = report.classes[c];
    if (m.gt_count > 0) {
      m.detection_rate = static_cast<double>(m.correct) / m.gt_count;
      m.fp_score = static_cast<double>(m.false_positives) / m.gt_count;
    }
    m.jaccard = mean_of(ji[c]);
    m.delay_samples = static_cast<int>(from_start[c].size());
    m.delay_from_start = mean_of(from_start[c]);
    m.delay_from_end = mean_of(from_end[c]);
  }

  std::vector<const ClassMetrics*> all;
  for (const auto& c : report.classes) all.push_back(&c);
  report.aggregate = summarize(all);
  for (std::size_t k = 0; k < kCategories.size(); ++k) {
    std::vector<const ClassMetrics*> members;
    for (int c = 0; c < kNumGestureClasses; ++c)
      if (category_of(label_from_index(c)) == kCategories[k])
        members.push_back(&report.classes[static_cast<std::size_t>(c)]);
    report.categories[k] = summarize(members);
  }
  return report;
}

std::string EvalReport::to_csv() const {
  std::string out =
      "scope,name,gt,predictions,correct,false_positives,discarded,duplicates,detection_rate,fp_score,jaccard,"
      "delay_from_start,delay_from_end\n";
  for (int c = 0; c < kNumGestureClasses; ++c) {
    const auto& m = classes[static_cast<std::size_t>(c)];
    out += "class," + std::string(label_name(label_from_index(c))) + ',' + std::to_string(m.gt_count) + ',' +
           std::to_string(m.predictions) + ',' + std::to_string(m.correct) + ',' +
           std::to_string(m.false_positives) + ',' + std::to_string(m.discarded) + ',' +
           std::to_string(m.duplicates) + ',' + fmt(m.detection_rate) + ',' + fmt(m.fp_score) + ',' +
           fmt(m.jaccard) + ',' + fmt(m.delay_from_start) + ',' + fmt(m.delay_from_end) + '\n';
  }
  auto summary_row = [&out, this](std::string_view scope, std::string_view name, const Summary& s,
                                  std::optional<Category> cat) {
    ClassMetrics t;
    for (int c = 0; c < kNumGestureClasses; ++c) {
      if (cat && category_of(label_from_index(c)) != *cat) continue;
      const auto& m = classes[static_cast<std::size_t>(c)];
      t.gt_count += m.gt_count;
      t.predictions += m.predictions;
      t.correct += m.correct;
      t.false_positives += m.false_positives;
      t.discarded += m.discarded;
      t.duplicates += m.duplicates;
    }
    out += std::string(scope) + ',' + std::string(name) + ',' + std::to_string(t.gt_count) + ',' +
           std::to_string(t.predictions) + ',' + std::to_string(t.correct) + ',' +
           std::to_string(t.false_positives) + ',' + std::to_string(t.discarded) + ',' +
           std::to_string(t.duplicates) + ',' + fmt(s.detection_rate) + ',' + fmt(s.fp_score) + ',' +
           fmt(s.jaccard) + ',' + fmt(s.delay_from_start) + ',' + fmt(s.delay_from_end) + '\n';
  };
  for (std::size_t k = 0; k < kCategories.size(); ++k)
    summary_row("category", category_name(kCategories[k]), categories[k], kCategories[k]);
  summary_row("aggregate", "all", aggregate, std::nullopt);
  return out;
}

std::string EvalReport::to_table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %5s %5s %5s %7s %7s %7s %9s %9s\n", "class", "gt", "ok", "fp", "DR",
                "FP", "JI", "d_start", "d_end");
  out += line;
  auto row = [&](std::string_view name, int gt_n, int ok, int fp, const std::optional<double>& dr,
                 const std::optional<double>& fps, const std::optional<double>& ji, const std::optional<double>& ds,
                 const std::optional<double>& de) {
    std::snprintf(line, sizeof line, "%-10.*s %5d %5d %5d %7s %7s %7s %9s %9s\n", static_cast<int>(name.size()),
                  name.data(), gt_n, ok, fp, fmt_table(dr).c_str(), fmt_table(fps).c_str(), fmt_table(ji).c_str(),
                  fmt_table(ds).c_str(), fmt_table(de).c_str());
    out += line;
  };
  int gt_total = 0, ok_total = 0, fp_total = 0;
  for (int c = 0; c < kNumGestureClasses; ++c) {
    const auto& m = classes[static_cast<std::size_t>(c)];
    row(label_name(label_from_index(c)), m.gt_count, m.correct, m.false_positives, m.detection_rate, m.fp_score,
        m.jaccard, m.delay_from_start, m.delay_from_end);
    gt_total += m.gt_count;
    ok_total += m.correct;
    fp_total += m.false_positives;
  }
  for (std::size_t k = 0; k < kCategories.size(); ++k) {
    int g = 0, o = 0, f = 0;
    for (int c = 0; c < kNumGestureClasses; ++c)
      if (category_of(label_from_index(c)) == kCategories[k]) {
        g += classes[static_cast<std::size_t>(c)].gt_count;
        o += classes[static_cast<std::size_t>(c)].correct;
        f += classes[static_cast<std::size_t>(c)].false_positives;
      }
    const auto& s = categories[k];
    row(category_name(kCategories[k]), g, o, f, s.detection_rate, s.fp_score, s.jaccard, s.delay_from_start,
        s.delay_from_end);
  }
  row("all", gt_total, ok_total, fp_total, aggregate.detection_rate, aggregate.fp_score, aggregate.jaccard,
      aggregate.delay_from_start, aggregate.delay_from_end);
  return out;
}

std::vector<SweepPoint> overlap_sweep(const IntervalMap& gt, const IntervalMap& preds,
                                      std::span<const double> thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0))
      throw Error(ErrorKind::kInvalidArgument, "sweep thresholds must lie in [0, 1]");
    if (i > 0 && thresholds[i] < thresholds[i - 1])
      throw Error(ErrorKind::kInvalidArgument, "sweep thresholds must be sorted ascending");
  }
  std::vector<SweepPoint> out;
  for (double t : thresholds) {
    const auto r = evaluate(gt, preds, t);
    out.push_back({t, r.aggregate.detection_rate.value_or(0.0)});
  }
  return out;
}

std::string sweep_to_csv(std::span<const SweepPoint> points) {
  std::string out = "threshold,detection_rate\n";
  char buf[96];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", p.threshold, p.detection_rate);
    out += buf;
  }
  return out;
}

}  // namespace gesturespot
