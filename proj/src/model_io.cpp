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

#include "gesturespot/model_io.hpp"

#include <vector>

#include "gesturespot/io.hpp"

namespace gesturespot {

namespace {

constexpr std::string_view kMagic = "gesturespot-model 1";

void append_row(std::string& out, const double* v, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += format_double(v[i]);
  }
  out += '\n';
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool done() {
    skip_blank();
    return pos_ >= text_.size();
  }

  // Next non-empty line split on spaces.
  std::vector<std::string_view> next() {
    skip_blank();
    if (pos_ >= text_.size()) fail("unexpected end of model file");
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    std::string_view line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && line[i] == ' ') ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ') ++j;
      if (j > i) words.push_back(line.substr(i, j - i));
      i = j;
    }
    return words;
  }

  std::string raw_line() {
    if (pos_ >= text_.size()) fail("unexpected end of model file");
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    std::string line(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    ++line_no_;
    return line;
  }

  std::vector<std::string_view> expect(std::string_view keyword, std::size_t min_words = 1) {
    auto w = next();
    if (w.empty() || w[0] != keyword) fail("expected '" + std::string(keyword) + "'");
    if (w.size() < min_words) fail("too few fields after '" + std::string(keyword) + "'");
    return w;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::kParse, "model file line " + std::to_string(line_no_) + ": " + what);
  }

  int to_int(std::string_view w) const {
    try {
      return static_cast<int>(parse_integer(w));
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  double to_double(std::string_view w) const {
    try {
      return parse_double(w);
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  Eigen::RowVectorXd row(Eigen::Index n) {
    const auto w = next();
    if (static_cast<Eigen::Index>(w.size()) != n)
      fail("expected " + std::to_string(n) + " values, got " + std::to_string(w.size()));
    Eigen::RowVectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = to_double(w[static_cast<std::size_t>(i)]);
    return r;
  }

 private:
  void skip_blank() {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      const auto line = text_.substr(pos_, end - pos_);
      if (line.find_first_not_of(" \r") != std::string_view::npos) return;
      pos_ = end + 1;
      ++line_no_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

void write_ensemble(std::string& out, const std::string& role, const TcnEnsemble& e) {
  e.validate();
  out += "ensemble " + role + '\n';
  out += std::string("input ") + (e.input == InputKind::kFrames ? "frames" : "baseline") + '\n';
  out += "features " + std::string(feature_set_name(e.features.set)) + '\n';
  out += "axis ";
  append_row(out, e.features.axis.data(), 3);
  out += "topology";
  for (int p : e.features.topology.parent) out += ' ' + std::to_string(p);
  out += '\n';
  out += "norm";
  for (int c = 0; c < 3; ++c) out += ' ' + format_double(e.features.stats.mean[c]);
  for (int c = 0; c < 3; ++c) out += ' ' + format_double(e.features.stats.stddev[c]);
  out += '\n';
  out += "baseline " + std::to_string(e.baseline.steps) + ' ' + std::to_string(e.baseline.jpd_pairs.size());
  for (const auto& [a, b] : e.baseline.jpd_pairs) out += ' ' + std::to_string(a) + ' ' + std::to_string(b);
  for (int j : e.baseline.palm_joints) out += ' ' + std::to_string(j);
  out += '\n';
  out += "scaler " + std::to_string(e.scaler.mean.size()) + '\n';
  if (e.scaler.mean.size() > 0) {
    append_row(out, e.scaler.mean.data(), e.scaler.mean.size());
    append_row(out, e.scaler.inv_std.data(), e.scaler.inv_std.size());
  }
  out += "members " + std::to_string(e.members.size()) + '\n';
  for (const auto& m : e.members) {
    const auto& s = m.shape();
    out += "member " + std::to_string(s.input_dim) + ' ' + std::to_string(s.window) + ' ' + std::to_string(s.conv1) +
           ' ' + std::to_string(s.conv2) + ' ' + std::to_string(s.kernel) + ' ' + std::to_string(s.classes) + ' ' +
           std::to_string(s.regression) + ' ' + format_double(s.leaky_slope) + '\n';
    for (const auto& t : tensor_layout(s)) {
      out += "tensor " + t.name + ' ' + std::to_string(t.rows) + ' ' + std::to_string(t.cols) + '\n';
      for (int r = 0; r < t.rows; ++r)
        append_row(out, m.parameters().data() + t.offset + static_cast<std::size_t>(r) * t.cols, t.cols);
    }
  }
  out += "end\n";
}

TcnEnsemble read_ensemble(LineReader& in) {
  TcnEnsemble e;
  auto w = in.expect("input", 2);
  if (w[1] == "frames")
    e.input = InputKind::kFrames;
  else if (w[1] == "baseline")
    e.input = InputKind::kBaselineSegment;
  else
    in.fail("unknown input kind '" + std::string(w[1]) + "'");
  w = in.expect("features", 2);
  try {
    e.features.set = parse_feature_set(w[1]);
  } catch (const Error& err) {
    in.fail(err.what());
  }
  w = in.expect("axis", 4);
  for (int c = 0; c < 3; ++c) e.features.axis[c] = in.to_double(w[static_cast<std::size_t>(1 + c)]);
  w = in.expect("topology", 1 + kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) e.features.topology.parent[static_cast<std::size_t>(j)] = in.to_int(w[static_cast<std::size_t>(1 + j)]);
  w = in.expect("norm", 7);
  for (int c = 0; c < 3; ++c) {
    e.features.stats.mean[c] = in.to_double(w[static_cast<std::size_t>(1 + c)]);
    e.features.stats.stddev[c] = in.to_double(w[static_cast<std::size_t>(4 + c)]);
  }
  w = in.expect("baseline", 3);
  e.baseline.steps = in.to_int(w[1]);
  const int pairs = in.to_int(w[2]);
  if (pairs < 0 || w.size() != static_cast<std::size_t>(3 + 2 * pairs + 3)) in.fail("malformed baseline record");
  e.baseline.jpd_pairs.clear();
  for (int i = 0; i < pairs; ++i)
    e.baseline.jpd_pairs.emplace_back(in.to_int(w[static_cast<std::size_t>(3 + 2 * i)]),
                                      in.to_int(w[static_cast<std::size_t>(4 + 2 * i)]));
  for (int k = 0; k < 3; ++k) e.baseline.palm_joints[static_cast<std::size_t>(k)] = in.to_int(w[static_cast<std::size_t>(3 + 2 * pairs + k)]);
  w = in.expect("scaler", 2);
  const int dim = in.to_int(w[1]);
  if (dim < 0) in.fail("negative scaler dimension");
  if (dim > 0) {
    e.scaler.mean = in.row(dim);
    e.scaler.inv_std = in.row(dim);
  }
  w = in.expect("members", 2);
  const int k = in.to_int(w[1]);
  if (k < 1) in.fail("ensemble needs at least one member");
  for (int m = 0; m < k; ++m) {
    w = in.expect("member", 9);
    TcnShape s;
    s.input_dim = in.to_int(w[1]);
    s.window = in.to_int(w[2]);
    s.conv1 = in.to_int(w[3]);
    s.conv2 = in.to_int(w[4]);
    s.kernel = in.to_int(w[5]);
    s.classes = in.to_int(w[6]);
    s.regression = in.to_int(w[7]);
    s.leaky_slope = in.to_double(w[8]);
    try {
      s.validate();
    } catch (const Error& err) {
      in.fail(err.what());
    }
    TcnModel model(s);
    for (const auto& t : tensor_layout(s)) {
      w = in.expect("tensor", 4);
      if (w[1] != t.name || in.to_int(w[2]) != t.rows || in.to_int(w[3]) != t.cols)
        in.fail("expected tensor " + t.name + " " + std::to_string(t.rows) + "x" + std::to_string(t.cols));
      for (int r = 0; r < t.rows; ++r)
        model.parameters().segment(static_cast<Eigen::Index>(t.offset) + static_cast<Eigen::Index>(r) * t.cols, t.cols) =
            in.row(t.cols).transpose();
    }
    e.members.push_back(std::move(model));
  }
  in.expect("end");
  try {
    e.validate();
  } catch (const Error& err) {
    throw Error(ErrorKind::kParse, std::string("model file: ") + err.what());
  }
  return e;
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kVoting: return "voting";
    case Strategy::kFsm: return "fsm";
    case Strategy::kProposal: return "proposal";
    case Strategy::kBaseline: return "baseline";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : {Strategy::kVoting, Strategy::kFsm, Strategy::kProposal, Strategy::kBaseline})
    if (strategy_name(s) == name) return s;
  throw Error(ErrorKind::kInvalidArgument,
              "unknown strategy '" + std::string(name) + "' (expected voting, fsm, proposal or baseline)");
}

const TcnEnsemble& ModelBundle::ensemble(const std::string& role) const {
  const auto it = ensembles.find(role);
  if (it == ensembles.end())
    throw Error(ErrorKind::kValidation,
                "model for strategy " + std::string(strategy_name(strategy)) + " lacks the '" + role + "' ensemble");
  return it->second;
}

std::string write_model(const ModelBundle& model) {
  std::string out(kMagic);
  out += '\n';
  out += "strategy " + std::string(strategy_name(model.strategy)) + '\n';
  if (model.thresholds) {
    out += "thresholds ";
    append_row(out, model.thresholds->data(), kNumLabels);
  }
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < model.config.size();) {
    std::size_t end = model.config.find('\n', i);
    if (end == std::string::npos) end = model.config.size();
    if (end > i) lines.push_back(model.config.substr(i, end - i));
    i = end + 1;
  }
  out += "config " + std::to_string(lines.size()) + '\n';
  for (const auto& l : lines) out += l + '\n';
  for (const auto& [role, e] : model.ensembles) write_ensemble(out, role, e);
  return out;
}

ModelBundle parse_model(std::string_view text) {
  LineReader in(text);
  {
    const auto w = in.next();
    if (w.size() != 2 || w[0] != "gesturespot-model") in.fail("not a gesturespot model file");
    if (w[1] != "1") in.fail("unsupported model version " + std::string(w[1]));
  }
  ModelBundle m;
  auto w = in.expect("strategy", 2);
  try {
    m.strategy = parse_strategy(w[1]);
  } catch (const Error& e) {
    in.fail(e.what());
  }
  w = in.next();
  if (!w.empty() && w[0] == "thresholds") {
    if (w.size() != 1 + kNumLabels) in.fail("thresholds need 17 values");
    std::array<double, kNumLabels> t{};
    for (int i = 0; i < kNumLabels; ++i) t[static_cast<std::size_t>(i)] = in.to_double(w[static_cast<std::size_t>(1 + i)]);
    m.thresholds = t;
    w = in.next();
  }
  if (w.size() != 2 || w[0] != "config") in.fail("expected 'config'");
  const int n = in.to_int(w[1]);
  for (int i = 0; i < n; ++i) m.config += in.raw_line() + '\n';
  while (!in.done()) {
    w = in.expect("ensemble", 2);
    const std::string role(w[1]);
    if (m.ensembles.count(role)) in.fail("duplicate ensemble '" + role + "'");
    m.ensembles.emplace(role, read_ensemble(in));
  }
  return m;
}

}  // namespace gesturespot
