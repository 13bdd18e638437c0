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

// Loop-level reference implementation of the classifier and its loss, plus
// a central finite-difference gradient check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gesturespot/tcn.hpp"

namespace gstest {

using namespace gesturespot;

struct ReferenceOutput {
  std::vector<double> logits;
  std::vector<double> regression;
  std::vector<std::vector<double>> a2;  // window x conv2
  double min_abs_preactivation = std::numeric_limits<double>::infinity();
};

inline double param(const TcnModel& m, const std::map<std::string, TensorInfo>& layout, const std::string& name,
                    int r, int c) {
  const auto& t = layout.at(name);
  return m.parameters()[static_cast<Eigen::Index>(t.offset) + r * t.cols + c];
}

inline ReferenceOutput reference_forward(const TcnModel& m, const FeatureMatrix& x) {
  const TcnShape& s = m.shape();
  std::map<std::string, TensorInfo> layout;
  for (const auto& t : tensor_layout(s)) layout[t.name] = t;
  ReferenceOutput out;
  auto leaky = [&](double z) {
    out.min_abs_preactivation = std::min(out.min_abs_preactivation, std::abs(z));
    return z > 0 ? z : s.leaky_slope * z;
  };
  std::vector<std::vector<double>> a1(s.window, std::vector<double>(s.conv1));
  for (int t = 0; t < s.window; ++t)
    for (int c = 0; c < s.conv1; ++c) {
      double z = param(m, layout, "conv1.bias", 0, c);
      for (int k = 0; k < s.kernel && k <= t; ++k)
        for (int i = 0; i < s.input_dim; ++i) z += x(t - k, i) * param(m, layout, "conv1.weight", k * s.input_dim + i, c);
      a1[t][c] = leaky(z);
    }
  out.a2.assign(s.window, std::vector<double>(s.conv2));
  for (int t = 0; t < s.window; ++t)
    for (int c = 0; c < s.conv2; ++c) {
      double z = param(m, layout, "conv2.bias", 0, c);
      for (int k = 0; k < s.kernel && k <= t; ++k)
        for (int i = 0; i < s.conv1; ++i) z += a1[t - k][i] * param(m, layout, "conv2.weight", k * s.conv1 + i, c);
      out.a2[t][c] = leaky(z);
    }
  auto linear = [&](const std::string& prefix, int rows) {
    std::vector<double> y(rows);
    for (int r = 0; r < rows; ++r) {
      double v = param(m, layout, prefix + ".bias", 0, r);
      for (int t = 0; t < s.window; ++t)
        for (int c = 0; c < s.conv2; ++c) v += param(m, layout, prefix + ".weight", r, t * s.conv2 + c) * out.a2[t][c];
      y[r] = v;
    }
    return y;
  };
  out.logits = linear("head", s.classes);
  if (s.regression > 0) out.regression = linear("reg", s.regression);
  return out;
}

struct Sample {
  FeatureMatrix x;
  int label = 0;
  bool has_target = false;
  double target[2] = {0.0, 0.0};
};

inline double reference_loss(const TcnModel& m, std::span<const Sample> batch, const LossOptions& opt) {
  double ce = 0.0, reg = 0.0;
  int targets = 0;
  for (const auto& b : batch) {
    const auto o = reference_forward(m, b.x);
    const double mx = *std::max_element(o.logits.begin(), o.logits.end());
    double z = 0.0;
    for (double l : o.logits) z += std::exp(l - mx);
    ce += std::log(z) + mx - o.logits[b.label];
    if (b.has_target && !o.regression.empty()) {
      ++targets;
      for (std::size_t r = 0; r < o.regression.size(); ++r) reg += std::pow(o.regression[r] - b.target[r], 2);
    }
  }
  ce /= static_cast<double>(batch.size());
  if (targets > 0) reg /= targets;
  return ce + opt.regression_weight * reg + opt.l2 * m.parameters().squaredNorm();
}

inline std::vector<WindowRef> refs_of(std::span<const Sample> batch) {
  std::vector<WindowRef> refs;
  for (const auto& b : batch) {
    WindowRef r;
    r.source = &b.x;
    r.label = b.label;
    r.has_target = b.has_target;
    r.target[0] = b.target[0];
    r.target[1] = b.target[1];
    refs.push_back(r);
  }
  return refs;
}

struct GradCheck {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  double max_loss_difference = 0.0;  // analytic loss vs reference loss
  std::size_t parameters = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor).
inline double relative_error(double a, double n, double floor) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

inline constexpr double kGradFloor = 1e-4;

// Draws a small random model and batch whose pre-activations all stay at
// least `margin` away from the activation kink, so a step of h cannot cross it.
struct GradProblem {
  TcnModel model;
  std::vector<Sample> batch;
  LossOptions options;
};

inline GradProblem random_grad_problem(std::mt19937_64& rng, double margin = 1e-3) {
  std::uniform_int_distribution<int> in(2, 6), win(3, 8), c1(2, 5), c2(2, 4), ker(2, 3), cls(2, 5), reg(0, 1);
  std::uniform_real_distribution<double> l2(0.0, 1e-2), u(-1.0, 1.0);
  for (;;) {
    TcnShape s;
    s.input_dim = in(rng);
    s.window = win(rng);
    s.conv1 = c1(rng);
    s.conv2 = c2(rng);
    s.kernel = ker(rng);
    s.classes = cls(rng);
    s.regression = reg(rng) ? 2 : 0;
    GradProblem p;
    p.model = TcnModel::initialized(s, rng());
    for (int i = 0; i < p.model.parameters().size(); ++i) p.model.parameters()[i] += 0.3 * u(rng);
    p.options.l2 = l2(rng);
    p.options.regression_weight = 0.5 + std::abs(u(rng));
    bool ok = true;
    for (int b = 0; b < 3 && ok; ++b) {
      Sample smp;
      smp.x = FeatureMatrix(s.window, s.input_dim);
      for (int r = 0; r < s.window; ++r)
        for (int c = 0; c < s.input_dim; ++c) smp.x(r, c) = u(rng);
      smp.label = std::uniform_int_distribution<int>(0, s.classes - 1)(rng);
      smp.has_target = s.regression > 0 && b != 1;
      smp.target[0] = 0.5 * (u(rng) + 1.0);
      smp.target[1] = 0.5 * (u(rng) + 1.0);
      ok = reference_forward(p.model, smp.x).min_abs_preactivation >= margin;
      p.batch.push_back(std::move(smp));
    }
    if (ok) return p;
  }
}

inline GradCheck check_gradient(const GradProblem& p, double h = 1e-5) {
  const auto refs = refs_of(p.batch);
  const auto analytic = p.model.loss_and_grad(refs, p.options);
  GradCheck out;
  out.parameters = static_cast<std::size_t>(p.model.parameters().size());
  out.max_loss_difference = std::abs(analytic.loss - reference_loss(p.model, p.batch, p.options));
  TcnModel probe = p.model;
  for (Eigen::Index i = 0; i < probe.parameters().size(); ++i) {
    const double orig = probe.parameters()[i];
    probe.parameters()[i] = orig + h;
    const double up = probe.loss_and_grad(refs, p.options).loss;
    probe.parameters()[i] = orig - h;
    const double down = probe.loss_and_grad(refs, p.options).loss;
    probe.parameters()[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    out.max_relative_error = std::max(out.max_relative_error, relative_error(analytic.grad[i], numeric, kGradFloor));
    out.max_absolute_error = std::max(out.max_absolute_error, std::abs(analytic.grad[i] - numeric));
  }
  return out;
}

}  // namespace gstest
