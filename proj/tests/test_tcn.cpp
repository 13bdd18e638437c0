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
#include <random>

#include "doctest.h"
#include "gesturespot/tcn.hpp"
#include "tcn_oracle.hpp"

using namespace gesturespot;

namespace {

FeatureMatrix random_window(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  FeatureMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = n(rng);
  return m;
}

}  // namespace

TEST_CASE("default architecture has 125,233 parameters") {
  const TcnShape s;
  CHECK(s.parameter_count() == 325 * 5 * 64 + 64 + 64 * 5 * 32 + 32 + (20 * 32) * 17 + 17);
  CHECK(s.parameter_count() == 125233);
  CHECK(TcnModel::initialized(s, 1).parameter_count() == 125233);
  TcnShape with_reg = s;
  with_reg.regression = 2;
  CHECK(with_reg.parameter_count() == 125233 + 2 * 640 + 2);
}

TEST_CASE("tensor layout tiles the parameter vector") {
  TcnShape s;
  s.regression = 2;
  std::size_t offset = 0;
  const char* names[] = {"conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias",
                         "head.weight",  "head.bias",  "reg.weight",   "reg.bias"};
  const auto layout = tensor_layout(s);
  REQUIRE(layout.size() == 8);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    CHECK(layout[i].name == names[i]);
    CHECK(layout[i].offset == offset);
    offset += static_cast<std::size_t>(layout[i].rows) * layout[i].cols;
  }
  CHECK(offset == s.parameter_count());
  CHECK(tensor_layout(TcnShape{}).size() == 6);
}

TEST_CASE("shape validation") {
  TcnShape s;
  s.kernel = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = TcnShape{};
  s.classes = 1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = TcnShape{};
  s.window = 0;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("zero parameters give zero logits") {
  const TcnModel m{TcnShape{}};
  std::mt19937_64 rng(1);
  const auto out = m.forward(random_window(rng, 20, 325));
  CHECK(out.logits.size() == 17);
  CHECK(out.logits.isZero(0));
}

TEST_CASE("forward matches the loop-level reference") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    TcnShape s;
    s.input_dim = 7;
    s.window = 9;
    s.conv1 = 6;
    s.conv2 = 4;
    s.kernel = 3;
    s.classes = 5;
    s.regression = trial % 2 ? 2 : 0;
    const auto m = TcnModel::initialized(s, 100 + trial);
    const auto x = random_window(rng, s.window, s.input_dim);
    const auto got = m.forward(x);
    const auto ref = gstest::reference_forward(m, x);
    for (int c = 0; c < s.classes; ++c) CHECK(got.logits[c] == doctest::Approx(ref.logits[c]).epsilon(1e-12));
    for (int r = 0; r < s.regression; ++r) CHECK(got.regression[r] == doctest::Approx(ref.regression[r]).epsilon(1e-12));
    const auto act = m.activations(x);
    for (int t = 0; t < s.window; ++t)
      for (int c = 0; c < s.conv2; ++c) CHECK(act(t, c) == doctest::Approx(ref.a2[t][c]).epsilon(1e-12));
  }
}

TEST_CASE("forward_batch agrees with single windows, out-of-range rows read as zero") {
  std::mt19937_64 rng(3);
  TcnShape s;
  s.input_dim = 4;
  s.window = 6;
  s.classes = 3;
  const auto m = TcnModel::initialized(s, 5);
  const auto source = random_window(rng, 15, 4);
  std::vector<WindowRef> refs;
  for (int start : {-3, 0, 4, 12}) {
    WindowRef r;
    r.source = &source;
    r.start = start;
    refs.push_back(r);
  }
  const auto batch = m.forward_batch(refs);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    FeatureMatrix w = FeatureMatrix::Zero(6, 4);
    for (int t = 0; t < 6; ++t) {
      const int row = refs[i].start + t;
      if (row >= 0 && row < source.rows()) w.row(t) = source.row(row);
    }
    const auto single = m.forward(w);
    CHECK((batch[i].logits - single.logits).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((m.forward(refs[i]).logits - single.logits).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  const auto m = TcnModel::initialized(TcnShape{}, 1);
  std::mt19937_64 rng(4);
  CHECK_THROWS_AS(m.forward(random_window(rng, 19, 325)), Error);
  CHECK_THROWS_AS(m.forward(random_window(rng, 20, 324)), Error);
}

TEST_CASE("causality: future steps never change earlier activations") {
  std::mt19937_64 rng(5);
  const auto m = TcnModel::initialized(TcnShape{}, 9);
  std::uniform_int_distribution<int> step(0, 18);
  for (int probe = 0; probe < 20; ++probe) {
    const auto x = random_window(rng, 20, 325);
    const int t = step(rng);
    FeatureMatrix y = x;
    y.bottomRows(19 - t) = random_window(rng, 19 - t, 325);
    const auto a = m.activations(x), b = m.activations(y);
    CHECK(a.topRows(t + 1) == b.topRows(t + 1));
    CHECK(a.bottomRows(19 - t) != b.bottomRows(19 - t));
  }
}

TEST_CASE("cross-entropy of uniform logits is ln(classes)") {
  TcnModel m{TcnShape{}};
  std::mt19937_64 rng(6);
  const auto x = random_window(rng, 20, 325);
  WindowRef r;
  r.source = &x;
  r.label = 4;
  const auto lg = m.loss_and_grad(std::span<const WindowRef>(&r, 1), {});
  CHECK(lg.loss == doctest::Approx(std::log(17.0)).epsilon(1e-15));
  CHECK(lg.data_loss == lg.loss);
}

TEST_CASE("mean reduction: a duplicated sample has the single-sample gradient") {
  std::mt19937_64 rng(7);
  TcnShape s;
  s.input_dim = 5;
  s.window = 6;
  s.classes = 4;
  const auto m = TcnModel::initialized(s, 3);
  const auto x = random_window(rng, 6, 5);
  WindowRef r;
  r.source = &x;
  r.label = 2;
  const WindowRef two[] = {r, r};
  const auto one = m.loss_and_grad(std::span<const WindowRef>(&r, 1), {});
  const auto dup = m.loss_and_grad(two, {});
  CHECK(dup.loss == doctest::Approx(one.loss).epsilon(1e-14));
  CHECK((dup.grad - one.grad).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("L2 term adds lambda |theta|^2 and 2 lambda theta") {
  std::mt19937_64 rng(8);
  TcnShape s;
  s.input_dim = 3;
  s.window = 4;
  s.classes = 3;
  const auto m = TcnModel::initialized(s, 4);
  const auto x = random_window(rng, 4, 3);
  WindowRef r;
  r.source = &x;
  const auto plain = m.loss_and_grad(std::span<const WindowRef>(&r, 1), {});
  const auto reg = m.loss_and_grad(std::span<const WindowRef>(&r, 1), {0.25, 1.0});
  CHECK(reg.loss - plain.loss == doctest::Approx(0.25 * m.parameters().squaredNorm()));
  CHECK((reg.grad - plain.grad - 0.5 * m.parameters()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const auto problem = gstest::random_grad_problem(rng);
    const auto check = gstest::check_gradient(problem);
    CHECK(check.max_relative_error < 1e-6);
    CHECK(check.max_loss_difference < 1e-12);
  }
}

TEST_CASE("non-finite loss is reported") {
  TcnShape s;
  s.input_dim = 2;
  s.window = 3;
  s.classes = 2;
  auto m = TcnModel::initialized(s, 1);
  m.parameters()[0] = std::numeric_limits<double>::infinity();
  FeatureMatrix x = FeatureMatrix::Ones(3, 2);
  WindowRef r;
  r.source = &x;
  try {
    m.loss_and_grad(std::span<const WindowRef>(&r, 1), {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumeric);
  }
}

TEST_CASE("initialization is fan-in scaled and seeded") {
  const TcnShape s;
  const auto a = TcnModel::initialized(s, 42), b = TcnModel::initialized(s, 42), c = TcnModel::initialized(s, 43);
  CHECK(a.parameters() == b.parameters());
  CHECK(a.parameters() != c.parameters());
  for (const auto& t : tensor_layout(s)) {
    const int fan_in = t.name == "conv1.weight" || t.name == "conv1.bias"   ? s.kernel * s.input_dim
                       : t.name == "conv2.weight" || t.name == "conv2.bias" ? s.kernel * s.conv1
                                                                            : s.window * s.conv2;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const auto seg = a.parameters().segment(static_cast<Eigen::Index>(t.offset), t.rows * t.cols);
    CHECK(seg.cwiseAbs().maxCoeff() <= bound);
    CHECK(seg.cwiseAbs().maxCoeff() > 0.5 * bound);
  }
}

TEST_CASE("softmax and argmax") {
  Eigen::VectorXd v(3);
  v << 1000.0, 1000.0, 999.0;
  const auto p = softmax(v);
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(p[0] == doctest::Approx(p[1]));
  CHECK(argmax(v) == 0);
  v << 0.0, 2.0, 2.0;
  CHECK(argmax(v) == 1);
}
