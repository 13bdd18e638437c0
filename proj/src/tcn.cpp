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

#include "gesturespot/tcn.hpp"

#include <cmath>
#include <random>

namespace gesturespot {

namespace {

using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

struct Offsets {
  std::size_t w1, b1, w2, b2, wh, bh, wr, br, total;
};

Offsets offsets(const TcnShape& s) {
  Offsets o{};
  std::size_t at = 0;
  auto take = [&at](std::size_t n) {
    const std::size_t here = at;
    at += n;
    return here;
  };
  const std::size_t flat = static_cast<std::size_t>(s.window) * s.conv2;
  o.w1 = take(static_cast<std::size_t>(s.kernel) * s.input_dim * s.conv1);
  o.b1 = take(s.conv1);
  o.w2 = take(static_cast<std::size_t>(s.kernel) * s.conv1 * s.conv2);
  o.b2 = take(s.conv2);
  o.wh = take(s.classes * flat);
  o.bh = take(s.classes);
  o.wr = take(s.regression * flat);
  o.br = take(s.regression);
  o.total = at;
  return o;
}

void leaky_relu(const RowMatrix& z, RowMatrix& a, double slope) {
  a = z.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

// Causal im2col: row (b, t) holds [x(t), x(t-1), ..., x(t-k+1)] of sample b,
// with zeros where t - j < 0.
void im2col(const RowMatrix& x, int batch, int n, int kernel, RowMatrix& out) {
  const int d = static_cast<int>(x.cols());
  out.setZero(static_cast<Eigen::Index>(batch) * n, static_cast<Eigen::Index>(kernel) * d);
  for (int b = 0; b < batch; ++b)
    for (int t = 0; t < n; ++t)
      for (int k = 0; k < kernel && k <= t; ++k)
        out.block(b * n + t, k * d, 1, d) = x.row(b * n + t - k);
}

struct Cache {
  int batch = 0;
  RowMatrix xcol, z1, a1, a1col, z2, a2, logits, reg;
};

}  // namespace

struct TcnModel::Views {
  ConstMap w1, w2, wh, wr;
  Eigen::Map<const Eigen::VectorXd> b1, b2, bh, br;

  Views(const TcnShape& s, const Eigen::VectorXd& p)
      : w1(p.data() + offsets(s).w1, s.kernel * s.input_dim, s.conv1),
        w2(p.data() + offsets(s).w2, s.kernel * s.conv1, s.conv2),
        wh(p.data() + offsets(s).wh, s.classes, s.window * s.conv2),
        wr(p.data() + offsets(s).wr, s.regression, s.window * s.conv2),
        b1(p.data() + offsets(s).b1, s.conv1),
        b2(p.data() + offsets(s).b2, s.conv2),
        bh(p.data() + offsets(s).bh, s.classes),
        br(p.data() + offsets(s).br, s.regression) {}
};

namespace {

RowMatrix gather_inputs(std::span<const WindowRef> windows, const TcnShape& s) {
  RowMatrix x = RowMatrix::Zero(static_cast<Eigen::Index>(windows.size()) * s.window, s.input_dim);
  for (std::size_t b = 0; b < windows.size(); ++b) {
    const auto& w = windows[b];
    if (w.source == nullptr) throw Error(ErrorKind::kInvalidArgument, "window without feature source");
    if (w.source->cols() != s.input_dim)
      throw Error(ErrorKind::kInvalidArgument, "feature dimension mismatch: model expects " +
                                                   std::to_string(s.input_dim) + ", got " +
                                                   std::to_string(w.source->cols()));
    for (int t = 0; t < s.window; ++t) {
      const int row = w.start + t;
      if (row >= 0 && row < w.source->rows()) x.row(static_cast<Eigen::Index>(b) * s.window + t) = w.source->row(row);
    }
  }
  return x;
}

void run_forward(const TcnShape& s, const TcnModel::Views& v, const RowMatrix& x, int batch, Cache& c) {
  c.batch = batch;
  im2col(x, batch, s.window, s.kernel, c.xcol);
  c.z1.noalias() = c.xcol * v.w1;
  c.z1.rowwise() += v.b1.transpose();
  leaky_relu(c.z1, c.a1, s.leaky_slope);
  im2col(c.a1, batch, s.window, s.kernel, c.a1col);
  c.z2.noalias() = c.a1col * v.w2;
  c.z2.rowwise() += v.b2.transpose();
  leaky_relu(c.z2, c.a2, s.leaky_slope);
  const ConstMap h(c.a2.data(), batch, s.window * s.conv2);
  c.logits.noalias() = h * v.wh.transpose();
  c.logits.rowwise() += v.bh.transpose();
  if (s.regression > 0) {
    c.reg.noalias() = h * v.wr.transpose();
    c.reg.rowwise() += v.br.transpose();
  }
}

}  // namespace

std::size_t TcnShape::parameter_count() const { return offsets(*this).total; }

void TcnShape::validate() const {
  if (input_dim <= 0 || window <= 0 || conv1 <= 0 || conv2 <= 0 || kernel <= 0 || classes <= 1 ||
      regression < 0 || leaky_slope < 0.0)
    throw Error(ErrorKind::kInvalidArgument, "invalid TCN shape");
}

std::vector<TensorInfo> tensor_layout(const TcnShape& s) {
  const auto o = offsets(s);
  std::vector<TensorInfo> out = {
      {"conv1.weight", s.kernel * s.input_dim, s.conv1, o.w1},
      {"conv1.bias", 1, s.conv1, o.b1},
      {"conv2.weight", s.kernel * s.conv1, s.conv2, o.w2},
      {"conv2.bias", 1, s.conv2, o.b2},
      {"head.weight", s.classes, s.window * s.conv2, o.wh},
      {"head.bias", 1, s.classes, o.bh},
  };
  if (s.regression > 0) {
    out.push_back({"reg.weight", s.regression, s.window * s.conv2, o.wr});
    out.push_back({"reg.bias", 1, s.regression, o.br});
  }
  return out;
}

TcnModel::TcnModel(const TcnShape& shape) : shape_(shape) {
  shape_.validate();
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape_.parameter_count()));
}

TcnModel TcnModel::initialized(const TcnShape& shape, std::uint64_t seed) {
  TcnModel m(shape);
  std::mt19937_64 rng(seed);
  const auto o = offsets(shape);
  auto fill = [&](std::size_t from, std::size_t to, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = from; i < to; ++i) m.params_[static_cast<Eigen::Index>(i)] = u(rng);
  };
  const double flat = static_cast<double>(shape.window) * shape.conv2;
  fill(o.w1, o.w2, static_cast<double>(shape.kernel) * shape.input_dim);  // conv1 weight + bias
  fill(o.w2, o.wh, static_cast<double>(shape.kernel) * shape.conv1);
  fill(o.wh, o.total, flat);
  return m;
}

std::vector<TcnOutput> TcnModel::forward_batch(std::span<const WindowRef> windows) const {
  const Views v(shape_, params_);
  Cache c;
  run_forward(shape_, v, gather_inputs(windows, shape_), static_cast<int>(windows.size()), c);
  std::vector<TcnOutput> out(windows.size());
  for (std::size_t b = 0; b < windows.size(); ++b) {
    out[b].logits = c.logits.row(static_cast<Eigen::Index>(b)).transpose();
    if (shape_.regression > 0) out[b].regression = c.reg.row(static_cast<Eigen::Index>(b)).transpose();
  }
  return out;
}

TcnOutput TcnModel::forward(const WindowRef& window) const {
  return std::move(forward_batch(std::span<const WindowRef>(&window, 1)).front());
}

TcnOutput TcnModel::forward(const FeatureMatrix& window) const {
  if (window.rows() != shape_.window)
    throw Error(ErrorKind::kInvalidArgument, "window has " + std::to_string(window.rows()) + " steps, model expects " +
                                                 std::to_string(shape_.window));
  WindowRef ref;
  ref.source = &window;
  return forward(ref);
}

RowMatrix TcnModel::activations(const FeatureMatrix& window) const {
  if (window.rows() != shape_.window) throw Error(ErrorKind::kInvalidArgument, "window length mismatch");
  WindowRef ref;
  ref.source = &window;
  const Views v(shape_, params_);
  Cache c;
  run_forward(shape_, v, gather_inputs(std::span<const WindowRef>(&ref, 1), shape_), 1, c);
  return c.a2;
}

LossAndGrad TcnModel::loss_and_grad(std::span<const WindowRef> batch, const LossOptions& options) const {
  if (batch.empty()) throw Error(ErrorKind::kInvalidArgument, "empty batch");
  const TcnShape& s = shape_;
  const int nb = static_cast<int>(batch.size());
  const Views v(s, params_);
  Cache c;
  run_forward(s, v, gather_inputs(batch, s), nb, c);

  LossAndGrad out;
  out.grad = Eigen::VectorXd::Zero(params_.size());
  const auto o = offsets(s);
  double* g = out.grad.data();
  MutMap dw1(g + o.w1, s.kernel * s.input_dim, s.conv1);
  MutMap dw2(g + o.w2, s.kernel * s.conv1, s.conv2);
  MutMap dwh(g + o.wh, s.classes, s.window * s.conv2);
  MutMap dwr(g + o.wr, s.regression, s.window * s.conv2);
  Eigen::Map<Eigen::VectorXd> db1(g + o.b1, s.conv1), db2(g + o.b2, s.conv2), dbh(g + o.bh, s.classes),
      dbr(g + o.br, s.regression);

  // Softmax cross-entropy.
  RowMatrix dlogits(nb, s.classes);
  double ce = 0.0;
  for (int b = 0; b < nb; ++b) {
    const int y = batch[b].label;
    if (y < 0 || y >= s.classes) throw Error(ErrorKind::kInvalidArgument, "label out of range in batch");
    const auto row = c.logits.row(b);
    const double mx = row.maxCoeff();
    const Eigen::RowVectorXd ex = (row.array() - mx).exp();
    const double z = ex.sum();
    const double sample = std::log(z) + mx - row(y);
    if (!std::isfinite(sample))
      throw Error(ErrorKind::kNumeric, "non-finite loss at batch sample " + std::to_string(b));
    ce += sample;
    dlogits.row(b) = ex / z;
    dlogits(b, y) -= 1.0;
  }
  ce /= nb;
  dlogits /= nb;

  const ConstMap h(c.a2.data(), nb, s.window * s.conv2);
  RowMatrix dh = dlogits * v.wh;
  dwh.noalias() = dlogits.transpose() * h;
  dbh = dlogits.colwise().sum().transpose();

  double reg_loss = 0.0;
  if (s.regression > 0) {
    int with_target = 0;
    for (const auto& w : batch) with_target += w.has_target ? 1 : 0;
    RowMatrix dreg = RowMatrix::Zero(nb, s.regression);
    if (with_target > 0) {
      for (int b = 0; b < nb; ++b) {
        if (!batch[b].has_target) continue;
        for (int r = 0; r < s.regression; ++r) {
          const double diff = c.reg(b, r) - batch[b].target[r];
          reg_loss += diff * diff;
          dreg(b, r) = 2.0 * diff * options.regression_weight / with_target;
        }
      }
      reg_loss /= with_target;
    }
    dh.noalias() += dreg * v.wr;
    dwr.noalias() = dreg.transpose() * h;
    dbr = dreg.colwise().sum().transpose();
  }

  // Back through conv2.
  const double slope = s.leaky_slope;
  RowMatrix dz2 = Eigen::Map<RowMatrix>(dh.data(), static_cast<Eigen::Index>(nb) * s.window, s.conv2);
  dz2.array() *= c.z2.unaryExpr([slope](double z) { return z > 0.0 ? 1.0 : slope; }).array();
  dw2.noalias() = c.a1col.transpose() * dz2;
  db2 = dz2.colwise().sum().transpose();
  const RowMatrix da1col = dz2 * v.w2.transpose();
  RowMatrix dz1 = RowMatrix::Zero(static_cast<Eigen::Index>(nb) * s.window, s.conv1);
  for (int b = 0; b < nb; ++b)
    for (int t = 0; t < s.window; ++t)
      for (int k = 0; k < s.kernel && k <= t; ++k)
        dz1.row(b * s.window + t - k) += da1col.block(b * s.window + t, k * s.conv1, 1, s.conv1);
  dz1.array() *= c.z1.unaryExpr([slope](double z) { return z > 0.0 ? 1.0 : slope; }).array();
  dw1.noalias() = c.xcol.transpose() * dz1;
  db1 = dz1.colwise().sum().transpose();

  out.data_loss = ce + options.regression_weight * reg_loss;
  out.loss = out.data_loss + options.l2 * params_.squaredNorm();
  out.grad += 2.0 * options.l2 * params_;
  if (!std::isfinite(out.loss)) throw Error(ErrorKind::kNumeric, "non-finite loss");
  return out;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double mx = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - mx).exp();
  return e / e.sum();
}

int argmax(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace gesturespot
