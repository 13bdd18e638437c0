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

// Causal temporal-convolutional window classifier.
//
//   window (n x in) -> causal conv(k) -> LeakyReLU -> causal conv(k) -> LeakyReLU
//                   -> flatten (n * conv2) -> linear -> logits (classes)
//                                          `-> linear -> regression (optional)
//
// Convolutions are non-dilated and left-padded with zeros, so activations at
// step t only see window steps <= t. All parameters live in one flat vector;
// the tensors below are views into it, in this order:
//
//   conv1.weight  (kernel*in) x conv1   row block k multiplies input step t-k
//   conv1.bias    conv1
//   conv2.weight  (kernel*conv1) x conv2
//   conv2.bias    conv2
//   head.weight   classes x (n*conv2)   flattened step-major
//   head.bias     classes
//   reg.weight    regression x (n*conv2)  (absent when regression == 0)
//   reg.bias      regression

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gesturespot/features.hpp"

namespace gesturespot {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TcnShape {
  int input_dim = kNumAngles;
  int window = 20;
  int conv1 = 64;
  int conv2 = 32;
  int kernel = 5;
  int classes = kNumLabels;
  int regression = 0;
  double leaky_slope = 0.01;

  std::size_t parameter_count() const;
  void validate() const;
  bool operator==(const TcnShape&) const = default;
};

// A window of `shape.window` consecutive rows of `source` starting at `start`.
// Rows outside the source are read as zeros.
struct WindowRef {
  const FeatureMatrix* source = nullptr;
  int start = 0;
  int label = 0;
  bool has_target = false;
  double target[2] = {0.0, 0.0};
};

struct TcnOutput {
  Eigen::VectorXd logits;
  Eigen::VectorXd regression;
};

struct LossAndGrad {
  double loss = 0.0;
  double data_loss = 0.0;  // cross-entropy (+ weighted regression) without L2
  Eigen::VectorXd grad;
};

struct LossOptions {
  double l2 = 0.0;
  double regression_weight = 1.0;
};

class TcnModel {
 public:
  TcnModel() = default;
  explicit TcnModel(const TcnShape& shape);

  // Fan-in scaled uniform initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static TcnModel initialized(const TcnShape& shape, std::uint64_t seed);

  const TcnShape& shape() const { return shape_; }
  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }

  TcnOutput forward(const WindowRef& window) const;
  TcnOutput forward(const FeatureMatrix& window) const;
  std::vector<TcnOutput> forward_batch(std::span<const WindowRef> windows) const;
  // Post-activation output of the second convolution (n x conv2).
  RowMatrix activations(const FeatureMatrix& window) const;

  // Mean softmax cross-entropy (+ regression_weight * mean squared error over
  // samples with targets) + l2 * |theta|^2, with its exact gradient.
  LossAndGrad loss_and_grad(std::span<const WindowRef> batch, const LossOptions& options) const;

  struct Views;

 private:
  TcnShape shape_;
  Eigen::VectorXd params_;
};

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
};

std::vector<TensorInfo> tensor_layout(const TcnShape& shape);

// Softmax of a logit vector, numerically stabilized.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
// Lowest index wins ties.
int argmax(const Eigen::VectorXd& v);

}  // namespace gesturespot
