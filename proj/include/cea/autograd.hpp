// Copyright 2026 The cea-tta Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal reverse-mode differentiation over dense double matrices.
// Every op produces a node that remembers its parents and a backward closure;
// backward() topologically sorts the reachable graph from a scalar and
// accumulates gradients. Nodes that do not depend on any leaf with
// requires_grad carry no closure and are skipped.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace cea::ag {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows in
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void Accumulate(const Matrix& g);
};

class Var {
 public:
  Var() = default;
  explicit Var(Matrix value, bool requires_grad = false);

  const Matrix& value() const { return node_->value; }
  // Zero matrix of the right shape when no gradient reached this node.
  Matrix grad() const;
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  bool defined() const { return static_cast<bool>(node_); }
  double scalar() const { return node_->value(0, 0); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  friend Var MakeResult(Matrix, std::vector<Var>, std::function<void(Node&)>);

  std::shared_ptr<Node> node_;
};

// Builds an op result. The closure is dropped when no parent needs gradients.
Var MakeResult(Matrix value, std::vector<Var> parents,
               std::function<void(Node&)> backward_fn);

// Seeds d(root)/d(root) = 1 and propagates. root must be 1x1.
void Backward(const Var& root);

Var MatMul(const Var& a, const Var& b);
Var Add(const Var& a, const Var& b);
// a (T x n) + b (1 x n) broadcast over rows.
Var AddRow(const Var& a, const Var& b);
// a (T x n) .* g (1 x n) broadcast over rows.
Var MulRow(const Var& a, const Var& g);
Var Scale(const Var& a, double s);
Var Transpose(const Var& a);
Var Gelu(const Var& a);
// Row-wise zero-mean unit-variance normalization (biased variance).
Var NormalizeRows(const Var& a, double eps);
Var SoftmaxRows(const Var& a);
Var Sum(const Var& a);

// Strided framing (im2col) of a time-major T x c signal. Output row t holds
// rows [t*stride, t*stride + kernel) of the input, concatenated.
Var Frames(const Var& a, int kernel, int stride);

// Shannon entropy (nats) of softmax(logits) per row; returns T x 1.
Var RowEntropy(const Var& logits);

// Per-row cross-entropy of softmax(logits) against the uniform distribution,
// -(1/C) sum_c log p_c, as a T x 1 column.
Var RowUniformCrossEntropy(const Var& logits);

// sum_i weights[i] * v[i] with the weights held constant. v is T x 1.
Var WeightedSum(const Var& v, std::span<const double> weights);

// sum over anchors i in [0, T-k] with active[i] of ||z[i+k-1] - z[i]||_2.
// Zero-length differences contribute a zero subgradient.
Var PairDistanceSum(const Var& z, int window_k, const std::vector<bool>& active);

}  // namespace cea::ag
