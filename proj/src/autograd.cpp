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

#include "cea/autograd.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace cea::ag {

void Node::Accumulate(const Matrix& g) {
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Var::Var(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Matrix Var::grad() const {
  if (node_->grad.size() == 0) return Matrix::Zero(rows(), cols());
  return node_->grad;
}

Var MakeResult(Matrix value, std::vector<Var> parents,
               std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  for (const auto& p : parents) node->requires_grad |= p.requires_grad();
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Var(std::move(node));
}

namespace {

void TopoSort(Node* root, std::vector<Node*>& order) {
  std::unordered_set<Node*> seen;
  // Iterative post-order DFS.
  std::vector<std::pair<Node*, size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
}

bool Needs(const Node& n, size_t i) { return n.parents[i]->requires_grad; }

}  // namespace

void Backward(const Var& root) {
  if (!root.defined() || root.rows() != 1 || root.cols() != 1) {
    throw std::invalid_argument("Backward: root must be a 1x1 scalar");
  }
  if (!root.requires_grad()) return;
  std::vector<Node*> order;
  TopoSort(root.node().get(), order);
  root.node()->Accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.size() != 0) n->backward_fn(*n);
  }
}

Var MatMul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("MatMul: shape mismatch");
  return MakeResult(a.value() * b.value(), {a, b}, [](Node& n) {
    const Matrix& A = n.parents[0]->value;
    const Matrix& B = n.parents[1]->value;
    if (Needs(n, 0)) n.parents[0]->Accumulate(n.grad * B.transpose());
    if (Needs(n, 1)) n.parents[1]->Accumulate(A.transpose() * n.grad);
  });
}

Var Add(const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("Add: shape mismatch");
  }
  return MakeResult(a.value() + b.value(), {a, b}, [](Node& n) {
    if (Needs(n, 0)) n.parents[0]->Accumulate(n.grad);
    if (Needs(n, 1)) n.parents[1]->Accumulate(n.grad);
  });
}

Var AddRow(const Var& a, const Var& b) {
  if (b.rows() != 1 || b.cols() != a.cols()) {
    throw std::invalid_argument("AddRow: bias must be 1 x cols");
  }
  Matrix out = a.value().rowwise() + b.value().row(0);
  return MakeResult(std::move(out), {a, b}, [](Node& n) {
    if (Needs(n, 0)) n.parents[0]->Accumulate(n.grad);
    if (Needs(n, 1)) n.parents[1]->Accumulate(n.grad.colwise().sum());
  });
}

Var MulRow(const Var& a, const Var& g) {
  if (g.rows() != 1 || g.cols() != a.cols()) {
    throw std::invalid_argument("MulRow: scale must be 1 x cols");
  }
  Matrix out = a.value().array().rowwise() * g.value().row(0).array();
  return MakeResult(std::move(out), {a, g}, [](Node& n) {
    const Matrix& A = n.parents[0]->value;
    const Matrix& G = n.parents[1]->value;
    if (Needs(n, 0)) {
      Matrix da = n.grad.array().rowwise() * G.row(0).array();
      n.parents[0]->Accumulate(da);
    }
    if (Needs(n, 1)) {
      n.parents[1]->Accumulate((n.grad.array() * A.array()).colwise().sum().matrix());
    }
  });
}

Var Scale(const Var& a, double s) {
  return MakeResult(a.value() * s, {a}, [s](Node& n) {
    n.parents[0]->Accumulate(n.grad * s);
  });
}

Var Transpose(const Var& a) {
  return MakeResult(a.value().transpose(), {a}, [](Node& n) {
    n.parents[0]->Accumulate(n.grad.transpose());
  });
}

Var Gelu(const Var& a) {
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  Matrix out = a.value().unaryExpr([inv_sqrt2](double x) {
    return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
  });
  return MakeResult(std::move(out), {a}, [inv_sqrt2](Node& n) {
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    Matrix d = n.parents[0]->value.unaryExpr([&](double x) {
      return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) +
             x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
    });
    n.parents[0]->Accumulate((n.grad.array() * d.array()).matrix());
  });
}

Var NormalizeRows(const Var& a, double eps) {
  const Matrix& x = a.value();
  const Eigen::Index cols = x.cols();
  Matrix xhat(x.rows(), cols);
  Vector inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mean) * inv_std(r);
  }
  Matrix saved = xhat;
  return MakeResult(std::move(xhat), {a},
                    [saved = std::move(saved), inv_std](Node& n) {
    Matrix dx(saved.rows(), saved.cols());
    for (Eigen::Index r = 0; r < saved.rows(); ++r) {
      const auto g = n.grad.row(r).array();
      const auto h = saved.row(r).array();
      const double g_mean = g.mean();
      const double gh_mean = (g * h).mean();
      dx.row(r) = inv_std(r) * (g - g_mean - h * gh_mean);
    }
    n.parents[0]->Accumulate(dx);
  });
}

Var SoftmaxRows(const Var& a) {
  Matrix y = a.value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double m = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  Matrix saved = y;
  return MakeResult(std::move(y), {a}, [saved = std::move(saved)](Node& n) {
    Matrix dx(saved.rows(), saved.cols());
    for (Eigen::Index r = 0; r < saved.rows(); ++r) {
      const double dot = n.grad.row(r).dot(saved.row(r));
      dx.row(r) = saved.row(r).array() * (n.grad.row(r).array() - dot);
    }
    n.parents[0]->Accumulate(dx);
  });
}

Var Sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const Eigen::Index r = a.rows(), c = a.cols();
  return MakeResult(std::move(out), {a}, [r, c](Node& n) {
    n.parents[0]->Accumulate(Matrix::Constant(r, c, n.grad(0, 0)));
  });
}

Var Frames(const Var& a, int kernel, int stride) {
  if (kernel < 1 || stride < 1) throw std::invalid_argument("Frames: bad kernel/stride");
  const Matrix& x = a.value();
  const Eigen::Index t_in = x.rows(), ch = x.cols();
  if (t_in < kernel) throw std::invalid_argument("Frames: input shorter than kernel");
  const Eigen::Index t_out = (t_in - kernel) / stride + 1;
  Matrix out(t_out, kernel * ch);
  for (Eigen::Index t = 0; t < t_out; ++t) {
    for (int j = 0; j < kernel; ++j) {
      out.block(t, j * ch, 1, ch) = x.row(t * stride + j);
    }
  }
  return MakeResult(std::move(out), {a}, [kernel, stride, t_in, ch](Node& n) {
    Matrix dx = Matrix::Zero(t_in, ch);
    for (Eigen::Index t = 0; t < n.grad.rows(); ++t) {
      for (int j = 0; j < kernel; ++j) {
        dx.row(t * stride + j) += n.grad.block(t, j * ch, 1, ch);
      }
    }
    n.parents[0]->Accumulate(dx);
  });
}

Var RowEntropy(const Var& logits) {
  const Matrix& l = logits.value();
  Matrix logp(l.rows(), l.cols());
  Matrix ent(l.rows(), 1);
  for (Eigen::Index r = 0; r < l.rows(); ++r) {
    const double m = l.row(r).maxCoeff();
    const double lse = m + std::log((l.row(r).array() - m).exp().sum());
    logp.row(r) = l.row(r).array() - lse;
    // p log p -> 0 as p -> 0; exp underflow gives exactly 0 * finite.
    ent(r, 0) = -(logp.row(r).array().exp() * logp.row(r).array()).sum();
  }
  Matrix saved_ent = ent;
  return MakeResult(std::move(ent), {logits},
                    [logp = std::move(logp), saved_ent = std::move(saved_ent)](Node& n) {
    // dE/dl_c = -p_c (log p_c + E)
    Matrix dl(logp.rows(), logp.cols());
    for (Eigen::Index r = 0; r < logp.rows(); ++r) {
      const auto p = logp.row(r).array().exp();
      dl.row(r) = -n.grad(r, 0) * p * (logp.row(r).array() + saved_ent(r, 0));
    }
    n.parents[0]->Accumulate(dl);
  });
}

Var RowUniformCrossEntropy(const Var& logits) {
  const Matrix& l = logits.value();
  const double inv_c = 1.0 / static_cast<double>(l.cols());
  Matrix p(l.rows(), l.cols());
  Matrix out(l.rows(), 1);
  for (Eigen::Index r = 0; r < l.rows(); ++r) {
    const double m = l.row(r).maxCoeff();
    const double lse = m + std::log((l.row(r).array() - m).exp().sum());
    p.row(r) = (l.row(r).array() - lse).exp();
    out(r, 0) = lse - l.row(r).mean();
  }
  return MakeResult(std::move(out), {logits}, [p = std::move(p), inv_c](Node& n) {
    Matrix dl = p.array() - inv_c;
    for (Eigen::Index r = 0; r < dl.rows(); ++r) dl.row(r) *= n.grad(r, 0);
    n.parents[0]->Accumulate(dl);
  });
}

Var WeightedSum(const Var& v, std::span<const double> weights) {
  if (v.cols() != 1 || static_cast<size_t>(v.rows()) != weights.size()) {
    throw std::invalid_argument("WeightedSum: weights must match a column vector");
  }
  Vector w = Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  Matrix out(1, 1);
  out(0, 0) = v.value().col(0).dot(w);
  return MakeResult(std::move(out), {v}, [w = std::move(w)](Node& n) {
    n.parents[0]->Accumulate(w * n.grad(0, 0));
  });
}

Var PairDistanceSum(const Var& z, int window_k, const std::vector<bool>& active) {
  if (window_k < 2) throw std::invalid_argument("PairDistanceSum: window_k must be >= 2");
  const Matrix& x = z.value();
  const Eigen::Index t = x.rows();
  if (static_cast<Eigen::Index>(active.size()) != t) {
    throw std::invalid_argument("PairDistanceSum: mask length mismatch");
  }
  const Eigen::Index offset = window_k - 1;
  const Eigen::Index anchors = t - offset;  // may be <= 0
  // Unit direction per anchor, zero for inactive or coincident pairs.
  Matrix dirs = Matrix::Zero(std::max<Eigen::Index>(anchors, 0), x.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < anchors; ++i) {
    if (!active[static_cast<size_t>(i)]) continue;
    const Eigen::RowVectorXd diff = x.row(i + offset) - x.row(i);
    const double norm = diff.norm();
    total += norm;
    if (norm > 0.0) dirs.row(i) = diff / norm;
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  return MakeResult(std::move(out), {z}, [dirs = std::move(dirs), offset, t](Node& n) {
    Matrix dx = Matrix::Zero(t, dirs.cols());
    const double g = n.grad(0, 0);
    for (Eigen::Index i = 0; i < dirs.rows(); ++i) {
      dx.row(i + offset) += g * dirs.row(i);
      dx.row(i) -= g * dirs.row(i);
    }
    n.parents[0]->Accumulate(dx);
  });
}

}  // namespace cea::ag
