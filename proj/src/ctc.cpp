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

#include "cea/ctc.hpp"

#include <cmath>
#include <limits>

#include "cea/errors.hpp"

namespace cea {
namespace {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

ag::Matrix LogSoftmaxRows(const ag::Matrix& logits) {
  ag::Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double m = logits.row(t).maxCoeff();
    const double lse = m + std::log((logits.row(t).array() - m).exp().sum());
    out.row(t) = logits.row(t).array() - lse;
  }
  return out;
}

}  // namespace

int MinimumCtcFrames(const std::vector<int>& target) {
  int frames = static_cast<int>(target.size());
  for (size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++frames;
  }
  return frames;
}

CtcResult CtcLossWithGrad(const ag::Matrix& logits, const std::vector<int>& target,
                          int blank_index) {
  const Eigen::Index num_frames = logits.rows();
  const Eigen::Index num_classes = logits.cols();
  if (!logits.allFinite()) throw ValidationError("CTC: non-finite logits");
  if (blank_index < 0 || blank_index >= num_classes) throw ValidationError("CTC: bad blank");
  for (int c : target) {
    if (c < 0 || c >= num_classes || c == blank_index) {
      throw ValidationError("CTC: target label out of range or blank");
    }
  }
  if (num_frames < MinimumCtcFrames(target) || num_frames == 0) {
    throw ValidationError("CTC: no valid alignment (" + std::to_string(num_frames) +
                          " frames for " + std::to_string(target.size()) + " labels)");
  }

  const ag::Matrix logp = LogSoftmaxRows(logits);
  std::vector<int> ext;
  ext.reserve(target.size() * 2 + 1);
  ext.push_back(blank_index);
  for (int c : target) {
    ext.push_back(c);
    ext.push_back(blank_index);
  }
  const Eigen::Index states = static_cast<Eigen::Index>(ext.size());
  auto can_skip = [&](Eigen::Index s) {
    return s >= 2 && ext[static_cast<size_t>(s)] != blank_index &&
           ext[static_cast<size_t>(s)] != ext[static_cast<size_t>(s - 2)];
  };

  ag::Matrix alpha = ag::Matrix::Constant(num_frames, states, kLogZero);
  alpha(0, 0) = logp(0, ext[0]);
  if (states > 1) alpha(0, 1) = logp(0, ext[1]);
  for (Eigen::Index t = 1; t < num_frames; ++t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = LogAdd(a, alpha(t - 1, s - 1));
      if (can_skip(s)) a = LogAdd(a, alpha(t - 1, s - 2));
      if (a != kLogZero) alpha(t, s) = a + logp(t, ext[static_cast<size_t>(s)]);
    }
  }

  ag::Matrix beta = ag::Matrix::Constant(num_frames, states, kLogZero);
  const Eigen::Index last = num_frames - 1;
  beta(last, states - 1) = logp(last, ext.back());
  if (states > 1) beta(last, states - 2) = logp(last, ext[static_cast<size_t>(states - 2)]);
  for (Eigen::Index t = last - 1; t >= 0; --t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      double b = beta(t + 1, s);
      if (s + 1 < states) b = LogAdd(b, beta(t + 1, s + 1));
      if (s + 2 < states && can_skip(s + 2)) b = LogAdd(b, beta(t + 1, s + 2));
      if (b != kLogZero) beta(t, s) = b + logp(t, ext[static_cast<size_t>(s)]);
    }
  }

  double log_likelihood = alpha(last, states - 1);
  if (states > 1) log_likelihood = LogAdd(log_likelihood, alpha(last, states - 2));
  if (log_likelihood == kLogZero) throw ValidationError("CTC: zero alignment probability");

  // d(-ln P)/d u_tc = y_tc - (1 / (P y_tc)) sum_{s: ext(s)=c} alpha_t(s) beta_t(s)
  CtcResult result;
  result.loss = -log_likelihood;
  result.grad_logits = logp.array().exp().matrix();
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    std::vector<double> occupancy(static_cast<size_t>(num_classes), kLogZero);
    for (Eigen::Index s = 0; s < states; ++s) {
      const double ab = alpha(t, s) + beta(t, s);
      auto& o = occupancy[static_cast<size_t>(ext[static_cast<size_t>(s)])];
      o = LogAdd(o, ab);
    }
    for (Eigen::Index c = 0; c < num_classes; ++c) {
      const double o = occupancy[static_cast<size_t>(c)];
      if (o == kLogZero) continue;
      result.grad_logits(t, c) -= std::exp(o - logp(t, c) - log_likelihood);
    }
  }
  return result;
}

double CtcLoss(const ag::Matrix& logits, const std::vector<int>& target, int blank_index) {
  return CtcLossWithGrad(logits, target, blank_index).loss;
}

ag::Var CtcLossOp(const ag::Var& logits, const std::vector<int>& target, int blank_index) {
  CtcResult r = CtcLossWithGrad(logits.value(), target, blank_index);
  ag::Matrix out(1, 1);
  out(0, 0) = r.loss;
  return ag::MakeResult(std::move(out), {logits}, [g = std::move(r.grad_logits)](ag::Node& n) {
    n.parents[0]->Accumulate(g * n.grad(0, 0));
  });
}

}  // namespace cea
