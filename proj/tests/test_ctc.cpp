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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cea/ctc.hpp"
#include "cea/errors.hpp"

namespace cea {
namespace {

using ag::Matrix;

Matrix RandomLogits(int t, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.5);
  Matrix m(t, c);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

Matrix Softmax(const Matrix& logits) {
  Matrix p = logits;
  for (int i = 0; i < p.rows(); ++i) {
    p.row(i) = (p.row(i).array() - p.row(i).maxCoeff()).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

std::vector<int> Collapse(const std::vector<int>& path, int blank) {
  std::vector<int> out;
  for (size_t t = 0; t < path.size(); ++t) {
    if (path[t] != blank && (t == 0 || path[t] != path[t - 1])) out.push_back(path[t]);
  }
  return out;
}

// Sum over every length-T path whose collapse equals the target; 0 if none.
double BruteForceProbability(const Matrix& probs, const std::vector<int>& target, int blank) {
  const int t_len = static_cast<int>(probs.rows());
  const int c = static_cast<int>(probs.cols());
  std::vector<int> path(t_len, 0);
  double total = 0.0;
  int64_t count = 1;
  for (int i = 0; i < t_len; ++i) count *= c;
  for (int64_t code = 0; code < count; ++code) {
    int64_t x = code;
    double p = 1.0;
    for (int t = 0; t < t_len; ++t) {
      path[t] = static_cast<int>(x % c);
      x /= c;
      p *= probs(t, path[t]);
    }
    if (Collapse(path, blank) == target) total += p;
  }
  return total;
}

std::vector<std::vector<int>> TargetsUpTo(int max_len, const std::vector<int>& labels) {
  std::vector<std::vector<int>> out = {{}};
  for (int a : labels) out.push_back({a});
  if (max_len >= 2) {
    for (int a : labels)
      for (int b : labels) out.push_back({a, b});
  }
  return out;
}

TEST(Ctc, OneHotSingleFrameIsZeroLoss) {
  Matrix logits = Matrix::Constant(1, 3, -1e3);
  logits(0, 2) = 0.0;
  EXPECT_NEAR(CtcLoss(logits, {2}, 0), 0.0, 1e-12);
}

TEST(Ctc, TwoFrameClosedForm) {
  std::mt19937_64 rng(21);
  const Matrix logits = RandomLogits(2, 2, rng);
  const Matrix p = Softmax(logits);
  // a = class 1, b = blank 0: paths aa, ba, ab.
  const double expected = -std::log(p(0, 1) * p(1, 1) + p(0, 0) * p(1, 1) + p(0, 1) * p(1, 0));
  EXPECT_NEAR(CtcLoss(logits, {1}, 0), expected, 1e-12);
}

TEST(Ctc, MatchesBruteForceEnumeration) {
  std::mt19937_64 rng(22);
  int compared = 0, rejected = 0;
  for (int c = 2; c <= 3; ++c) {
    for (int blank = 0; blank < c; ++blank) {
      std::vector<int> labels;
      for (int k = 0; k < c; ++k)
        if (k != blank) labels.push_back(k);
      for (int t = 1; t <= 4; ++t) {
        for (const auto& target : TargetsUpTo(2, labels)) {
          for (int rep = 0; rep < 3; ++rep) {
            const Matrix logits = RandomLogits(t, c, rng);
            const double brute = BruteForceProbability(Softmax(logits), target, blank);
            if (t < MinimumCtcFrames(target)) {
              EXPECT_EQ(brute, 0.0);
              EXPECT_THROW(CtcLoss(logits, target, blank), ValidationError);
              ++rejected;
              continue;
            }
            ASSERT_GT(brute, 0.0);
            EXPECT_NEAR(-CtcLoss(logits, target, blank), std::log(brute), 1e-9)
                << "T=" << t << " C=" << c << " blank=" << blank;
            ++compared;
          }
        }
      }
    }
  }
  EXPECT_GT(compared, 200);
  EXPECT_GT(rejected, 0);
}

TEST(Ctc, MinimumFrames) {
  EXPECT_EQ(MinimumCtcFrames({}), 0);
  EXPECT_EQ(MinimumCtcFrames({1, 2}), 2);
  EXPECT_EQ(MinimumCtcFrames({1, 1}), 3);
  EXPECT_EQ(MinimumCtcFrames({1, 1, 2, 2}), 6);
}

TEST(Ctc, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int t = 3 + trial % 5;
    const int c = 3 + trial % 3;
    const Matrix logits = RandomLogits(t, c, rng);
    const std::vector<int> target = trial % 2 ? std::vector<int>{1, 2} : std::vector<int>{2, 2};
    const CtcResult r = CtcLossWithGrad(logits, target, 0);
    const double h = 1e-6;
    for (int i = 0; i < t; ++i) {
      for (int j = 0; j < c; ++j) {
        Matrix lp = logits, lm = logits;
        lp(i, j) += h;
        lm(i, j) -= h;
        const double fd = (CtcLoss(lp, target, 0) - CtcLoss(lm, target, 0)) / (2 * h);
        EXPECT_NEAR(r.grad_logits(i, j), fd, 1e-4 * std::max(1.0, std::abs(fd)));
      }
    }
    // Rows of the gradient sum to zero (softmax minus occupancy).
    for (int i = 0; i < t; ++i) EXPECT_NEAR(r.grad_logits.row(i).sum(), 0.0, 1e-12);
  }
}

TEST(Ctc, OpWrapperBackpropagates) {
  std::mt19937_64 rng(24);
  const Matrix logits = RandomLogits(5, 4, rng);
  ag::Var x(logits, true);
  ag::Var loss = CtcLossOp(x, {1, 3}, 0);
  ag::Backward(ag::Scale(loss, 2.0));
  const CtcResult r = CtcLossWithGrad(logits, {1, 3}, 0);
  EXPECT_DOUBLE_EQ(loss.scalar(), r.loss);
  EXPECT_TRUE(x.grad().isApprox(2.0 * r.grad_logits, 1e-12));
}

}  // namespace
}  // namespace cea
