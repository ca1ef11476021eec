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

// Frame-level quantities derived from a CTC model's per-frame posteriors:
// entropy, argmax pseudo-labels, blank-as-silence masks, confidence weights
// and the four-way high/low x silent/non-silent entropy buckets.
//
// All functions here are pure.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace cea {

using Matrix = Eigen::MatrixXd;

class FramePosterior {
 public:
  // Validates rows (finite, non-negative, summing to 1 within 1e-6).
  FramePosterior(Matrix probs, int blank_index);

  // Row-wise softmax of unnormalized scores.
  static FramePosterior FromLogits(const Matrix& logits, int blank_index);

  const Matrix& probs() const { return probs_; }
  int blank_index() const { return blank_index_; }
  int num_frames() const { return static_cast<int>(probs_.rows()); }
  int num_classes() const { return static_cast<int>(probs_.cols()); }

 private:
  Matrix probs_;
  int blank_index_;
};

enum class FrameStrategy { kNonSilent, kSilent, kAll };

std::string ToString(FrameStrategy s);
FrameStrategy ParseFrameStrategy(const std::string& name);

// Per-frame entropy in nats with 0 ln 0 = 0.
std::vector<double> FrameEntropy(const FramePosterior& posterior);

struct PseudoLabels {
  std::vector<int> label;
  std::vector<bool> silent;  // label == blank
};

// Argmax per frame, ties to the lowest class index.
PseudoLabels PseudoLabelsAndSilence(const FramePosterior& posterior);

// sigmoid(E) gated by the frame-selection strategy.
std::vector<double> ConfidenceWeights(const std::vector<double>& entropy,
                                      const std::vector<bool>& silent,
                                      FrameStrategy strategy);

struct EntropyBuckets {
  double frac_nonsil_high = 0.0;
  double frac_nonsil_low = 0.0;
  double frac_sil_high = 0.0;
  double frac_sil_low = 0.0;
  double threshold = 0.0;
  // Raw counts, kept so buckets can be pooled across utterances.
  std::int64_t num_frames = 0;
  std::int64_t count_nonsil_high = 0;
  std::int64_t count_nonsil_low = 0;
  std::int64_t count_sil_high = 0;
  std::int64_t count_sil_low = 0;
};

// Default high/low entropy threshold: 0.4 ln C.
double DefaultEntropyThreshold(int num_classes);

// A frame is "high" when its entropy strictly exceeds the threshold.
EntropyBuckets ComputeEntropyBuckets(const std::vector<double>& entropy,
                                     const std::vector<bool>& silent,
                                     double threshold);

enum class BucketAggregation { kPooled, kPerUtteranceMean };

// Combines per-utterance buckets. Pooled sums raw counts; the per-utterance
// mean averages fractions with equal weight per utterance.
EntropyBuckets AggregateBuckets(const std::vector<EntropyBuckets>& parts,
                                BucketAggregation mode = BucketAggregation::kPooled);

struct FrameAnalysis {
  std::vector<double> entropy;
  std::vector<int> pseudo_label;
  std::vector<bool> silence_mask;
  std::vector<double> weights;
};

FrameAnalysis AnalyzeFrames(const FramePosterior& posterior,
                            FrameStrategy strategy = FrameStrategy::kNonSilent);

}  // namespace cea
