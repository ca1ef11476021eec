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

#include "cea/frame_analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "cea/errors.hpp"

namespace cea {

FramePosterior::FramePosterior(Matrix probs, int blank_index)
    : probs_(std::move(probs)), blank_index_(blank_index) {
  if (probs_.cols() < 1) throw ValidationError("posterior needs at least one class");
  if (blank_index_ < 0 || blank_index_ >= probs_.cols()) {
    throw ValidationError("blank index out of range");
  }
  for (Eigen::Index r = 0; r < probs_.rows(); ++r) {
    double total = 0.0;
    for (Eigen::Index c = 0; c < probs_.cols(); ++c) {
      const double p = probs_(r, c);
      if (std::isnan(p) || p < 0.0 || p > 1.0) {
        throw ValidationError("posterior row " + std::to_string(r) +
                              " has an entry outside [0, 1]");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw ValidationError("posterior row " + std::to_string(r) + " does not sum to 1");
    }
  }
}

FramePosterior FramePosterior::FromLogits(const Matrix& logits, int blank_index) {
  if (!logits.allFinite()) throw ValidationError("non-finite logits");
  Matrix p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double m = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - m).exp();
    p.row(r) /= p.row(r).sum();
  }
  return FramePosterior(std::move(p), blank_index);
}

std::string ToString(FrameStrategy s) {
  switch (s) {
    case FrameStrategy::kNonSilent: return "non_silent";
    case FrameStrategy::kSilent: return "silent";
    case FrameStrategy::kAll: return "all";
  }
  return "?";
}

FrameStrategy ParseFrameStrategy(const std::string& name) {
  if (name == "non_silent") return FrameStrategy::kNonSilent;
  if (name == "silent") return FrameStrategy::kSilent;
  if (name == "all") return FrameStrategy::kAll;
  throw ValidationError("unknown frame strategy '" + name + "'");
}

std::vector<double> FrameEntropy(const FramePosterior& posterior) {
  const Matrix& p = posterior.probs();
  std::vector<double> out(static_cast<size_t>(p.rows()));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    double h = 0.0;
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      const double v = p(r, c);
      if (v > 0.0) h -= v * std::log(v);
    }
    out[static_cast<size_t>(r)] = h;
  }
  return out;
}

PseudoLabels PseudoLabelsAndSilence(const FramePosterior& posterior) {
  const Matrix& p = posterior.probs();
  PseudoLabels out;
  out.label.resize(static_cast<size_t>(p.rows()));
  out.silent.resize(static_cast<size_t>(p.rows()));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < p.cols(); ++c) {
      if (p(r, c) > p(r, best)) best = c;
    }
    out.label[static_cast<size_t>(r)] = static_cast<int>(best);
    out.silent[static_cast<size_t>(r)] = best == posterior.blank_index();
  }
  return out;
}

std::vector<double> ConfidenceWeights(const std::vector<double>& entropy,
                                      const std::vector<bool>& silent,
                                      FrameStrategy strategy) {
  if (entropy.size() != silent.size()) {
    throw ValidationError("entropy and silence mask differ in length");
  }
  std::vector<double> w(entropy.size());
  for (size_t i = 0; i < entropy.size(); ++i) {
    bool keep = true;
    if (strategy == FrameStrategy::kNonSilent) keep = !silent[i];
    if (strategy == FrameStrategy::kSilent) keep = silent[i];
    w[i] = keep ? 1.0 / (1.0 + std::exp(-entropy[i])) : 0.0;
  }
  return w;
}

double DefaultEntropyThreshold(int num_classes) {
  return 0.4 * std::log(static_cast<double>(num_classes));
}

EntropyBuckets ComputeEntropyBuckets(const std::vector<double>& entropy,
                                     const std::vector<bool>& silent,
                                     double threshold) {
  if (entropy.size() != silent.size()) {
    throw ValidationError("entropy and silence mask differ in length");
  }
  if (entropy.empty()) throw ValidationError("entropy buckets need at least one frame");
  if (!(threshold > 0.0)) throw ValidationError("entropy threshold must be positive");
  EntropyBuckets b;
  b.threshold = threshold;
  b.num_frames = static_cast<std::int64_t>(entropy.size());
  for (size_t i = 0; i < entropy.size(); ++i) {
    const bool high = entropy[i] > threshold;
    if (silent[i]) {
      ++(high ? b.count_sil_high : b.count_sil_low);
    } else {
      ++(high ? b.count_nonsil_high : b.count_nonsil_low);
    }
  }
  const double n = static_cast<double>(b.num_frames);
  b.frac_nonsil_high = static_cast<double>(b.count_nonsil_high) / n;
  b.frac_nonsil_low = static_cast<double>(b.count_nonsil_low) / n;
  b.frac_sil_high = static_cast<double>(b.count_sil_high) / n;
  b.frac_sil_low = static_cast<double>(b.count_sil_low) / n;
  return b;
}

EntropyBuckets AggregateBuckets(const std::vector<EntropyBuckets>& parts,
                                BucketAggregation mode) {
  if (parts.empty()) throw ValidationError("no buckets to aggregate");
  EntropyBuckets out;
  out.threshold = parts.front().threshold;
  for (const auto& p : parts) {
    out.num_frames += p.num_frames;
    out.count_nonsil_high += p.count_nonsil_high;
    out.count_nonsil_low += p.count_nonsil_low;
    out.count_sil_high += p.count_sil_high;
    out.count_sil_low += p.count_sil_low;
  }
  if (mode == BucketAggregation::kPooled) {
    const double n = static_cast<double>(out.num_frames);
    out.frac_nonsil_high = static_cast<double>(out.count_nonsil_high) / n;
    out.frac_nonsil_low = static_cast<double>(out.count_nonsil_low) / n;
    out.frac_sil_high = static_cast<double>(out.count_sil_high) / n;
    out.frac_sil_low = static_cast<double>(out.count_sil_low) / n;
  } else {
    const double n = static_cast<double>(parts.size());
    for (const auto& p : parts) {
      out.frac_nonsil_high += p.frac_nonsil_high / n;
      out.frac_nonsil_low += p.frac_nonsil_low / n;
      out.frac_sil_high += p.frac_sil_high / n;
      out.frac_sil_low += p.frac_sil_low / n;
    }
  }
  return out;
}

FrameAnalysis AnalyzeFrames(const FramePosterior& posterior, FrameStrategy strategy) {
  FrameAnalysis a;
  a.entropy = FrameEntropy(posterior);
  auto labels = PseudoLabelsAndSilence(posterior);
  a.pseudo_label = std::move(labels.label);
  a.silence_mask = std::move(labels.silent);
  a.weights = ConfidenceWeights(a.entropy, a.silence_mask, strategy);
  return a;
}

}  // namespace cea
