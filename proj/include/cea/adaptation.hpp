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

// Episodic test-time adaptation of a CTC acoustic model on one utterance.
//
// The full method runs two stages and then resets the model:
//
//   Stage 1 (confidence-enhanced adaptation): minimize
//       sum_i S_i * E_i,   S_i = sigmoid(E_i) * [frame i is non-silent]
//   over the feature extractor and every layer-norm affine. S is recomputed
//   from the current posteriors each step and held constant for the
//   gradient.
//
//   Stage 2 (short-term consistency): minimize
//       sum_i E_i + alpha * sum_{i=1}^{T-k+1} ||z'_{i+k-1} - z'_i|| * [frame i non-silent]
//   over the layer-norm affines, where z' = softmax(z z^T / sqrt(d)) z is a
//   parameter-free self-attention smoothing of the extractor output z.
//
// Frame i is silent when its argmax class is the CTC blank.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cea/decode.hpp"
#include "cea/frame_analysis.hpp"
#include "cea/model.hpp"
#include "cea/toy_task.hpp"

namespace cea {

struct AdaptationConfig {
  int steps_stage1 = 5;
  int steps_stage2 = 5;
  double lr_ln = 2e-4;
  double lr_fe = 2e-5;
  double alpha = 0.3;
  int window_k = 4;
  FrameStrategy frame_strategy = FrameStrategy::kNonSilent;
  ParameterScheme scheme_stage1 = ParameterScheme::kFePlusLns;
  ParameterScheme scheme_stage2 = ParameterScheme::kLns;
  AdamWSettings optimizer;
  std::uint64_t seed = 0;

  int total_steps() const { return steps_stage1 + steps_stage2; }
  void Validate() const;
};

struct StepRecord {
  int step = 0;   // 0-based across both stages
  int stage = 0;  // 1 or 2
  double loss = 0.0;
  EntropyBuckets buckets;
  double mean_nonsilent_entropy = 0.0;  // 0 when no frame is non-silent
  int num_nonsilent = 0;
};

struct AdaptationReport {
  std::string utterance_id;
  std::string method;
  std::vector<std::string> reference;
  Transcript before;
  Transcript after;
  EditCounts errors_before;
  EditCounts errors_after;
  double wer_before = 0.0;
  double wer_after = 0.0;
  std::vector<StepRecord> steps;
  std::vector<double> stage_seconds;
  bool failed = false;
  std::string failure;
};

// sum_i weights_i * entropy_i, weights taken from `analysis` as constants.
double CeaLoss(const FramePosterior& posterior, const FrameAnalysis& analysis);

// softmax(Z Z^T / sqrt(d)) Z, row-wise softmax, no mask, no parameters.
ag::Matrix SelfAttentionSmooth(const ag::Matrix& features);
ag::Var SelfAttentionSmooth(const ag::Var& features);

// sum_i E_i + alpha * gated pair distances k-1 frames apart (anchor-gated).
double StcrLoss(const std::vector<double>& entropy, const ag::Matrix& smoothed,
                const std::vector<bool>& silence_mask, int window_k, double alpha);

// One optimization stage of the generic engine. Baselines and ablations are
// expressed as lists of these.
enum class Objective {
  kConfidenceWeighted,  // sum S_i E_i
  kEntropy,             // sum E_i
  kFilteredEntropy,     // sum E_i [E_i < threshold]
  kEntropyConsistency,  // sum E_i + weight * sum pair distances
};

struct StagePlan {
  int stage_id = 1;
  int steps = 0;
  ParameterScheme scheme = ParameterScheme::kLns;
  Objective objective = Objective::kEntropy;
  double lr_ln = 2e-4;
  double lr_fe = 2e-5;  // used for tensors tagged feature_extractor

  FrameStrategy strategy = FrameStrategy::kNonSilent;  // kConfidenceWeighted
  bool unit_weights = false;  // kConfidenceWeighted: S_i = 1, no gating

  double filter_threshold = 0.0;  // kFilteredEntropy, nats

  double consistency_weight = 0.0;  // kEntropyConsistency
  int window_k = 2;
  bool smooth_features = true;
  bool gate_silence = true;
};

// The differentiable loss of one step. Weights, filters and silence gates
// come from `analysis` and are held constant.
ag::Var StageObjective(const StagePlan& plan, const ForwardPass& pass, const FrameAnalysis& analysis);

// Sees the adapted model after each completed stage, before the reset.
using StageObserver = std::function<void(const AcousticModel&, int stage_id)>;

// Snapshot, run the stages, decode, restore. Every step is recorded. A
// non-finite loss or gradient aborts the stages and marks the report failed.
AdaptationReport RunStages(AcousticModel& model, const Utterance& utterance,
                           const std::vector<StagePlan>& stages, const AdamWSettings& optimizer,
                           const std::string& method, const StageObserver& after_stage = {});

std::vector<StagePlan> FullMethodStages(const AdaptationConfig& config);

AdaptationReport AdaptUtterance(AcousticModel& model, const Utterance& utterance,
                                const AdaptationConfig& config);

using Adapter = std::function<AdaptationReport(AcousticModel&, const Utterance&)>;

struct StepAggregate {
  int step = 0;
  int stage = 0;
  int utterances = 0;
  double mean_loss = 0.0;
  double mean_nonsilent_entropy = 0.0;
  EntropyBuckets pooled;
  EntropyBuckets per_utterance_mean;
};

struct EpisodicSummary {
  std::string method;
  std::vector<AdaptationReport> reports;  // input order
  EditCounts errors_before;
  EditCounts errors_after;
  double wer_before = 0.0;
  double wer_after = 0.0;
  std::optional<double> werr;  // absent when wer_before is 0
  std::vector<StepAggregate> steps;
  int failures = 0;
};

// Runs `adapter` on every utterance independently. With workers > 1 each
// worker owns a copy of the model; results are merged in input order.
EpisodicSummary RunEpisodic(AcousticModel& model, const std::vector<Utterance>& utterances,
                            const Adapter& adapter, int workers = 1);
EpisodicSummary RunEpisodic(AcousticModel& model, const std::vector<Utterance>& utterances,
                            const AdaptationConfig& config, int workers = 1);

EpisodicSummary Summarize(std::vector<AdaptationReport> reports, const std::string& method);

}  // namespace cea
