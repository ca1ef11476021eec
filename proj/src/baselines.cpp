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

#include "cea/baselines.hpp"

#include <cmath>

#include "cea/errors.hpp"

namespace cea {

std::string ToString(Method m) {
  switch (m) {
    case Method::kSource: return "source";
    case Method::kOurs: return "ours";
    case Method::kTent: return "tent";
    case Method::kSarFilter: return "sar_filter";
    case Method::kTeco: return "teco";
    case Method::kSutaLike: return "suta_like";
    case Method::kOursWoStcr: return "ours_wo_stcr";
    case Method::kOursWoCea: return "ours_wo_cea";
  }
  return "?";
}

Method ParseMethod(const std::string& name) {
  for (Method m : AllMethods()) {
    if (ToString(m) == name) return m;
  }
  throw ValidationError("unknown method '" + name + "'");
}

std::vector<Method> AllMethods() {
  return {Method::kSource, Method::kOurs,     Method::kTent,       Method::kSarFilter,
          Method::kTeco,   Method::kSutaLike, Method::kOursWoStcr, Method::kOursWoCea};
}

namespace {

void CheckSteps(int steps, double lr) {
  if (steps < 0) throw ValidationError("steps must be >= 0");
  if (!(lr > 0.0)) throw ValidationError("learning rate must be > 0");
}

StagePlan LnEntropyStage(int steps, double lr) {
  StagePlan p;
  p.stage_id = 1;
  p.steps = steps;
  p.scheme = ParameterScheme::kLns;
  p.objective = Objective::kEntropy;
  p.lr_ln = lr;
  p.lr_fe = lr;
  return p;
}

}  // namespace

AdaptationReport TentAdapt(AcousticModel& model, const Utterance& u, int steps, double lr,
                           const AdamWSettings& opt) {
  CheckSteps(steps, lr);
  return RunStages(model, u, {LnEntropyStage(steps, lr)}, opt, "tent");
}

AdaptationReport SarFilterAdapt(AcousticModel& model, const Utterance& u, int steps, double lr,
                                double threshold_factor, const AdamWSettings& opt) {
  CheckSteps(steps, lr);
  if (!(threshold_factor >= 0.0)) throw ValidationError("threshold factor must be >= 0");
  StagePlan p = LnEntropyStage(steps, lr);
  p.objective = Objective::kFilteredEntropy;
  p.filter_threshold = threshold_factor * std::log(static_cast<double>(model.num_classes()));
  return RunStages(model, u, {p}, opt, "sar_filter");
}

AdaptationReport TecoAdapt(AcousticModel& model, const Utterance& u, int steps, double lr,
                           double coherence_weight, const AdamWSettings& opt) {
  CheckSteps(steps, lr);
  if (!(coherence_weight >= 0.0)) throw ValidationError("coherence weight must be >= 0");
  StagePlan p = LnEntropyStage(steps, lr);
  p.objective = Objective::kEntropyConsistency;
  p.consistency_weight = coherence_weight;
  p.window_k = 2;
  p.smooth_features = false;
  p.gate_silence = false;
  return RunStages(model, u, {p}, opt, "teco");
}

AdaptationReport SutaLikeAdapt(AcousticModel& model, const Utterance& u, int steps, double lr_ln,
                               double lr_fe, const AdamWSettings& opt) {
  CheckSteps(steps, lr_ln);
  CheckSteps(steps, lr_fe);
  StagePlan p = LnEntropyStage(steps, lr_ln);
  p.scheme = ParameterScheme::kFePlusLns;
  p.lr_fe = lr_fe;
  return RunStages(model, u, {p}, opt, "suta_like");
}

AdaptationReport AblationVariantAdapt(AcousticModel& model, const Utterance& u,
                                      const AdaptationConfig& config, AblationVariant variant) {
  std::vector<StagePlan> stages = FullMethodStages(config);
  const int budget = config.total_steps();
  if (variant == AblationVariant::kWoStcr) {
    stages[0].steps = budget;
    return RunStages(model, u, {stages[0]}, config.optimizer, "ours_wo_stcr");
  }
  stages[1].steps = budget;
  return RunStages(model, u, {stages[1]}, config.optimizer, "ours_wo_cea");
}

AdaptationReport SourceEvaluate(AcousticModel& model, const Utterance& u) {
  return RunStages(model, u, {}, AdamWSettings{}, "source");
}

Adapter MakeAdapter(const BaselineSpec& spec, const AdaptationConfig& config) {
  config.Validate();
  const int steps = config.total_steps();
  switch (spec.method) {
    case Method::kSource:
      return [](AcousticModel& m, const Utterance& u) { return SourceEvaluate(m, u); };
    case Method::kOurs:
      return [config](AcousticModel& m, const Utterance& u) { return AdaptUtterance(m, u, config); };
    case Method::kTent:
      return [config, steps](AcousticModel& m, const Utterance& u) {
        return TentAdapt(m, u, steps, config.lr_ln, config.optimizer);
      };
    case Method::kSarFilter:
      return [config, steps, f = spec.threshold_factor](AcousticModel& m, const Utterance& u) {
        return SarFilterAdapt(m, u, steps, config.lr_ln, f, config.optimizer);
      };
    case Method::kTeco:
      return [config, steps, w = spec.coherence_weight](AcousticModel& m, const Utterance& u) {
        return TecoAdapt(m, u, steps, config.lr_ln, w, config.optimizer);
      };
    case Method::kSutaLike:
      return [config, steps](AcousticModel& m, const Utterance& u) {
        return SutaLikeAdapt(m, u, steps, config.lr_ln, config.lr_fe, config.optimizer);
      };
    case Method::kOursWoStcr:
      return [config](AcousticModel& m, const Utterance& u) {
        return AblationVariantAdapt(m, u, config, AblationVariant::kWoStcr);
      };
    case Method::kOursWoCea:
      return [config](AcousticModel& m, const Utterance& u) {
        return AblationVariantAdapt(m, u, config, AblationVariant::kWoCea);
      };
  }
  throw ValidationError("unknown method");
}

}  // namespace cea
