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

// Comparison methods built from the same stage engine as the full method.
//
//   tent        entropy over all frames, layer-norm affines
//   sar_filter  entropy of frames below a threshold only (the entropy filter
//               of SAR; no sharpness-aware step)
//   teco        entropy plus adjacent-frame extractor-feature distance
//   suta_like   entropy over extractor + layer norms; a simplified proxy
//               without the class-confusion term, not SUTA itself
//   wo_stcr     stage 1 only, full step budget
//   wo_cea      stage 2 only, full step budget

#include <string>
#include <vector>

#include "cea/adaptation.hpp"

namespace cea {

enum class Method { kSource, kOurs, kTent, kSarFilter, kTeco, kSutaLike, kOursWoStcr, kOursWoCea };

std::string ToString(Method m);
Method ParseMethod(const std::string& name);
std::vector<Method> AllMethods();

struct BaselineSpec {
  Method method = Method::kOurs;
  double threshold_factor = 0.4;  // sar_filter: threshold = factor * ln C
  double coherence_weight = 0.3;  // teco
};

AdaptationReport TentAdapt(AcousticModel& model, const Utterance& u, int steps, double lr,
                           const AdamWSettings& opt = {});
AdaptationReport SarFilterAdapt(AcousticModel& model, const Utterance& u, int steps, double lr,
                                double threshold_factor, const AdamWSettings& opt = {});
AdaptationReport TecoAdapt(AcousticModel& model, const Utterance& u, int steps, double lr,
                           double coherence_weight, const AdamWSettings& opt = {});
AdaptationReport SutaLikeAdapt(AcousticModel& model, const Utterance& u, int steps, double lr_ln,
                               double lr_fe, const AdamWSettings& opt = {});

enum class AblationVariant { kWoStcr, kWoCea };

AdaptationReport AblationVariantAdapt(AcousticModel& model, const Utterance& u,
                                      const AdaptationConfig& config, AblationVariant variant);

// No adaptation; transcripts and WER only.
AdaptationReport SourceEvaluate(AcousticModel& model, const Utterance& u);

// Step budgets and learning rates for the baselines come from `config`
// (total steps, lr_ln, lr_fe).
Adapter MakeAdapter(const BaselineSpec& spec, const AdaptationConfig& config);

}  // namespace cea
