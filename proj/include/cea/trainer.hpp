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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cea/model.hpp"
#include "cea/toy_task.hpp"

namespace cea {

struct TrainConfig {
  int train_size = 1200;
  int held_out_size = 200;
  int epochs = 4;
  int batch_size = 8;
  double learning_rate = 2e-3;
  double target_wer = 0.02;
  // Weight of a per-frame cross-entropy to the uniform distribution added
  // to the CTC loss. Zero gives plain CTC.
  double label_smoothing = 0.05;
  std::uint64_t seed = 7;
  ModelConfig model;
};

struct TrainReport {
  int epochs_run = 0;
  std::vector<double> epoch_loss;  // mean CTC loss per epoch
  double held_out_wer = 1.0;
  bool reached_target = false;
  std::string diagnostics;
};

// Supervised CTC training on clean toy utterances. Deterministic in the
// config. Missing the target WER is reported, not thrown.
AcousticModel TrainReferenceModel(const ToyTaskSpec& spec, const TrainConfig& config,
                                  TrainReport* report = nullptr,
                                  const std::function<void(const std::string&)>& log = {});

// Corpus WER of greedy decoding without adaptation.
double EvaluateWer(const AcousticModel& model, const std::vector<Utterance>& corpus);

}  // namespace cea
