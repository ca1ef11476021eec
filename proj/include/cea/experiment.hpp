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

// Declarative experiment configuration (a JSON document). Every field has a
// default, so an empty object is a valid config. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cea/adaptation.hpp"
#include "cea/audio_io.hpp"
#include "cea/baselines.hpp"
#include "cea/corruption.hpp"
#include "cea/frame_analysis.hpp"
#include "cea/model.hpp"
#include "cea/toy_task.hpp"
#include "cea/trainer.hpp"

namespace cea {

struct ExperimentConfig {
  std::uint64_t seed = 7;
  ToyTaskSpec toy;
  ModelConfig model;
  TrainConfig train;  // train.seed and train.model are filled from the above
  int test_size = 100;
  // An unset corruption seed (0) is derived from the global seed.
  std::vector<CorruptionSpec> corruptions = {{CorruptionKind::kGaussian, 0.01, 0.0, "", 0}};
  AdaptationConfig adaptation;
  BaselineSpec baselines;  // .method is ignored
  std::vector<std::string> methods = {"ours"};
  int workers = 1;
  SampleFormat audio_format = SampleFormat::kFloat32;
  BucketAggregation aggregation = BucketAggregation::kPooled;

  // Inputs. Relative paths resolve against the working directory.
  std::string model_path;
  std::string manifest_path;
  std::string records_path;

  void Validate() const;
};

ExperimentConfig ConfigFromJson(const nlohmann::json& j);
nlohmann::json ConfigToJson(const ExperimentConfig& c);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

// Independent stream of the global seed, e.g. SubSeed(c, "corpus", 0).
std::uint64_t SubSeed(const ExperimentConfig& c, std::string_view stream, std::uint64_t index = 0);

// The per-corruption seed: the configured one, or one derived from the
// global seed and the corruption's position in the list.
std::uint64_t CorruptionSeed(const ExperimentConfig& c, size_t index);

// Training config with seed and architecture taken from the experiment.
TrainConfig ResolvedTrainConfig(const ExperimentConfig& c);

std::string ToString(SampleFormat f);
SampleFormat ParseSampleFormat(const std::string& name);
std::string ToString(BucketAggregation a);
BucketAggregation ParseBucketAggregation(const std::string& name);

}  // namespace cea
