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

// The five pipeline commands behind the `cea` tool.
//
//   train-toy        out/model.ckpt, out/train_report.json,
//                    out/test/manifest.jsonl + out/test/audio/*.wav
//   corrupt          out/manifest.jsonl + out/<label>/*.wav
//   adapt            out/<method>/records.jsonl, out/<method>/summary.json,
//                    out/comparison.tsv
//   evaluate         out/records.jsonl, out/summary.json, out/severity.tsv
//   analyze-entropy  out/entropy_table.tsv (also printed)
//
// Every command writes out/config.resolved.json and validates its config
// and inputs before creating anything under out/.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cea/experiment.hpp"

namespace cea {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

struct CommandOptions {
  std::string config_path;  // empty: built-in defaults
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;
  std::optional<std::string> method;
  std::optional<int> workers;
  std::optional<std::string> model_path;
  std::optional<std::string> manifest_path;
  std::optional<std::string> records_path;
};

// Config file plus flag overrides, validated.
ExperimentConfig ResolveConfig(const CommandOptions& options);

std::vector<std::string> CommandNames();

// Throw ValidationError / RuntimeFailure. `log` receives progress lines.
void TrainToyCommand(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
void CorruptCommand(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
void AdaptCommand(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
void EvaluateCommand(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
void AnalyzeEntropyCommand(const ExperimentConfig& config, const std::filesystem::path& out,
                           std::ostream& table, std::ostream& log);

// Dispatches by name and maps failures to exit codes: 0 ok, 1 validation
// error, 2 runtime failure.
int RunCommand(const std::string& name, const CommandOptions& options, std::ostream& out,
               std::ostream& log);

}  // namespace cea
