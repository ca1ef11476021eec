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

// Utterance manifests: one JSON object per line.
//
//   {"id": "test-00000", "audio": "audio/test-00000.wav", "text": "ab c",
//    "sample_rate": 8000, "num_samples": 4312,
//    "corruption": {...}}          <- only in corrupted manifests
//
// Audio paths are relative to the manifest's directory unless absolute.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cea/corruption.hpp"
#include "cea/toy_task.hpp"

namespace cea {

struct CorruptionMeta {
  std::string label;
  CorruptionSpec spec;      // spec.seed is the per-utterance seed
  std::string source_audio;
  // Recomputed from the stored clean and corrupted files. Absent when the
  // added noise is exactly zero.
  std::optional<double> measured_snr_db;
};

struct ManifestRecord {
  std::string id;
  std::string audio;
  std::string text;
  int sample_rate = 0;
  std::int64_t num_samples = 0;
  std::optional<CorruptionMeta> corruption;

  // Grouping key for reports: the corruption label, or "clean".
  std::string Group() const { return corruption ? corruption->label : "clean"; }
};

struct Manifest {
  std::filesystem::path path;  // the manifest file; audio resolves against its directory
  std::vector<ManifestRecord> records;

  std::filesystem::path AudioPath(const ManifestRecord& r) const;
};

// Throws ValidationError on unreadable files, malformed lines, duplicate ids
// or empty transcripts.
Manifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

// Loads the waveform and splits the transcript into words. The CTC target
// is left empty.
Utterance LoadUtterance(const Manifest& manifest, const ManifestRecord& record);

}  // namespace cea
