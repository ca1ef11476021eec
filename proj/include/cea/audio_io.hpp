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

// Mono RIFF/WAVE files: 16-bit PCM and 32-bit IEEE float.

#include <filesystem>
#include <span>
#include <vector>

namespace cea {

enum class SampleFormat { kPcm16, kFloat32 };

struct WaveData {
  std::vector<double> samples;  // PCM16 is scaled to [-1, 1)
  int sample_rate = 0;
  SampleFormat format = SampleFormat::kFloat32;
};

// Throws ValidationError on malformed or unsupported files.
WaveData ReadWave(const std::filesystem::path& path);

// PCM16 saturates at full scale; float32 stores samples as-is.
void WriteWave(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate, SampleFormat format = SampleFormat::kFloat32);

}  // namespace cea
