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

// Test-set corruption: additive Gaussian noise at a fixed amplitude, and
// mixing a noise recording into clean speech at a target SNR. Amplitudes are
// in the waveform's native units. Nothing is clipped or renormalized.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cea {

// Severity levels used for the Gaussian sweep and the SNR sweep.
inline constexpr double kGaussianAmplitudes[] = {0.005, 0.01, 0.015, 0.02, 0.03};
inline constexpr double kSnrLevelsDb[] = {10.0, 5.0, 0.0, -5.0, -10.0};

enum class CorruptionKind { kGaussian, kSnrMix };

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::kGaussian;
  double gaussian_amplitude = 0.0;  // delta, kGaussian only
  double snr_db = 0.0;              // kSnrMix only
  std::string noise_source;         // kSnrMix only
  std::uint64_t seed = 0;

  void Validate() const;
  std::string Label() const;
};

// out[t] = clean[t] + delta * N(0, 1). delta == 0 returns the input unchanged.
std::vector<double> GaussianCorrupt(std::span<const double> clean, double delta,
                                    std::uint64_t seed);

double Rms(std::span<const double> x);

struct MixResult {
  std::vector<double> mixed;
  std::vector<double> scaled_noise;  // g * noise segment, same length as clean
  double gain = 0.0;
  std::size_t noise_offset = 0;  // crop start when the noise was longer
  double measured_snr_db = 0.0;  // recomputed from clean and scaled_noise
};

// Tiles the noise when it is shorter than the clean signal, otherwise crops
// a seeded random window; scales it to the requested SNR (full-utterance
// RMS) and adds it.
MixResult SnrMix(std::span<const double> clean, std::span<const double> noise, double snr_db,
                 std::uint64_t seed);

double MeasureSnrDb(std::span<const double> clean, std::span<const double> noise);

enum class SyntheticNoise { kWhite, kHum, kBabble };

std::string ToString(SyntheticNoise n);
SyntheticNoise ParseSyntheticNoise(const std::string& name);

// Noise waveforms for SNR mixing when no recordings are supplied.
std::vector<double> GenerateSyntheticNoise(SyntheticNoise kind, std::size_t length,
                                           int sample_rate, std::uint64_t seed);

}  // namespace cea
