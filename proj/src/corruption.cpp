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

#include "cea/corruption.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cea/errors.hpp"

namespace cea {

void CorruptionSpec::Validate() const {
  if (kind == CorruptionKind::kGaussian) {
    if (!(gaussian_amplitude >= 0.0) || !std::isfinite(gaussian_amplitude)) {
      throw ValidationError("gaussian amplitude must be finite and >= 0");
    }
  } else {
    if (!std::isfinite(snr_db)) throw ValidationError("SNR must be finite");
    if (noise_source.empty()) throw ValidationError("SNR mixing needs a noise source");
  }
}

std::string CorruptionSpec::Label() const {
  std::ostringstream os;
  if (kind == CorruptionKind::kGaussian) {
    os << "gaussian_" << gaussian_amplitude;
  } else {
    os << "snr_" << noise_source << "_" << snr_db << "dB";
  }
  return os.str();
}

std::vector<double> GaussianCorrupt(std::span<const double> clean, double delta,
                                    std::uint64_t seed) {
  if (!(delta >= 0.0)) throw ValidationError("gaussian amplitude must be >= 0");
  std::vector<double> out(clean.begin(), clean.end());
  if (delta == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& s : out) s += delta * normal(rng);
  return out;
}

double Rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double MeasureSnrDb(std::span<const double> clean, std::span<const double> noise) {
  return 20.0 * std::log10(Rms(clean) / Rms(noise));
}

MixResult SnrMix(std::span<const double> clean, std::span<const double> noise, double snr_db,
                 std::uint64_t seed) {
  if (!std::isfinite(snr_db)) throw ValidationError("SNR must be finite");
  const double clean_rms = Rms(clean);
  if (!(clean_rms > 0.0)) throw ValidationError("clean signal has zero RMS");
  if (!(Rms(noise) > 0.0)) throw ValidationError("noise signal has zero RMS");

  MixResult r;
  std::vector<double> segment(clean.size());
  if (noise.size() >= clean.size()) {
    std::mt19937_64 rng(seed);
    r.noise_offset = std::uniform_int_distribution<std::size_t>(0, noise.size() - clean.size())(rng);
    for (std::size_t i = 0; i < clean.size(); ++i) segment[i] = noise[r.noise_offset + i];
  } else {
    for (std::size_t i = 0; i < clean.size(); ++i) segment[i] = noise[i % noise.size()];
  }
  const double seg_rms = Rms(segment);
  if (!(seg_rms > 0.0)) throw ValidationError("selected noise segment has zero RMS");
  r.gain = clean_rms / (seg_rms * std::pow(10.0, snr_db / 20.0));
  r.scaled_noise.resize(clean.size());
  r.mixed.resize(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    r.scaled_noise[i] = r.gain * segment[i];
    r.mixed[i] = clean[i] + r.scaled_noise[i];
  }
  r.measured_snr_db = MeasureSnrDb(clean, r.scaled_noise);
  return r;
}

std::string ToString(SyntheticNoise n) {
  switch (n) {
    case SyntheticNoise::kWhite: return "white";
    case SyntheticNoise::kHum: return "hum";
    case SyntheticNoise::kBabble: return "babble";
  }
  return "?";
}

SyntheticNoise ParseSyntheticNoise(const std::string& name) {
  if (name == "white") return SyntheticNoise::kWhite;
  if (name == "hum") return SyntheticNoise::kHum;
  if (name == "babble") return SyntheticNoise::kBabble;
  throw ValidationError("unknown synthetic noise '" + name + "'");
}

std::vector<double> GenerateSyntheticNoise(SyntheticNoise kind, std::size_t length,
                                           int sample_rate, std::uint64_t seed) {
  if (sample_rate <= 0) throw ValidationError("bad sample rate");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(length, 0.0);
  const double two_pi = 2.0 * std::numbers::pi;
  switch (kind) {
    case SyntheticNoise::kWhite:
      for (double& s : out) s = normal(rng);
      break;
    case SyntheticNoise::kHum: {
      // Mains-like hum: 50 Hz fundamental with decaying harmonics plus a
      // little broadband floor.
      const double phase = unit(rng) * two_pi;
      for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        double v = 0.0;
        for (int h = 1; h <= 6; ++h) v += std::sin(two_pi * 50.0 * h * t + h * phase) / h;
        out[i] = v + 0.05 * normal(rng);
      }
      break;
    }
    case SyntheticNoise::kBabble: {
      // Overlapping amplitude-modulated tones at random pitches.
      constexpr int kTalkers = 6;
      double f[kTalkers], rate[kTalkers], ph[kTalkers];
      for (int k = 0; k < kTalkers; ++k) {
        f[k] = 150.0 + unit(rng) * 1500.0;
        rate[k] = 2.0 + unit(rng) * 4.0;
        ph[k] = unit(rng) * two_pi;
      }
      for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        double v = 0.0;
        for (int k = 0; k < kTalkers; ++k) {
          const double env = 0.5 + 0.5 * std::sin(two_pi * rate[k] * t + ph[k]);
          v += env * std::sin(two_pi * f[k] * t + 3.0 * ph[k]);
        }
        out[i] = v + 0.1 * normal(rng);
      }
      break;
    }
  }
  return out;
}

}  // namespace cea
