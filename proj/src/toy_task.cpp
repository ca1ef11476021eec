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

#include "cea/toy_task.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "cea/errors.hpp"

namespace cea {

void ToyTaskSpec::Validate() const {
  if (num_tokens < 1 || num_tokens > 26) throw ValidationError("num_tokens must be in [1, 26]");
  if (sample_rate <= 0 || template_length <= 0) throw ValidationError("bad sample rate/template");
  if (!(amplitude_min > 0.0) || amplitude_max < amplitude_min) {
    throw ValidationError("bad amplitude range");
  }
  auto range = [](int lo, int hi, const char* what, int floor) {
    if (lo < floor || hi < lo) throw ValidationError(std::string("bad ") + what + " range");
  };
  range(short_gap_min, short_gap_max, "short gap", 0);
  range(long_gap_min, long_gap_max, "long gap", 0);
  range(edge_silence_min, edge_silence_max, "edge silence", 0);
  range(words_min, words_max, "word count", 1);
  range(letters_min, letters_max, "letter count", 1);
  // Second partial of the highest letter must stay below Nyquist.
  const double top = 2.0 * (base_frequency + frequency_step * (num_tokens - 1));
  if (top >= sample_rate / 2.0) throw ValidationError("letter tones exceed Nyquist");
}

Vocabulary MakeToyVocabulary(const ToyTaskSpec& spec) {
  Vocabulary v;
  v.symbols.push_back("<blank>");
  for (int i = 0; i < spec.num_tokens; ++i) v.symbols.push_back(std::string(1, static_cast<char>('a' + i)));
  v.symbols.push_back("|");
  v.blank_index = 0;
  v.separator_index = spec.separator_index();
  return v;
}

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

int UniformInt(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

void AppendSilence(std::vector<double>& out, int n) { out.insert(out.end(), static_cast<size_t>(n), 0.0); }

void AppendLetter(const ToyTaskSpec& spec, int letter, std::mt19937_64& rng,
                  std::vector<double>& out) {
  // Log-uniform loudness, so quiet letters sit close to the noise floor.
  const double amp = std::exp(std::uniform_real_distribution<double>(
      std::log(spec.amplitude_min), std::log(spec.amplitude_max))(rng));
  const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  const double f0 = spec.base_frequency + spec.frequency_step * (letter - 1);
  const int n = spec.template_length;
  const int ramp = std::max(1, n / 8);
  for (int i = 0; i < n; ++i) {
    double env = 1.0;
    if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
    if (i >= n - ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * (n - 1 - i) / ramp);
    const double t = static_cast<double>(i) / spec.sample_rate;
    const double w = 2.0 * std::numbers::pi * f0 * t + phase;
    out.push_back(amp * env * (0.7 * std::sin(w) + 0.3 * std::sin(2.0 * w)));
  }
}

}  // namespace

Utterance RenderWords(const ToyTaskSpec& spec, const std::vector<std::vector<int>>& words,
                      std::uint64_t seed) {
  spec.Validate();
  if (words.empty()) throw ValidationError("utterance needs at least one word");
  std::mt19937_64 rng(seed);
  Vocabulary vocab = MakeToyVocabulary(spec);
  Utterance u;
  u.sample_rate = spec.sample_rate;
  AppendSilence(u.samples, UniformInt(rng, spec.edge_silence_min, spec.edge_silence_max));
  for (size_t w = 0; w < words.size(); ++w) {
    if (words[w].empty()) throw ValidationError("empty word");
    if (w > 0) {
      AppendSilence(u.samples, UniformInt(rng, spec.long_gap_min, spec.long_gap_max));
      u.target.push_back(spec.separator_index());
    }
    std::string text;
    for (size_t l = 0; l < words[w].size(); ++l) {
      const int letter = words[w][l];
      if (letter < 1 || letter > spec.num_tokens) throw ValidationError("letter id out of range");
      if (l > 0) AppendSilence(u.samples, UniformInt(rng, spec.short_gap_min, spec.short_gap_max));
      AppendLetter(spec, letter, rng, u.samples);
      u.target.push_back(letter);
      text += vocab.symbols[static_cast<size_t>(letter)];
    }
    u.words.push_back(std::move(text));
  }
  AppendSilence(u.samples, UniformInt(rng, spec.edge_silence_min, spec.edge_silence_max));
  double peak = 0.0;
  for (double s : u.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0) {
    for (double& s : u.samples) s /= peak;
  }
  return u;
}

Utterance GenerateToyUtterance(const ToyTaskSpec& spec, std::uint64_t seed) {
  spec.Validate();
  std::mt19937_64 rng(DeriveSeed(seed, 0x776f726473ULL, 0));
  const int num_words = UniformInt(rng, spec.words_min, spec.words_max);
  std::vector<std::vector<int>> words(static_cast<size_t>(num_words));
  for (auto& w : words) {
    const int len = UniformInt(rng, spec.letters_min, spec.letters_max);
    for (int i = 0; i < len; ++i) {
      int letter = 0;
      // Adjacent letters within a word differ.
      do {
        letter = UniformInt(rng, 1, spec.num_tokens);
      } while (!w.empty() && w.back() == letter && spec.num_tokens > 1);
      w.push_back(letter);
    }
  }
  return RenderWords(spec, words, DeriveSeed(seed, 0x72656e646572ULL, 0));
}

std::vector<Utterance> GenerateToyCorpus(const ToyTaskSpec& spec, int count, std::uint64_t seed,
                                         const std::string& id_prefix) {
  std::vector<Utterance> out;
  out.reserve(static_cast<size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    Utterance u = GenerateToyUtterance(spec, DeriveSeed(seed, 0x636f72707573ULL, static_cast<std::uint64_t>(i)));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%05d", i);
    u.id = id_prefix + buf;
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace cea
