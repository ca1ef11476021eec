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

// Synthetic speech-like recognition task.
//
// Class layout: 0 = blank, 1..num_tokens = letters "a", "b", ..., and
// num_tokens + 1 = word separator "|". Every letter is a windowed two-partial
// tone at its own fundamental. Letters inside a word are separated by short
// gaps; words are separated by long silent gaps, which is how the separator
// is rendered. Each utterance is normalized to peak amplitude 1.

#include <cstdint>
#include <string>
#include <vector>

#include "cea/decode.hpp"

namespace cea {

struct ToyTaskSpec {
  int num_tokens = 10;
  int sample_rate = 8000;
  int template_length = 480;
  double base_frequency = 300.0;
  double frequency_step = 150.0;
  // Per-letter peak amplitude before utterance normalization, drawn
  // log-uniformly.
  double amplitude_min = 0.02;
  double amplitude_max = 1.0;
  int short_gap_min = 40;
  int short_gap_max = 120;
  int long_gap_min = 640;
  int long_gap_max = 960;
  int edge_silence_min = 0;
  int edge_silence_max = 80;
  int words_min = 2;
  int words_max = 4;
  int letters_min = 1;
  int letters_max = 3;

  int num_classes() const { return num_tokens + 2; }
  int separator_index() const { return num_tokens + 1; }
  void Validate() const;
};

Vocabulary MakeToyVocabulary(const ToyTaskSpec& spec);

struct Utterance {
  std::string id;
  std::vector<double> samples;
  int sample_rate = 0;
  std::vector<std::string> words;  // reference transcript
  std::vector<int> target;         // CTC target incl. separators between words
};

// Renders the given words (each a list of letter ids in 1..num_tokens).
// Gap lengths, letter amplitudes and phases are drawn from `seed`.
Utterance RenderWords(const ToyTaskSpec& spec, const std::vector<std::vector<int>>& words,
                      std::uint64_t seed);

// Random words, then RenderWords. Deterministic in (spec, seed).
Utterance GenerateToyUtterance(const ToyTaskSpec& spec, std::uint64_t seed);

std::vector<Utterance> GenerateToyCorpus(const ToyTaskSpec& spec, int count,
                                         std::uint64_t seed, const std::string& id_prefix);

// Deterministic sub-seed for (base, stream, index).
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

}  // namespace cea
