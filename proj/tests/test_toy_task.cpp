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

#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "cea/errors.hpp"
#include "cea/toy_task.hpp"

namespace cea {
namespace {

ToyTaskSpec FixedGaps() {
  ToyTaskSpec s;
  s.short_gap_min = s.short_gap_max = 100;
  s.long_gap_min = s.long_gap_max = 800;
  s.edge_silence_min = s.edge_silence_max = 50;
  return s;
}

double PowerAt(const std::vector<double>& x, double freq, int sr) {
  std::complex<double> acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * freq * static_cast<double>(i) / sr);
  }
  return std::norm(acc);
}

TEST(ToyTask, LengthArithmetic) {
  const ToyTaskSpec s = FixedGaps();
  const Utterance one_word = RenderWords(s, {{1, 2, 1}}, 5);
  EXPECT_EQ(one_word.samples.size(), size_t(3 * 480 + 2 * 100 + 2 * 50));
  const Utterance three_words = RenderWords(s, {{1}, {2}, {1}}, 5);
  EXPECT_EQ(three_words.samples.size(), size_t(3 * 480 + 2 * 800 + 2 * 50));
  EXPECT_EQ(three_words.words, (std::vector<std::string>{"a", "b", "a"}));
  EXPECT_EQ(three_words.target, (std::vector<int>{1, 11, 2, 11, 1}));
  EXPECT_EQ(one_word.words, (std::vector<std::string>{"aba"}));
}

TEST(ToyTask, PeakNormalized) {
  const Utterance u = GenerateToyUtterance(ToyTaskSpec{}, 3);
  double peak = 0.0;
  for (double v : u.samples) peak = std::max(peak, std::abs(v));
  EXPECT_DOUBLE_EQ(peak, 1.0);
}

TEST(ToyTask, Deterministic) {
  const ToyTaskSpec s;
  const Utterance a = GenerateToyUtterance(s, 42);
  const Utterance b = GenerateToyUtterance(s, 42);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.words, b.words);
  EXPECT_NE(a.samples, GenerateToyUtterance(s, 43).samples);
  const auto c1 = GenerateToyCorpus(s, 5, 9, "u-");
  const auto c2 = GenerateToyCorpus(s, 5, 9, "u-");
  ASSERT_EQ(c1.size(), 5u);
  EXPECT_EQ(c1[4].id, "u-00004");
  for (int i = 0; i < 5; ++i) EXPECT_EQ(c1[i].samples, c2[i].samples);
}

TEST(ToyTask, TranscriptRangesHonored) {
  const ToyTaskSpec s;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Utterance u = GenerateToyUtterance(s, seed);
    EXPECT_GE(static_cast<int>(u.words.size()), s.words_min);
    EXPECT_LE(static_cast<int>(u.words.size()), s.words_max);
    for (const auto& w : u.words) {
      EXPECT_GE(static_cast<int>(w.size()), s.letters_min);
      EXPECT_LE(static_cast<int>(w.size()), s.letters_max);
    }
  }
}

TEST(ToyTask, DistinctLettersHaveDistinctTemplates) {
  ToyTaskSpec s = FixedGaps();
  s.edge_silence_min = s.edge_silence_max = 0;
  for (int letter = 1; letter <= s.num_tokens; ++letter) {
    const Utterance u = RenderWords(s, {{letter}}, 1);
    int best = 0;
    double best_power = -1.0;
    for (int k = 1; k <= s.num_tokens; ++k) {
      const double p = PowerAt(u.samples, s.base_frequency + s.frequency_step * (k - 1), s.sample_rate);
      if (p > best_power) {
        best_power = p;
        best = k;
      }
    }
    EXPECT_EQ(best, letter);
  }
}

TEST(ToyTask, Validation) {
  ToyTaskSpec s;
  s.letters_min = 0;
  EXPECT_THROW(s.Validate(), ValidationError);
  s = ToyTaskSpec{};
  s.words_max = 0;
  EXPECT_THROW(s.Validate(), ValidationError);
  s = ToyTaskSpec{};
  s.num_tokens = 26;
  EXPECT_THROW(s.Validate(), ValidationError);
  EXPECT_THROW(RenderWords(ToyTaskSpec{}, {}, 1), ValidationError);
  EXPECT_THROW(RenderWords(ToyTaskSpec{}, {{11}}, 1), ValidationError);
  EXPECT_EQ(MakeToyVocabulary(ToyTaskSpec{}).size(), 12);
}

TEST(DeriveSeed, StreamsAreIndependent) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t stream = 0; stream < 4; ++stream)
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(DeriveSeed(7, stream, i));
  EXPECT_EQ(seen.size(), 200u);
  EXPECT_EQ(DeriveSeed(7, 1, 2), DeriveSeed(7, 1, 2));
}

}  // namespace
}  // namespace cea
