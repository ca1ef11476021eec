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

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace cea {

// Output classes of a CTC model. Tokens other than blank and the word
// separator are spelled by their symbol; the separator splits words.
struct Vocabulary {
  std::vector<std::string> symbols;
  int blank_index = 0;
  int separator_index = -1;  // -1: every token is its own word

  int size() const { return static_cast<int>(symbols.size()); }
  void Validate() const;

  // Letters between separators concatenate into words; empty words vanish.
  std::vector<std::string> TokensToWords(const std::vector<int>& token_ids) const;
};

struct Transcript {
  std::vector<int> token_ids;
  std::vector<std::string> words;

  std::string Text() const;
};

// Frame argmax (ties to lowest index), collapse repeats, drop blanks.
std::vector<int> GreedyTokens(const Eigen::MatrixXd& logits, int blank_index);
Transcript GreedyDecode(const Eigen::MatrixXd& logits, const Vocabulary& vocab);

// Lowercase + whitespace split.
std::vector<std::string> SplitWords(const std::string& text);

struct EditCounts {
  std::int64_t substitutions = 0;
  std::int64_t deletions = 0;
  std::int64_t insertions = 0;
  std::int64_t reference_words = 0;

  std::int64_t errors() const { return substitutions + deletions + insertions; }
  EditCounts& operator+=(const EditCounts& o);
};

// Minimal word-level Levenshtein alignment.
EditCounts AlignWords(const std::vector<std::string>& reference,
                      const std::vector<std::string>& hypothesis);

// (S + D + I) / |reference|. Throws on an empty reference.
double Wer(const std::vector<std::string>& reference,
           const std::vector<std::string>& hypothesis);

// Total errors over total reference words.
double CorpusWer(const EditCounts& totals);

// (source - adapted) / source. Throws when source is 0.
double Werr(double wer_source, double wer_adapted);

}  // namespace cea
