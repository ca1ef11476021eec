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

#include "cea/decode.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "cea/errors.hpp"

namespace cea {

void Vocabulary::Validate() const {
  if (symbols.size() < 2) throw ValidationError("vocabulary needs blank plus one token");
  if (blank_index < 0 || blank_index >= size()) throw ValidationError("blank index out of range");
  if (separator_index >= size() || separator_index == blank_index) {
    throw ValidationError("bad separator index");
  }
  std::set<std::string> seen(symbols.begin(), symbols.end());
  if (seen.size() != symbols.size()) throw ValidationError("duplicate vocabulary symbols");
}

std::vector<std::string> Vocabulary::TokensToWords(const std::vector<int>& token_ids) const {
  std::vector<std::string> words;
  if (separator_index < 0) {
    for (int id : token_ids) {
      if (id != blank_index) words.push_back(symbols.at(static_cast<size_t>(id)));
    }
    return words;
  }
  std::string current;
  for (int id : token_ids) {
    if (id == blank_index) continue;
    if (id == separator_index) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current += symbols.at(static_cast<size_t>(id));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string Transcript::Text() const {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::vector<int> GreedyTokens(const Eigen::MatrixXd& logits, int blank_index) {
  std::vector<int> tokens;
  int prev = -1;
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(t, c) > logits(t, best)) best = c;
    }
    const int id = static_cast<int>(best);
    if (id != prev && id != blank_index) tokens.push_back(id);
    prev = id;
  }
  return tokens;
}

Transcript GreedyDecode(const Eigen::MatrixXd& logits, const Vocabulary& vocab) {
  Transcript t;
  t.token_ids = GreedyTokens(logits, vocab.blank_index);
  t.words = vocab.TokensToWords(t.token_ids);
  return t;
}

std::vector<std::string> SplitWords(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::istringstream in(lower);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

EditCounts& EditCounts::operator+=(const EditCounts& o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  reference_words += o.reference_words;
  return *this;
}

EditCounts AlignWords(const std::vector<std::string>& reference,
                      const std::vector<std::string>& hypothesis) {
  const size_t n = reference.size(), m = hypothesis.size();
  // cost plus (sub, del, ins) breakdown of one optimal path.
  struct Cell {
    std::int64_t cost, sub, del, ins;
  };
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = {static_cast<std::int64_t>(j), 0, 0,
                                             static_cast<std::int64_t>(j)};
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = {static_cast<std::int64_t>(i), 0, static_cast<std::int64_t>(i), 0};
    for (size_t j = 1; j <= m; ++j) {
      const bool same = reference[i - 1] == hypothesis[j - 1];
      Cell diag = prev[j - 1];
      if (!same) {
        ++diag.cost;
        ++diag.sub;
      }
      Cell up = prev[j];
      ++up.cost;
      ++up.del;
      Cell left = cur[j - 1];
      ++left.cost;
      ++left.ins;
      Cell best = diag;
      if (up.cost < best.cost) best = up;
      if (left.cost < best.cost) best = left;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  EditCounts e;
  e.substitutions = prev[m].sub;
  e.deletions = prev[m].del;
  e.insertions = prev[m].ins;
  e.reference_words = static_cast<std::int64_t>(n);
  return e;
}

double Wer(const std::vector<std::string>& reference,
           const std::vector<std::string>& hypothesis) {
  if (reference.empty()) throw ValidationError("WER needs a non-empty reference");
  const EditCounts e = AlignWords(reference, hypothesis);
  return static_cast<double>(e.errors()) / static_cast<double>(e.reference_words);
}

double CorpusWer(const EditCounts& totals) {
  if (totals.reference_words <= 0) throw ValidationError("corpus has no reference words");
  return static_cast<double>(totals.errors()) / static_cast<double>(totals.reference_words);
}

double Werr(double wer_source, double wer_adapted) {
  if (wer_source == 0.0) throw ValidationError("WERR undefined for a zero source WER");
  return (wer_source - wer_adapted) / wer_source;
}

}  // namespace cea
