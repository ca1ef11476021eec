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

#include "cea/reports.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include "cea/errors.hpp"

namespace cea {

using nlohmann::json;

namespace {

json EditsToJson(const EditCounts& e) {
  return {{"substitutions", e.substitutions},
          {"deletions", e.deletions},
          {"insertions", e.insertions},
          {"reference_words", e.reference_words}};
}

json OptionalNumber(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string Join(const std::vector<std::string>& words) {
  std::string s;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += words[i];
  }
  return s;
}

}  // namespace

json BucketsToJson(const EntropyBuckets& b) {
  return {{"nonsil_high", b.frac_nonsil_high},
          {"nonsil_low", b.frac_nonsil_low},
          {"sil_high", b.frac_sil_high},
          {"sil_low", b.frac_sil_low}};
}

EntropyBuckets BucketsFromStepJson(const json& step) {
  EntropyBuckets b;
  try {
    const json& c = step.at("counts");
    b.count_nonsil_high = c.at("nonsil_high").get<std::int64_t>();
    b.count_nonsil_low = c.at("nonsil_low").get<std::int64_t>();
    b.count_sil_high = c.at("sil_high").get<std::int64_t>();
    b.count_sil_low = c.at("sil_low").get<std::int64_t>();
    b.threshold = step.at("threshold").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed step record: ") + e.what());
  }
  b.num_frames = b.count_nonsil_high + b.count_nonsil_low + b.count_sil_high + b.count_sil_low;
  if (b.num_frames <= 0) throw ValidationError("step record with no frames");
  const double n = static_cast<double>(b.num_frames);
  b.frac_nonsil_high = static_cast<double>(b.count_nonsil_high) / n;
  b.frac_nonsil_low = static_cast<double>(b.count_nonsil_low) / n;
  b.frac_sil_high = static_cast<double>(b.count_sil_high) / n;
  b.frac_sil_low = static_cast<double>(b.count_sil_low) / n;
  return b;
}

json ReportToJson(const AdaptationReport& r, const std::string& group) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"step", s.step},
                     {"stage", s.stage},
                     {"loss", s.loss},
                     {"mean_nonsilent_entropy", s.mean_nonsilent_entropy},
                     {"num_nonsilent", s.num_nonsilent},
                     {"threshold", s.buckets.threshold},
                     {"counts",
                      {{"nonsil_high", s.buckets.count_nonsil_high},
                       {"nonsil_low", s.buckets.count_nonsil_low},
                       {"sil_high", s.buckets.count_sil_high},
                       {"sil_low", s.buckets.count_sil_low}}},
                     {"fractions", BucketsToJson(s.buckets)}});
  }
  return {{"id", r.utterance_id},
          {"group", group},
          {"method", r.method},
          {"reference", Join(r.reference)},
          {"transcript_before", r.before.Text()},
          {"transcript_after", r.after.Text()},
          {"wer_before", r.wer_before},
          {"wer_after", r.wer_after},
          {"errors_before", EditsToJson(r.errors_before)},
          {"errors_after", EditsToJson(r.errors_after)},
          {"failed", r.failed},
          {"failure", r.failure},
          {"stage_seconds", r.stage_seconds},
          {"steps", steps}};
}

json SummaryToJson(const EpisodicSummary& s, const std::vector<std::string>& groups) {
  if (groups.size() != s.reports.size()) throw std::invalid_argument("one group label per report");
  json j;
  j["method"] = s.method;
  if (s.method == "suta_like") {
    j["note"] = "simplified proxy: entropy minimization over extractor and layer norms only; "
                "no class-confusion term or temperature";
  }
  j["utterances"] = s.reports.size();
  j["failures"] = s.failures;
  j["wer_before"] = s.wer_before;
  j["wer_after"] = s.wer_after;
  j["werr"] = OptionalNumber(s.werr);
  j["errors_before"] = EditsToJson(s.errors_before);
  j["errors_after"] = EditsToJson(s.errors_after);

  std::vector<std::string> order;
  std::map<std::string, std::pair<EditCounts, EditCounts>> by_group;
  std::map<std::string, int> sizes;
  for (size_t i = 0; i < groups.size(); ++i) {
    if (!by_group.count(groups[i])) order.push_back(groups[i]);
    by_group[groups[i]].first += s.reports[i].errors_before;
    by_group[groups[i]].second += s.reports[i].errors_after;
    ++sizes[groups[i]];
  }
  json gj = json::array();
  for (const auto& g : order) {
    const auto& [before, after] = by_group[g];
    const double wb = CorpusWer(before);
    const double wa = CorpusWer(after);
    gj.push_back({{"group", g},
                  {"utterances", sizes[g]},
                  {"wer_before", wb},
                  {"wer_after", wa},
                  {"werr", wb > 0.0 ? json(Werr(wb, wa)) : json(nullptr)}});
  }
  j["groups"] = gj;

  json steps = json::array();
  for (const auto& a : s.steps) {
    steps.push_back({{"step", a.step},
                     {"stage", a.stage},
                     {"utterances", a.utterances},
                     {"mean_loss", a.mean_loss},
                     {"mean_nonsilent_entropy", a.mean_nonsilent_entropy},
                     {"threshold", a.pooled.threshold},
                     {"pooled", BucketsToJson(a.pooled)},
                     {"per_utterance_mean", BucketsToJson(a.per_utterance_mean)}});
  }
  j["steps"] = steps;
  return j;
}

std::vector<json> ReadJsonLines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void WriteJsonLines(const std::filesystem::path& path, const std::vector<json>& lines) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  for (const auto& j : lines) out << j.dump() << '\n';
  if (!out) throw RuntimeFailure("failed writing " + path.string());
}

void WriteJson(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw RuntimeFailure("failed writing " + path.string());
}

std::vector<EntropyTableRow> EntropyTable(const std::vector<json>& records, BucketAggregation mode) {
  if (records.empty()) throw ValidationError("no records to analyze");
  std::map<int, std::vector<EntropyBuckets>> per_step;
  std::map<int, int> stage_of;
  for (const auto& r : records) {
    if (!r.contains("steps") || !r["steps"].is_array()) throw ValidationError("record without steps");
    for (const auto& s : r["steps"]) {
      const int step = s.value("step", -1);
      if (step < 0) throw ValidationError("step record without a step index");
      per_step[step].push_back(BucketsFromStepJson(s));
      stage_of[step] = s.value("stage", 0);
    }
  }
  if (per_step.empty()) throw ValidationError("records contain no adaptation steps");
  std::vector<EntropyTableRow> rows;
  for (const auto& [step, parts] : per_step) {
    EntropyTableRow row;
    row.step = step;
    row.stage = stage_of[step];
    row.utterances = static_cast<int>(parts.size());
    row.buckets = AggregateBuckets(parts, mode);
    rows.push_back(row);
  }
  return rows;
}

std::string FormatEntropyTable(const std::vector<EntropyTableRow>& rows) {
  std::string out = "step\tstage\tutterances\tnonsil_high\tnonsil_low\tsil_high\tsil_low\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d\t%d\t%d\t%.6f\t%.6f\t%.6f\t%.6f\n", r.step, r.stage, r.utterances,
                  r.buckets.frac_nonsil_high, r.buckets.frac_nonsil_low, r.buckets.frac_sil_high,
                  r.buckets.frac_sil_low);
    out += buf;
  }
  return out;
}

}  // namespace cea
