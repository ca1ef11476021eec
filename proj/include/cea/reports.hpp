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

// Report serialization: one JSON record per utterance (records.jsonl) and
// one aggregate document per run (summary.json). Summaries hold no timings,
// so equal inputs give byte-identical files.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cea/adaptation.hpp"
#include "cea/frame_analysis.hpp"

namespace cea {

nlohmann::json BucketsToJson(const EntropyBuckets& b);
// Rebuilds buckets from a per-step record (counts are authoritative).
EntropyBuckets BucketsFromStepJson(const nlohmann::json& step);

nlohmann::json ReportToJson(const AdaptationReport& r, const std::string& group);

// `groups[i]` labels `s.reports[i]`; per-group WERs are listed in order of
// first appearance.
nlohmann::json SummaryToJson(const EpisodicSummary& s, const std::vector<std::string>& groups);

std::vector<nlohmann::json> ReadJsonLines(const std::filesystem::path& path);
void WriteJsonLines(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines);
void WriteJson(const std::filesystem::path& path, const nlohmann::json& j);

struct EntropyTableRow {
  int step = 0;
  int stage = 0;
  int utterances = 0;
  EntropyBuckets buckets;
};

// Aggregates the per-step buckets of utterance records across utterances.
// Throws ValidationError when there are no records or no steps.
std::vector<EntropyTableRow> EntropyTable(const std::vector<nlohmann::json>& records,
                                          BucketAggregation mode);

// Tab-separated, header line first.
std::string FormatEntropyTable(const std::vector<EntropyTableRow>& rows);

}  // namespace cea
