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

#include "cea/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "cea/audio_io.hpp"
#include "cea/decode.hpp"
#include "cea/errors.hpp"

namespace cea {

using nlohmann::json;

namespace {

json CorruptionToJson(const CorruptionMeta& c) {
  json j;
  j["label"] = c.label;
  if (c.spec.kind == CorruptionKind::kGaussian) {
    j["kind"] = "gaussian";
    j["delta"] = c.spec.gaussian_amplitude;
  } else {
    j["kind"] = "snr";
    j["snr_db"] = c.spec.snr_db;
    j["noise"] = c.spec.noise_source;
  }
  j["seed"] = c.spec.seed;
  j["source_audio"] = c.source_audio;
  j["measured_snr_db"] = c.measured_snr_db ? json(*c.measured_snr_db) : json(nullptr);
  return j;
}

CorruptionMeta CorruptionFromJson(const json& j) {
  CorruptionMeta c;
  c.label = j.at("label").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") {
    c.spec.kind = CorruptionKind::kGaussian;
    c.spec.gaussian_amplitude = j.at("delta").get<double>();
  } else if (kind == "snr") {
    c.spec.kind = CorruptionKind::kSnrMix;
    c.spec.snr_db = j.at("snr_db").get<double>();
    c.spec.noise_source = j.at("noise").get<std::string>();
  } else {
    throw ValidationError("unknown corruption kind '" + kind + "'");
  }
  c.spec.seed = j.at("seed").get<std::uint64_t>();
  c.source_audio = j.value("source_audio", "");
  if (j.contains("measured_snr_db") && !j["measured_snr_db"].is_null()) {
    c.measured_snr_db = j["measured_snr_db"].get<double>();
  }
  return c;
}

}  // namespace

std::filesystem::path Manifest::AudioPath(const ManifestRecord& r) const {
  std::filesystem::path p(r.audio);
  if (p.is_absolute()) return p;
  return path.parent_path() / p;
}

Manifest ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  Manifest m;
  m.path = path;
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    ManifestRecord r;
    try {
      const json j = json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.audio = j.at("audio").get<std::string>();
      r.text = j.at("text").get<std::string>();
      r.sample_rate = j.value("sample_rate", 0);
      r.num_samples = j.value("num_samples", std::int64_t{0});
      if (j.contains("corruption")) r.corruption = CorruptionFromJson(j["corruption"]);
    } catch (const json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (r.id.empty() || r.audio.empty()) throw ValidationError(where + ": empty id or audio path");
    if (SplitWords(r.text).empty()) throw ValidationError(where + ": empty transcript");
    if (!ids.insert(r.id).second) throw ValidationError(where + ": duplicate id " + r.id);
    m.records.push_back(std::move(r));
  }
  if (m.records.empty()) throw ValidationError("manifest " + path.string() + " has no records");
  return m;
}

void WriteManifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  for (const auto& r : records) {
    json j;
    j["id"] = r.id;
    j["audio"] = r.audio;
    j["text"] = r.text;
    j["sample_rate"] = r.sample_rate;
    j["num_samples"] = r.num_samples;
    if (r.corruption) j["corruption"] = CorruptionToJson(*r.corruption);
    out << j.dump() << '\n';
  }
  if (!out) throw RuntimeFailure("failed writing " + path.string());
}

Utterance LoadUtterance(const Manifest& manifest, const ManifestRecord& record) {
  WaveData w = ReadWave(manifest.AudioPath(record));
  if (record.sample_rate != 0 && record.sample_rate != w.sample_rate) {
    throw ValidationError(record.id + ": manifest says " + std::to_string(record.sample_rate) +
                          " Hz, file has " + std::to_string(w.sample_rate));
  }
  Utterance u;
  u.id = record.id;
  u.samples = std::move(w.samples);
  u.sample_rate = w.sample_rate;
  u.words = SplitWords(record.text);
  return u;
}

}  // namespace cea
