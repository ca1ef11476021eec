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

#include "cea/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "cea/audio_io.hpp"
#include "cea/errors.hpp"
#include "cea/manifest.hpp"
#include "cea/reports.hpp"

namespace cea {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string JoinWords(const std::vector<std::string>& words) {
  std::string s;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += words[i];
  }
  return s;
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << text;
  if (!out) throw RuntimeFailure("failed writing " + path.string());
}

void PrepareOut(const ExperimentConfig& config, const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw RuntimeFailure("cannot create " + out.string() + ": " + ec.message());
  WriteJson(out / "config.resolved.json", ConfigToJson(config));
}

fs::path RequirePath(const std::string& value, const char* what) {
  if (value.empty()) throw ValidationError(std::string("no ") + what + " given");
  if (!fs::exists(value)) throw ValidationError(std::string(what) + " not found: " + value);
  return fs::path(value);
}

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

struct Inputs {
  AcousticModel model;
  std::vector<Utterance> utterances;
  std::vector<std::string> groups;
};

Inputs LoadInputs(const ExperimentConfig& config) {
  const fs::path model_path = RequirePath(config.model_path, "model checkpoint");
  const fs::path manifest_path = RequirePath(config.manifest_path, "manifest");
  AcousticModel model = LoadModel(model_path);
  const AcousticModel expected(config.model, MakeToyVocabulary(config.toy));
  if (model.ArchitectureFingerprint() != expected.ArchitectureFingerprint()) {
    throw ValidationError("checkpoint " + model_path.string() +
                          " does not match the configured architecture/vocabulary");
  }
  const Manifest manifest = ReadManifest(manifest_path);
  Inputs in{std::move(model), {}, {}};
  for (const auto& r : manifest.records) {
    Utterance u = LoadUtterance(manifest, r);
    if (u.sample_rate != config.toy.sample_rate) {
      throw ValidationError(r.id + ": sample rate " + std::to_string(u.sample_rate) + " Hz, model expects " +
                            std::to_string(config.toy.sample_rate));
    }
    if (in.model.config().NumFrames(static_cast<std::int64_t>(u.samples.size())) < 1) {
      throw ValidationError(r.id + ": shorter than one receptive field");
    }
    in.utterances.push_back(std::move(u));
    in.groups.push_back(r.Group());
  }
  return in;
}

std::optional<SyntheticNoise> AsSynthetic(const std::string& name) {
  try {
    return ParseSyntheticNoise(name);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<std::string> CommandNames() {
  return {"train-toy", "corrupt", "adapt", "evaluate", "analyze-entropy"};
}

ExperimentConfig ResolveConfig(const CommandOptions& options) {
  ExperimentConfig c = options.config_path.empty() ? ExperimentConfig{} : LoadExperimentConfig(options.config_path);
  if (options.seed) c.seed = *options.seed;
  if (options.method) c.methods = {*options.method};
  if (options.workers) c.workers = *options.workers;
  if (options.model_path) c.model_path = *options.model_path;
  if (options.manifest_path) c.manifest_path = *options.manifest_path;
  if (options.records_path) c.records_path = *options.records_path;
  if (options.out_dir.empty()) throw ValidationError("--out is required");
  c.Validate();
  return c;
}

void TrainToyCommand(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  config.Validate();
  const TrainConfig tc = ResolvedTrainConfig(config);
  PrepareOut(config, out);

  TrainReport report;
  const AcousticModel model =
      TrainReferenceModel(config.toy, tc, &report, [&log](const std::string& line) { log << line << '\n'; });
  SaveModel(model, out / "model.ckpt");

  const auto test = GenerateToyCorpus(config.toy, config.test_size, SubSeed(config, "test"), "test-");
  std::vector<ManifestRecord> records;
  for (const auto& u : test) {
    const std::string rel = "audio/" + u.id + ".wav";
    WriteWave(out / "test" / rel, u.samples, u.sample_rate, config.audio_format);
    records.push_back({u.id, rel, JoinWords(u.words), u.sample_rate,
                       static_cast<std::int64_t>(u.samples.size()), std::nullopt});
  }
  WriteManifest(out / "test" / "manifest.jsonl", records);

  WriteJson(out / "train_report.json", {{"epochs_run", report.epochs_run},
                                        {"epoch_loss", report.epoch_loss},
                                        {"held_out_size", tc.held_out_size},
                                        {"held_out_wer", report.held_out_wer},
                                        {"target_wer", tc.target_wer},
                                        {"reached_target", report.reached_target},
                                        {"diagnostics", report.diagnostics}});
  log << report.diagnostics << '\n';
  if (!report.reached_target) throw RuntimeFailure("clean WER target not reached: " + report.diagnostics);
}

void CorruptCommand(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  config.Validate();
  if (config.corruptions.empty()) throw ValidationError("no corruptions configured");
  const Manifest input = ReadManifest(RequirePath(config.manifest_path, "manifest"));
  std::set<std::string> labels;
  std::map<std::string, WaveData> noise_files;
  for (const auto& c : config.corruptions) {
    if (!labels.insert(c.Label()).second) throw ValidationError("duplicate corruption " + c.Label());
    if (c.kind == CorruptionKind::kSnrMix && !AsSynthetic(c.noise_source) && !noise_files.count(c.noise_source)) {
      noise_files.emplace(c.noise_source, ReadWave(RequirePath(c.noise_source, "noise file")));
    }
  }
  PrepareOut(config, out);

  std::vector<ManifestRecord> records;
  int skipped = 0;
  for (size_t j = 0; j < config.corruptions.size(); ++j) {
    const CorruptionSpec& spec = config.corruptions[j];
    const std::string label = spec.Label();
    const std::uint64_t base = CorruptionSeed(config, j);
    for (size_t i = 0; i < input.records.size(); ++i) {
      const ManifestRecord& rec = input.records[i];
      WaveData clean;
      try {
        clean = ReadWave(input.AudioPath(rec));
      } catch (const std::exception& e) {
        log << "warning: skipping " << rec.id << ": " << e.what() << '\n';
        ++skipped;
        continue;
      }
      const std::uint64_t seed = DeriveSeed(base, 0, i);
      std::vector<double> mixed;
      if (spec.kind == CorruptionKind::kGaussian) {
        mixed = GaussianCorrupt(clean.samples, spec.gaussian_amplitude, seed);
      } else {
        std::vector<double> noise;
        if (auto synth = AsSynthetic(spec.noise_source)) {
          noise = GenerateSyntheticNoise(*synth, clean.samples.size(), clean.sample_rate, DeriveSeed(seed, 1, 0));
        } else {
          const WaveData& n = noise_files.at(spec.noise_source);
          if (n.sample_rate != clean.sample_rate) {
            log << "warning: skipping " << rec.id << ": noise is " << n.sample_rate << " Hz, audio is "
                << clean.sample_rate << " Hz\n";
            ++skipped;
            continue;
          }
          noise = n.samples;
        }
        mixed = SnrMix(clean.samples, noise, spec.snr_db, seed).mixed;
      }
      const std::string rel = label + "/" + rec.id + ".wav";
      WriteWave(out / rel, mixed, clean.sample_rate, config.audio_format);

      // SNR of what was actually stored.
      const WaveData stored = ReadWave(out / rel);
      std::vector<double> added(stored.samples.size());
      bool any = false;
      for (size_t t = 0; t < added.size(); ++t) {
        added[t] = stored.samples[t] - clean.samples[t];
        any = any || added[t] != 0.0;
      }
      CorruptionMeta meta;
      meta.label = label;
      meta.spec = spec;
      meta.spec.seed = seed;
      meta.source_audio = input.AudioPath(rec).string();
      if (any) meta.measured_snr_db = MeasureSnrDb(clean.samples, added);
      records.push_back({rec.id + "@" + label, rel, rec.text, clean.sample_rate,
                         static_cast<std::int64_t>(mixed.size()), meta});
    }
    log << label << ": done\n";
  }
  if (records.empty()) throw RuntimeFailure("no input audio could be read");
  WriteManifest(out / "manifest.jsonl", records);
  log << records.size() << " records written, " << skipped << " skipped\n";
}

void AdaptCommand(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  config.Validate();
  Inputs in = LoadInputs(config);
  PrepareOut(config, out);

  std::string table = "method\tutterances\twer_before\twer_after\twerr\n";
  for (const auto& name : config.methods) {
    BaselineSpec spec = config.baselines;
    spec.method = ParseMethod(name);
    EpisodicSummary s = RunEpisodic(in.model, in.utterances, MakeAdapter(spec, config.adaptation), config.workers);
    s.method = name;
    std::vector<json> lines;
    lines.reserve(s.reports.size());
    for (size_t i = 0; i < s.reports.size(); ++i) lines.push_back(ReportToJson(s.reports[i], in.groups[i]));
    WriteJsonLines(out / name / "records.jsonl", lines);
    WriteJson(out / name / "summary.json", SummaryToJson(s, in.groups));
    const std::string werr = s.werr ? Fmt("%.4f", *s.werr) : "nan";
    table += name + "\t" + std::to_string(s.reports.size()) + "\t" + Fmt("%.4f", s.wer_before) + "\t" +
             Fmt("%.4f", s.wer_after) + "\t" + werr + "\n";
    log << name << ": WER " << Fmt("%.4f", s.wer_before) << " -> " << Fmt("%.4f", s.wer_after);
    if (s.failures) log << " (" << s.failures << " failed utterances)";
    log << '\n';
  }
  WriteText(out / "comparison.tsv", table);
}

void EvaluateCommand(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  config.Validate();
  Inputs in = LoadInputs(config);
  PrepareOut(config, out);

  EpisodicSummary s = RunEpisodic(in.model, in.utterances, MakeAdapter({Method::kSource}, config.adaptation),
                                  config.workers);
  std::vector<json> lines;
  for (size_t i = 0; i < s.reports.size(); ++i) lines.push_back(ReportToJson(s.reports[i], in.groups[i]));
  WriteJsonLines(out / "records.jsonl", lines);
  const json summary = SummaryToJson(s, in.groups);
  WriteJson(out / "summary.json", summary);
  std::string table = "group\tutterances\twer\n";
  for (const auto& g : summary["groups"]) {
    table += g["group"].get<std::string>() + "\t" + std::to_string(g["utterances"].get<int>()) + "\t" +
             Fmt("%.4f", g["wer_before"].get<double>()) + "\n";
  }
  WriteText(out / "severity.tsv", table);
  log << table;
}

void AnalyzeEntropyCommand(const ExperimentConfig& config, const fs::path& out, std::ostream& table,
                           std::ostream& log) {
  config.Validate();
  const auto records = ReadJsonLines(RequirePath(config.records_path, "records file"));
  const auto rows = EntropyTable(records, config.aggregation);
  PrepareOut(config, out);
  const std::string text = FormatEntropyTable(rows);
  WriteText(out / "entropy_table.tsv", text);
  table << text;
  log << rows.size() << " steps over " << records.size() << " utterances (" << ToString(config.aggregation)
      << ")\n";
}

int RunCommand(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& log) {
  try {
    const auto names = CommandNames();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ValidationError("unknown command '" + name + "'");
    }
    const ExperimentConfig config = ResolveConfig(options);
    if (name == "train-toy") {
      TrainToyCommand(config, options.out_dir, log);
    } else if (name == "corrupt") {
      CorruptCommand(config, options.out_dir, log);
    } else if (name == "adapt") {
      AdaptCommand(config, options.out_dir, log);
    } else if (name == "evaluate") {
      EvaluateCommand(config, options.out_dir, log);
    } else {
      AnalyzeEntropyCommand(config, options.out_dir, out, log);
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    log << "failure: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace cea
