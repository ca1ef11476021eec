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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "cea/audio_io.hpp"
#include "cea/commands.hpp"
#include "cea/manifest.hpp"
#include "cea/reports.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kTie = 0.005;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string ReadText(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string Fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

std::string Sci(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << v;
  return s.str();
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs a gtest filter of the unit-test binary; returns the exit status and
// writes the JSON report to `report`.
int RunGtest(const fs::path& binary, const std::string& filter, const fs::path& report, const fs::path& log) {
  const std::string cmd = "\"" + binary.string() + "\" --gtest_filter='" + filter + "' --gtest_output=json:\"" +
                          report.string() + "\" > \"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str());
}

int CountTests(const json& report) {
  return report.value("tests", 0) - report.value("disabled", 0);
}

Outcome Criterion1(const fs::path& unit, const fs::path& work) {
  const std::string filter =
      "Autograd.*:FrameEntropy.*:FramePosterior.*:ConfidenceWeights.*:PseudoLabels.*:EntropyBuckets.*:"
      "AnalyzeFrames.*:CeaLoss.*:StcrLoss.*:SelfAttentionSmooth.*:Losses.*:GreedyDecode.*:Wer.*:Werr.*:"
      "Vocabulary.*:Ctc.*:GaussianCorrupt.*:SnrMix.*";
  const auto start = Clock::now();
  const int rc = RunGtest(unit, filter, work / "math.json", work / "math.log");
  const double secs = Seconds(start);
  int count = 0;
  if (fs::exists(work / "math.json")) count = CountTests(json::parse(ReadText(work / "math.json")));
  return {rc == 0 && count > 0 && secs < 60.0,
          std::to_string(count) + " tests, " + (rc == 0 ? "all passed" : "failures") + ", " + Fmt(secs, 1) + " s"};
}

Outcome Criterion2(const fs::path& unit, const fs::path& work) {
  const auto start = Clock::now();
  const int rc = RunGtest(unit, "GradientCheck.*", work / "grad.json", work / "grad.log");
  const double secs = Seconds(start);
  double worst = 0.0;
  int cases = 0, checks = 0;
  if (fs::exists(work / "grad.json")) {
    const json report = json::parse(ReadText(work / "grad.json"));
    for (const auto& suite : report["testsuites"]) {
      for (const auto& t : suite["testsuite"]) {
        ++cases;
        if (t.contains("checks")) checks += std::stoi(t["checks"].get<std::string>());
        if (t.contains("worst_relative_error")) worst = std::max(worst, std::stod(t["worst_relative_error"].get<std::string>()));
      }
    }
  }
  return {rc == 0 && cases == 2 && secs < 120.0,
          std::to_string(checks) + " cea and stcr checks " + std::string(rc == 0 ? "passed" : "failed") + ", worst relative error " +
              Sci(worst) + ", " + Fmt(secs, 1) + " s"};
}

Outcome Criterion3(const fs::path& unit, const fs::path& work) {
  const int rc = RunGtest(unit, "Ctc.MatchesBruteForceEnumeration:Ctc.TwoFrameClosedForm", work / "ctc.json",
                          work / "ctc.log");
  return {rc == 0, std::string("brute-force alignment sums ") + (rc == 0 ? "matched within 1e-9" : "mismatched")};
}

bool BitIdentical(const cea::AcousticModel& a, const cea::AcousticModel& b) {
  for (size_t i = 0; i < a.parameters().size(); ++i) {
    const auto& x = a.parameters()[i].value;
    const auto& y = b.parameters()[i].value;
    if (x.size() != y.size() || std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) != 0) return false;
  }
  return true;
}

Outcome Criterion4(const cea::ExperimentConfig& config, const fs::path& model_path, const fs::path& manifest_path) {
  cea::AcousticModel model = cea::LoadModel(model_path);
  const cea::AcousticModel original = model;
  const cea::Manifest manifest = cea::ReadManifest(manifest_path);
  std::vector<cea::Utterance> utterances;
  for (size_t i = 0; i < manifest.records.size() && utterances.size() < 20; ++i) {
    utterances.push_back(cea::LoadUtterance(manifest, manifest.records[i]));
  }
  int runs = 0, dirty = 0;
  for (cea::Method m : cea::AllMethods()) {
    cea::BaselineSpec spec = config.baselines;
    spec.method = m;
    for (int workers : {1, 2}) {
      cea::RunEpisodic(model, utterances, cea::MakeAdapter(spec, config.adaptation), workers);
      ++runs;
      if (!BitIdentical(model, original)) ++dirty;
    }
  }
  return {utterances.size() == 20 && dirty == 0,
          std::to_string(utterances.size()) + " utterances, " + std::to_string(runs) + " episodic runs, " +
              std::to_string(dirty) + " left the model changed"};
}

struct PipelinePaths {
  fs::path train, corrupt, adapt, entropy;
};

// train-toy, corrupt, adapt, analyze-entropy. Returns an error string or "".
std::string RunPipeline(const fs::path& config, const fs::path& dir, PipelinePaths& p) {
  p = {dir / "train", dir / "corrupt", dir / "adapt", dir / "entropy"};
  fs::create_directories(dir);
  std::ofstream log(dir / "pipeline.log");
  std::ostringstream table;
  auto step = [&](const std::string& cmd, cea::CommandOptions o, const fs::path& out) {
    o.config_path = config.string();
    o.out_dir = out;
    log << "== " << cmd << '\n';
    const int rc = cea::RunCommand(cmd, o, table, log);
    return rc == cea::kExitOk ? std::string() : cmd + " exited " + std::to_string(rc);
  };
  if (auto e = step("train-toy", {}, p.train); !e.empty()) return e;
  cea::CommandOptions c;
  c.manifest_path = (p.train / "test" / "manifest.jsonl").string();
  if (auto e = step("corrupt", c, p.corrupt); !e.empty()) return e;
  cea::CommandOptions a;
  a.model_path = (p.train / "model.ckpt").string();
  a.manifest_path = (p.corrupt / "manifest.jsonl").string();
  if (auto e = step("adapt", a, p.adapt); !e.empty()) return e;
  cea::CommandOptions h;
  h.records_path = (p.adapt / "ours" / "records.jsonl").string();
  return step("analyze-entropy", h, p.entropy);
}

std::map<std::string, json> LoadSummaries(const fs::path& adapt, const std::vector<std::string>& methods) {
  std::map<std::string, json> out;
  for (const auto& m : methods) {
    const fs::path p = adapt / m / "summary.json";
    if (fs::exists(p)) out[m] = json::parse(ReadText(p));
  }
  return out;
}

double WerAfter(const std::map<std::string, json>& s, const std::string& m) {
  return s.at(m)["wer_after"].get<double>();
}

Outcome Criterion5(const fs::path& entropy_table, const json& source) {
  std::ifstream in(entropy_table);
  std::string line;
  std::getline(in, line);
  std::map<int, double> nonsil_high;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    int step = 0, stage = 0, n = 0;
    double nh = 0.0;
    row >> step >> stage >> n >> nh;
    nonsil_high[step] = nh;
  }
  const double wer = source["wer_before"].get<double>();
  const int n = source["utterances"].get<int>();
  if (!nonsil_high.count(0) || !nonsil_high.count(9)) return {false, "entropy table lacks step 0 or 9"};
  const double margin = nonsil_high[0] - nonsil_high[9];
  return {n == 100 && wer >= 0.25 && wer <= 0.45 && margin >= 0.05,
          std::to_string(n) + " utterances at source WER " + Fmt(wer) + ", nonsil_high " + Fmt(nonsil_high[0]) +
              " -> " + Fmt(nonsil_high[9]) + " (margin " + Fmt(margin) + ")"};
}

Outcome Criterion6(const std::map<std::string, json>& s) {
  const json& ours = s.at("ours");
  const double before = ours["wer_before"].get<double>(), after = ours["wer_after"].get<double>();
  const double werr = ours["werr"].is_null() ? 0.0 : ours["werr"].get<double>();
  return {after < before && werr >= 0.10, "WER " + Fmt(before) + " -> " + Fmt(after) + ", WERR " + Fmt(werr)};
}

Outcome Criterion7(const std::map<std::string, json>& s) {
  const double ours = WerAfter(s, "ours"), wo_stcr = WerAfter(s, "ours_wo_stcr"), wo_cea = WerAfter(s, "ours_wo_cea");
  return {ours <= wo_stcr + kTie && wo_stcr <= wo_cea + kTie,
          "ours " + Fmt(ours) + ", wo_stcr " + Fmt(wo_stcr) + ", wo_cea " + Fmt(wo_cea)};
}

Outcome Criterion8(const std::map<std::string, json>& s) {
  const double ours = WerAfter(s, "ours"), suta = WerAfter(s, "suta_like"), tent = WerAfter(s, "tent"),
               sar = WerAfter(s, "sar_filter"), source = WerAfter(s, "source");
  const double tent_gain = source - tent, sar_gain = source - sar;
  const bool order = ours <= suta + kTie && suta <= tent + kTie && tent <= source + kTie;
  return {order && sar_gain <= tent_gain,
          "ours " + Fmt(ours) + ", suta_like " + Fmt(suta) + ", tent " + Fmt(tent) + ", source " + Fmt(source) +
              "; improvement sar_filter " + Fmt(sar_gain) + " vs tent " + Fmt(tent_gain)};
}

Outcome Criterion9(const cea::ExperimentConfig& base, const fs::path& sweep_config, const fs::path& model,
                   const fs::path& clean_manifest, const fs::path& dir) {
  std::ofstream log(dir / "sweep.log");
  std::ostringstream sink;
  cea::CommandOptions o;
  o.config_path = sweep_config.string();
  o.seed = base.seed;
  o.manifest_path = clean_manifest.string();
  o.out_dir = dir / "corrupt";
  if (int rc = cea::RunCommand("corrupt", o, sink, log); rc != cea::kExitOk) return {false, "corrupt exited " + std::to_string(rc)};
  o.model_path = model.string();
  o.manifest_path = (dir / "corrupt" / "manifest.jsonl").string();
  o.out_dir = dir / "evaluate";
  if (int rc = cea::RunCommand("evaluate", o, sink, log); rc != cea::kExitOk) return {false, "evaluate exited " + std::to_string(rc)};

  const cea::Manifest m = cea::ReadManifest(dir / "corrupt" / "manifest.jsonl");
  double worst_snr = 0.0;
  int mixed = 0, identity = 0, not_identity = 0;
  for (const auto& r : m.records) {
    const auto& c = *r.corruption;
    if (c.spec.kind == cea::CorruptionKind::kSnrMix) {
      ++mixed;
      const double err = c.measured_snr_db ? std::abs(*c.measured_snr_db - c.spec.snr_db) : 1e9;
      worst_snr = std::max(worst_snr, err);
    } else if (c.spec.gaussian_amplitude == 0.0) {
      const auto a = cea::ReadWave(m.AudioPath(r)).samples, b = cea::ReadWave(c.source_audio).samples;
      (a == b ? identity : not_identity)++;
    }
  }
  const json summary = json::parse(ReadText(dir / "evaluate" / "summary.json"));
  std::map<std::string, double> group_wer;
  for (const auto& g : summary["groups"]) group_wer[g["group"].get<std::string>()] = g["wer_before"].get<double>();
  const cea::ExperimentConfig sweep = cea::ResolveConfig(o);
  std::vector<std::pair<double, double>> levels;
  for (const auto& c : sweep.corruptions) {
    if (c.kind == cea::CorruptionKind::kGaussian && c.gaussian_amplitude > 0.0) {
      levels.emplace_back(c.gaussian_amplitude, group_wer.at(c.Label()));
    }
  }
  std::sort(levels.begin(), levels.end());
  bool monotone = true;
  std::string curve;
  for (size_t i = 0; i < levels.size(); ++i) {
    if (i && levels[i].second < levels[i - 1].second) monotone = false;
    curve += (i ? " " : "") + Fmt(levels[i].second, 3);
  }
  const bool pass = mixed > 0 && worst_snr <= 0.01 && identity > 0 && not_identity == 0 && levels.size() >= 5 && monotone;
  return {pass, std::to_string(mixed) + " mixed files, worst SNR error " + Fmt(worst_snr, 6) + " dB; delta=0 identity " +
                    std::to_string(identity) + "/" + std::to_string(identity + not_identity) + "; source WER by delta " +
                    curve + (monotone ? " (monotone)" : " (not monotone)")};
}

Outcome Criterion10(const PipelinePaths& a, const PipelinePaths& b, const std::vector<std::string>& methods) {
  std::vector<fs::path> files = {"comparison.tsv"};
  for (const auto& m : methods) files.push_back(fs::path(m) / "summary.json");
  int differing = 0;
  for (const auto& f : files) {
    if (!fs::exists(a.adapt / f) || ReadText(a.adapt / f) != ReadText(b.adapt / f)) ++differing;
  }
  const bool entropy_same = ReadText(a.entropy / "entropy_table.tsv") == ReadText(b.entropy / "entropy_table.tsv");
  const bool train_same = ReadText(a.train / "train_report.json") == ReadText(b.train / "train_report.json");
  return {differing == 0 && entropy_same && train_same,
          std::to_string(files.size() - differing) + "/" + std::to_string(files.size()) +
              " summaries identical, entropy table " + (entropy_same ? "identical" : "differs") + ", train report " +
              (train_same ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  fs::path work, config, sweep, unit;
  app.add_option("--work-dir", work, "scratch directory")->required();
  app.add_option("--config", config, "pinned experiment config")->required()->check(CLI::ExistingFile);
  app.add_option("--sweep-config", sweep, "severity sweep config")->required()->check(CLI::ExistingFile);
  app.add_option("--unit-tests", unit, "unit test binary")->required()->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  fs::remove_all(work);
  fs::create_directories(work);
  std::map<int, Outcome> results;
  auto report = [&](int id, const Outcome& o) {
    results[id] = o;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << std::endl;
  };

  report(1, Criterion1(unit, work));
  report(2, Criterion2(unit, work));
  report(3, Criterion3(unit, work));

  cea::CommandOptions resolve;
  resolve.config_path = config.string();
  resolve.out_dir = work;
  const cea::ExperimentConfig cfg = cea::ResolveConfig(resolve);

  PipelinePaths first, second;
  const auto start = Clock::now();
  const std::string error = RunPipeline(config, work / "run1", first);
  const double pipeline_secs = Seconds(start);
  if (!error.empty()) {
    for (int id = 4; id <= 10; ++id) report(id, {false, "pipeline failed: " + error});
    return 1;
  }
  std::cerr << "pipeline finished in " << Fmt(pipeline_secs, 1) << " s\n";

  report(4, Criterion4(cfg, first.train / "model.ckpt", first.corrupt / "manifest.jsonl"));
  const auto summaries = LoadSummaries(first.adapt, cfg.methods);
  for (const char* needed : {"source", "ours", "ours_wo_stcr", "ours_wo_cea", "tent", "sar_filter", "suta_like"}) {
    if (!summaries.count(needed)) {
      std::cerr << "config lacks method " << needed << '\n';
      return 1;
    }
  }
  report(5, Criterion5(first.entropy / "entropy_table.tsv", summaries.at("source")));
  report(6, Criterion6(summaries));
  report(7, Criterion7(summaries));
  report(8, Criterion8(summaries));
  fs::create_directories(work / "sweep");
  report(9, Criterion9(cfg, sweep, first.train / "model.ckpt", first.train / "test" / "manifest.jsonl", work / "sweep"));

  const std::string error2 = RunPipeline(config, work / "run2", second);
  report(10, error2.empty() ? Criterion10(first, second, cfg.methods) : Outcome{false, "second run: " + error2});

  int failed = 0;
  for (const auto& [id, o] : results) failed += !o.pass;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}
