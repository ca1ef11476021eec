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

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <gtest/gtest.h>

#include "cea/audio_io.hpp"
#include "cea/commands.hpp"
#include "cea/errors.hpp"
#include "cea/manifest.hpp"
#include "cea/reports.hpp"

namespace cea {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ReadText(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void WriteText(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("cea_harness_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  // Four clean toy utterances and an untrained model of the default architecture.
  void MakeInputs() {
    const ToyTaskSpec spec;
    std::vector<ManifestRecord> records;
    for (const auto& u : GenerateToyCorpus(spec, 4, 3, "c-")) {
      const std::string rel = "audio/" + u.id + ".wav";
      WriteWave(root_ / "clean" / rel, u.samples, u.sample_rate, SampleFormat::kFloat32);
      std::string text;
      for (const auto& w : u.words) text += (text.empty() ? "" : " ") + w;
      records.push_back({u.id, rel, text, u.sample_rate, static_cast<std::int64_t>(u.samples.size()), {}});
    }
    WriteManifest(root_ / "clean" / "manifest.jsonl", records);
    SaveModel(AcousticModel(ModelConfig{}, MakeToyVocabulary(spec)), root_ / "model.ckpt");
  }

  int Run(const std::string& cmd, CommandOptions o, std::string* out_text = nullptr) {
    std::ostringstream out, log;
    const int code = RunCommand(cmd, o, out, log);
    if (out_text) *out_text = out.str();
    last_log_ = log.str();
    return code;
  }

  fs::path WriteConfig(const json& j) {
    const fs::path p = root_ / "config.json";
    WriteText(p, j.dump());
    return p;
  }

  fs::path root_;
  std::string last_log_;
};

TEST(ExperimentConfigTest, DefaultsAndRoundTrip) {
  const ExperimentConfig d = ConfigFromJson(json::object());
  EXPECT_NO_THROW(d.Validate());
  EXPECT_EQ(d.seed, 7u);
  EXPECT_EQ(d.test_size, 100);
  EXPECT_EQ(d.adaptation.total_steps(), 10);

  json j = ConfigToJson(d);
  j["seed"] = 99;
  j["methods"] = {"ours", "tent"};
  j["corruptions"] = json::array({{{"kind", "snr"}, {"snr_db", -5}, {"noise", "hum"}}});
  j["adaptation"]["frame_strategy"] = "all";
  j["aggregation"] = "per_utterance_mean";
  const ExperimentConfig c = ConfigFromJson(j);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.corruptions[0].kind, CorruptionKind::kSnrMix);
  EXPECT_EQ(c.adaptation.frame_strategy, FrameStrategy::kAll);
  EXPECT_EQ(ConfigToJson(ConfigFromJson(ConfigToJson(c))).dump(), ConfigToJson(c).dump());
}

TEST(ExperimentConfigTest, RejectsBadInput) {
  EXPECT_THROW(ConfigFromJson({{"sead", 1}}), ValidationError);
  EXPECT_THROW(ConfigFromJson({{"adaptation", {{"lr", 1}}}}), ValidationError);
  EXPECT_THROW(ConfigFromJson({{"seed", "seven"}}), ValidationError);
  EXPECT_THROW(ConfigFromJson({{"corruptions", {{{"kind", "reverb"}}}}}), ValidationError);
  EXPECT_THROW(ConfigFromJson({{"audio_format", "mp3"}}), ValidationError);
  EXPECT_THROW(ConfigFromJson(json::array()), ValidationError);
  ExperimentConfig c;
  c.workers = 0;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = ExperimentConfig{};
  c.methods = {"sar"};
  EXPECT_THROW(c.Validate(), ValidationError);
  c = ExperimentConfig{};
  c.methods.clear();
  EXPECT_THROW(c.Validate(), ValidationError);
}

TEST(ExperimentConfigTest, SeedsPropagateDeterministically) {
  ExperimentConfig a, b;
  EXPECT_EQ(SubSeed(a, "test"), SubSeed(b, "test"));
  EXPECT_NE(SubSeed(a, "test"), SubSeed(a, "train"));
  b.seed = 8;
  EXPECT_NE(SubSeed(a, "test"), SubSeed(b, "test"));
  EXPECT_EQ(ResolvedTrainConfig(a).seed, SubSeed(a, "train"));
  a.corruptions.push_back({CorruptionKind::kGaussian, 0.02, 0.0, "", 1234});
  EXPECT_EQ(CorruptionSeed(a, 1), 1234u);
  EXPECT_EQ(CorruptionSeed(a, 0), SubSeed(a, "corruption", 0));
}

TEST(ResolveConfigTest, FlagsOverrideFile) {
  CommandOptions o;
  o.out_dir = "x";
  o.seed = 11;
  o.method = "tent";
  o.workers = 3;
  const ExperimentConfig c = ResolveConfig(o);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.methods, (std::vector<std::string>{"tent"}));
  EXPECT_EQ(c.workers, 3);
  o.out_dir.clear();
  EXPECT_THROW(ResolveConfig(o), ValidationError);
}

TEST_F(HarnessTest, ManifestRoundTripAndValidation) {
  CorruptionMeta meta{"gaussian_0.01", {CorruptionKind::kGaussian, 0.01, 0.0, "", 42}, "/x/a.wav", 27.5};
  WriteManifest(root_ / "m.jsonl", {{"a", "a.wav", "ab c", 8000, 10, meta}, {"b", "/abs/b.wav", "d", 8000, 12, {}}});
  const Manifest m = ReadManifest(root_ / "m.jsonl");
  ASSERT_EQ(m.records.size(), 2u);
  EXPECT_EQ(m.records[0].Group(), "gaussian_0.01");
  EXPECT_EQ(m.records[1].Group(), "clean");
  EXPECT_EQ(m.records[0].corruption->spec.seed, 42u);
  EXPECT_EQ(*m.records[0].corruption->measured_snr_db, 27.5);
  EXPECT_EQ(m.AudioPath(m.records[0]), root_ / "a.wav");
  EXPECT_EQ(m.AudioPath(m.records[1]), fs::path("/abs/b.wav"));

  WriteText(root_ / "dup.jsonl", R"({"id":"a","audio":"a.wav","text":"x"})" "\n"
                                 R"({"id":"a","audio":"b.wav","text":"y"})" "\n");
  EXPECT_THROW(ReadManifest(root_ / "dup.jsonl"), ValidationError);
  WriteText(root_ / "empty_text.jsonl", R"({"id":"a","audio":"a.wav","text":"  "})" "\n");
  EXPECT_THROW(ReadManifest(root_ / "empty_text.jsonl"), ValidationError);
  WriteText(root_ / "broken.jsonl", "{not json\n");
  EXPECT_THROW(ReadManifest(root_ / "broken.jsonl"), ValidationError);
  WriteText(root_ / "none.jsonl", "\n");
  EXPECT_THROW(ReadManifest(root_ / "none.jsonl"), ValidationError);
}

TEST_F(HarnessTest, LoadUtteranceReadsAudioAndWords) {
  MakeInputs();
  const Manifest m = ReadManifest(root_ / "clean" / "manifest.jsonl");
  const Utterance u = LoadUtterance(m, m.records[0]);
  EXPECT_EQ(u.id, m.records[0].id);
  EXPECT_EQ(static_cast<std::int64_t>(u.samples.size()), m.records[0].num_samples);
  EXPECT_EQ(u.words, SplitWords(m.records[0].text));
}

TEST(Reports, EntropyTableAggregatesSteps) {
  AdaptationReport r;
  r.utterance_id = "u";
  r.method = "ours";
  r.reference = {"a"};
  for (int s = 0; s < 3; ++s) {
    StepRecord st;
    st.step = s;
    st.stage = 1;
    st.buckets = ComputeEntropyBuckets({2.0, 0.1, 0.1, 3.0 - s}, {false, false, true, true}, 1.5);
    r.steps.push_back(st);
  }
  const json line = ReportToJson(r, "clean");
  EXPECT_EQ(line["steps"].size(), 3u);
  const auto rows = EntropyTable({line}, BucketAggregation::kPooled);
  ASSERT_EQ(rows.size(), 3u);
  for (int s = 0; s < 3; ++s) {
    EXPECT_EQ(rows[s].step, s);
    EXPECT_DOUBLE_EQ(rows[s].buckets.frac_nonsil_high, r.steps[s].buckets.frac_nonsil_high);
    EXPECT_DOUBLE_EQ(rows[s].buckets.frac_sil_high, r.steps[s].buckets.frac_sil_high);
    const auto& b = rows[s].buckets;
    EXPECT_NEAR(b.frac_nonsil_high + b.frac_nonsil_low + b.frac_sil_high + b.frac_sil_low, 1.0, 1e-12);
  }
  const std::string table = FormatEntropyTable(rows);
  EXPECT_EQ(table.substr(0, table.find('\n')), "step\tstage\tutterances\tnonsil_high\tnonsil_low\tsil_high\tsil_low");
  EXPECT_THROW(EntropyTable({}, BucketAggregation::kPooled), ValidationError);
  EXPECT_THROW(EntropyTable({json{{"id", "x"}}}, BucketAggregation::kPooled), ValidationError);
}

TEST(Reports, SummaryGroupsAndSutaNote) {
  AdaptationReport a, b;
  a.errors_before = AlignWords({"x", "y"}, {"x", "z"});
  a.errors_after = AlignWords({"x", "y"}, {"x", "y"});
  b.errors_before = AlignWords({"x", "y"}, {"x", "y"});
  b.errors_after = AlignWords({"x", "y"}, {"x", "y"});
  const EpisodicSummary s = Summarize({a, b}, "suta_like");
  const json j = SummaryToJson(s, {"g1", "g2"});
  EXPECT_TRUE(j.contains("note"));
  EXPECT_DOUBLE_EQ(j["wer_before"].get<double>(), 0.25);
  EXPECT_DOUBLE_EQ(j["werr"].get<double>(), 1.0);
  ASSERT_EQ(j["groups"].size(), 2u);
  EXPECT_TRUE(j["groups"][1]["werr"].is_null());
  EXPECT_THROW(SummaryToJson(s, {"g1"}), std::invalid_argument);
}

TEST_F(HarnessTest, ValidationErrorsExitOneWithoutWriting) {
  CommandOptions o;
  o.out_dir = root_ / "out";
  o.config_path = WriteConfig({{"bogus", true}}).string();
  EXPECT_EQ(Run("adapt", o), kExitValidation);
  EXPECT_FALSE(fs::exists(o.out_dir));

  o.config_path.clear();
  o.model_path = (root_ / "missing.ckpt").string();
  o.manifest_path = (root_ / "missing.jsonl").string();
  EXPECT_EQ(Run("adapt", o), kExitValidation);
  EXPECT_EQ(Run("evaluate", o), kExitValidation);
  EXPECT_EQ(Run("corrupt", o), kExitValidation);
  EXPECT_FALSE(fs::exists(o.out_dir));

  o.method = "magic";
  EXPECT_EQ(Run("adapt", o), kExitValidation);
  EXPECT_EQ(Run("no-such-command", o), kExitValidation);
  o.method.reset();
  o.records_path = (root_ / "missing_records.jsonl").string();
  EXPECT_EQ(Run("analyze-entropy", o), kExitValidation);
  EXPECT_FALSE(fs::exists(o.out_dir));
}

TEST_F(HarnessTest, ArchitectureMismatchIsRejected) {
  MakeInputs();
  CommandOptions o;
  o.out_dir = root_ / "out";
  o.model_path = (root_ / "model.ckpt").string();
  o.manifest_path = (root_ / "clean" / "manifest.jsonl").string();
  o.config_path = WriteConfig({{"model", {{"ffn_dim", 64}}}}).string();
  EXPECT_EQ(Run("adapt", o), kExitValidation);
  EXPECT_NE(last_log_.find("architecture"), std::string::npos);
  EXPECT_FALSE(fs::exists(o.out_dir));
}

TEST_F(HarnessTest, UnreachedTrainingTargetExitsTwo) {
  CommandOptions o;
  o.out_dir = root_ / "train";
  o.config_path = WriteConfig({{"test_size", 2}, {"train", {{"epochs", 0}, {"train_size", 4}, {"held_out_size", 4}}}}).string();
  EXPECT_EQ(Run("train-toy", o), kExitRuntime);
  EXPECT_TRUE(fs::exists(o.out_dir / "train_report.json"));
  const json report = json::parse(ReadText(o.out_dir / "train_report.json"));
  EXPECT_FALSE(report["reached_target"].get<bool>());
}

TEST_F(HarnessTest, CorruptSweepIdentityAndSnr) {
  MakeInputs();
  CommandOptions o;
  o.out_dir = root_ / "noisy";
  o.manifest_path = (root_ / "clean" / "manifest.jsonl").string();
  json corr = json::array();
  for (double d : {0.0, 0.005, 0.01, 0.015, 0.02}) corr.push_back({{"kind", "gaussian"}, {"delta", d}});
  corr.push_back({{"kind", "snr"}, {"snr_db", 0}, {"noise", "white"}});
  o.config_path = WriteConfig({{"corruptions", corr}}).string();
  ASSERT_EQ(Run("corrupt", o), kExitOk) << last_log_;
  const Manifest m = ReadManifest(o.out_dir / "manifest.jsonl");
  ASSERT_EQ(m.records.size(), 6u * 4u);
  const Manifest clean = ReadManifest(root_ / "clean" / "manifest.jsonl");
  for (const auto& r : m.records) {
    const auto& c = *r.corruption;
    if (c.spec.kind == CorruptionKind::kGaussian && c.spec.gaussian_amplitude == 0.0) {
      EXPECT_EQ(ReadText(m.AudioPath(r)), ReadText(c.source_audio));
      EXPECT_FALSE(c.measured_snr_db.has_value());
    }
    if (c.spec.kind == CorruptionKind::kSnrMix) {
      ASSERT_TRUE(c.measured_snr_db.has_value());
      EXPECT_NEAR(*c.measured_snr_db, 0.0, 0.01);
    }
  }
  EXPECT_TRUE(fs::exists(o.out_dir / "config.resolved.json"));
}

TEST_F(HarnessTest, CorruptSkipsUnreadableAudio) {
  MakeInputs();
  fs::remove(root_ / "clean" / "audio" / "c-00001.wav");
  CommandOptions o;
  o.out_dir = root_ / "noisy";
  o.manifest_path = (root_ / "clean" / "manifest.jsonl").string();
  ASSERT_EQ(Run("corrupt", o), kExitOk);
  EXPECT_NE(last_log_.find("warning: skipping c-00001"), std::string::npos);
  EXPECT_EQ(ReadManifest(o.out_dir / "manifest.jsonl").records.size(), 3u);
}

TEST_F(HarnessTest, AdaptEvaluateAnalyzeAreDeterministic) {
  MakeInputs();
  CommandOptions o;
  o.model_path = (root_ / "model.ckpt").string();
  o.manifest_path = (root_ / "clean" / "manifest.jsonl").string();
  o.config_path = WriteConfig({{"methods", {"source", "ours"}},
                               {"adaptation", {{"steps_stage1", 2}, {"steps_stage2", 1}}}}).string();
  o.out_dir = root_ / "run1";
  ASSERT_EQ(Run("adapt", o), kExitOk) << last_log_;
  o.out_dir = root_ / "run2";
  o.workers = 2;
  ASSERT_EQ(Run("adapt", o), kExitOk) << last_log_;
  for (const char* m : {"source", "ours"}) {
    EXPECT_EQ(ReadText(root_ / "run1" / m / "summary.json"), ReadText(root_ / "run2" / m / "summary.json")) << m;
  }
  const json source = json::parse(ReadText(root_ / "run1" / "source" / "summary.json"));
  EXPECT_EQ(source["wer_before"], source["wer_after"]);
  const json ours = json::parse(ReadText(root_ / "run1" / "ours" / "summary.json"));
  EXPECT_EQ(ours["steps"].size(), 3u);
  EXPECT_EQ(ReadJsonLines(root_ / "run1" / "ours" / "records.jsonl").size(), 4u);
  EXPECT_TRUE(fs::exists(root_ / "run1" / "comparison.tsv"));

  o.out_dir = root_ / "eval";
  ASSERT_EQ(Run("evaluate", o), kExitOk) << last_log_;
  EXPECT_NE(ReadText(root_ / "eval" / "severity.tsv").find("clean\t4\t"), std::string::npos);

  CommandOptions a;
  a.out_dir = root_ / "fig";
  a.records_path = (root_ / "run1" / "ours" / "records.jsonl").string();
  std::string printed;
  ASSERT_EQ(Run("analyze-entropy", a, &printed), kExitOk) << last_log_;
  EXPECT_EQ(printed, ReadText(root_ / "fig" / "entropy_table.tsv"));
  int lines = 0;
  for (char ch : printed) lines += ch == '\n';
  EXPECT_EQ(lines, 1 + 3);
}

}  // namespace
}  // namespace cea
