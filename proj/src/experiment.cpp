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

#include "cea/experiment.hpp"

#include <fstream>
#include <set>

#include "cea/errors.hpp"

namespace cea {

using nlohmann::json;

namespace {

// Reads known keys from one JSON object and rejects the rest.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ValidationError(where_ + ": expected an object");
  }

  template <typename T>
  void Get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(where_ + "." + key + ": wrong type");
    }
  }

  const json* Sub(const char* key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ValidationError(where_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

void ReadToy(const json& j, ToyTaskSpec& t) {
  Fields f(j, "toy");
  f.Get("num_tokens", t.num_tokens);
  f.Get("sample_rate", t.sample_rate);
  f.Get("template_length", t.template_length);
  f.Get("base_frequency", t.base_frequency);
  f.Get("frequency_step", t.frequency_step);
  f.Get("amplitude_min", t.amplitude_min);
  f.Get("amplitude_max", t.amplitude_max);
  f.Get("short_gap_min", t.short_gap_min);
  f.Get("short_gap_max", t.short_gap_max);
  f.Get("long_gap_min", t.long_gap_min);
  f.Get("long_gap_max", t.long_gap_max);
  f.Get("edge_silence_min", t.edge_silence_min);
  f.Get("edge_silence_max", t.edge_silence_max);
  f.Get("words_min", t.words_min);
  f.Get("words_max", t.words_max);
  f.Get("letters_min", t.letters_min);
  f.Get("letters_max", t.letters_max);
  f.Finish();
}

json WriteToy(const ToyTaskSpec& t) {
  return {{"num_tokens", t.num_tokens},         {"sample_rate", t.sample_rate},
          {"template_length", t.template_length}, {"base_frequency", t.base_frequency},
          {"frequency_step", t.frequency_step}, {"amplitude_min", t.amplitude_min},
          {"amplitude_max", t.amplitude_max},   {"short_gap_min", t.short_gap_min},
          {"short_gap_max", t.short_gap_max},   {"long_gap_min", t.long_gap_min},
          {"long_gap_max", t.long_gap_max},     {"edge_silence_min", t.edge_silence_min},
          {"edge_silence_max", t.edge_silence_max}, {"words_min", t.words_min},
          {"words_max", t.words_max},           {"letters_min", t.letters_min},
          {"letters_max", t.letters_max}};
}

void ReadModel(const json& j, ModelConfig& m) {
  Fields f(j, "model");
  if (const json* conv = f.Sub("conv")) {
    if (!conv->is_array()) throw ValidationError("model.conv: expected a list of [kernel, stride, channels]");
    m.conv.clear();
    for (const auto& layer : *conv) {
      if (!layer.is_array() || layer.size() != 3) {
        throw ValidationError("model.conv: each layer is [kernel, stride, channels]");
      }
      try {
        m.conv.push_back({layer[0].get<int>(), layer[1].get<int>(), layer[2].get<int>()});
      } catch (const json::exception&) {
        throw ValidationError("model.conv: integers expected");
      }
    }
  }
  f.Get("ffn_dim", m.ffn_dim);
  f.Get("num_blocks", m.num_blocks);
  f.Get("ln_eps", m.ln_eps);
  f.Finish();
}

json WriteModel(const ModelConfig& m) {
  json conv = json::array();
  for (const auto& l : m.conv) conv.push_back({l.kernel, l.stride, l.channels});
  return {{"conv", conv}, {"ffn_dim", m.ffn_dim}, {"num_blocks", m.num_blocks}, {"ln_eps", m.ln_eps}};
}

void ReadTrain(const json& j, TrainConfig& t) {
  Fields f(j, "train");
  f.Get("train_size", t.train_size);
  f.Get("held_out_size", t.held_out_size);
  f.Get("epochs", t.epochs);
  f.Get("batch_size", t.batch_size);
  f.Get("learning_rate", t.learning_rate);
  f.Get("target_wer", t.target_wer);
  f.Get("label_smoothing", t.label_smoothing);
  f.Finish();
}

json WriteTrain(const TrainConfig& t) {
  return {{"train_size", t.train_size},       {"held_out_size", t.held_out_size},
          {"epochs", t.epochs},               {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate}, {"target_wer", t.target_wer},
          {"label_smoothing", t.label_smoothing}};
}

CorruptionSpec ReadCorruption(const json& j, size_t index) {
  const std::string where = "corruptions[" + std::to_string(index) + "]";
  Fields f(j, where);
  std::string kind = "gaussian";
  f.Get("kind", kind);
  CorruptionSpec c;
  if (kind == "gaussian") {
    c.kind = CorruptionKind::kGaussian;
    f.Get("delta", c.gaussian_amplitude);
  } else if (kind == "snr") {
    c.kind = CorruptionKind::kSnrMix;
    f.Get("snr_db", c.snr_db);
    f.Get("noise", c.noise_source);
  } else {
    throw ValidationError(where + ".kind: expected 'gaussian' or 'snr'");
  }
  f.Get("seed", c.seed);
  f.Finish();
  return c;
}

json WriteCorruption(const CorruptionSpec& c) {
  json j;
  if (c.kind == CorruptionKind::kGaussian) {
    j = {{"kind", "gaussian"}, {"delta", c.gaussian_amplitude}};
  } else {
    j = {{"kind", "snr"}, {"snr_db", c.snr_db}, {"noise", c.noise_source}};
  }
  j["seed"] = c.seed;
  return j;
}

void ReadAdaptation(const json& j, AdaptationConfig& a) {
  Fields f(j, "adaptation");
  f.Get("steps_stage1", a.steps_stage1);
  f.Get("steps_stage2", a.steps_stage2);
  f.Get("lr_ln", a.lr_ln);
  f.Get("lr_fe", a.lr_fe);
  f.Get("alpha", a.alpha);
  f.Get("window_k", a.window_k);
  std::string s;
  if (f.Sub("frame_strategy")) {
    f.Get("frame_strategy", s);
    a.frame_strategy = ParseFrameStrategy(s);
  }
  if (f.Sub("scheme_stage1")) {
    f.Get("scheme_stage1", s);
    a.scheme_stage1 = ParseParameterScheme(s);
  }
  if (f.Sub("scheme_stage2")) {
    f.Get("scheme_stage2", s);
    a.scheme_stage2 = ParseParameterScheme(s);
  }
  if (const json* opt = f.Sub("optimizer")) {
    Fields o(*opt, "adaptation.optimizer");
    o.Get("beta1", a.optimizer.beta1);
    o.Get("beta2", a.optimizer.beta2);
    o.Get("eps", a.optimizer.eps);
    o.Get("weight_decay", a.optimizer.weight_decay);
    o.Finish();
  }
  f.Finish();
}

json WriteAdaptation(const AdaptationConfig& a) {
  return {{"steps_stage1", a.steps_stage1},
          {"steps_stage2", a.steps_stage2},
          {"lr_ln", a.lr_ln},
          {"lr_fe", a.lr_fe},
          {"alpha", a.alpha},
          {"window_k", a.window_k},
          {"frame_strategy", ToString(a.frame_strategy)},
          {"scheme_stage1", ToString(a.scheme_stage1)},
          {"scheme_stage2", ToString(a.scheme_stage2)},
          {"optimizer",
           {{"beta1", a.optimizer.beta1},
            {"beta2", a.optimizer.beta2},
            {"eps", a.optimizer.eps},
            {"weight_decay", a.optimizer.weight_decay}}}};
}

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string ToString(SampleFormat f) { return f == SampleFormat::kPcm16 ? "pcm16" : "float32"; }

SampleFormat ParseSampleFormat(const std::string& name) {
  if (name == "pcm16") return SampleFormat::kPcm16;
  if (name == "float32") return SampleFormat::kFloat32;
  throw ValidationError("unknown audio format '" + name + "' (pcm16 or float32)");
}

std::string ToString(BucketAggregation a) {
  return a == BucketAggregation::kPooled ? "pooled" : "per_utterance_mean";
}

BucketAggregation ParseBucketAggregation(const std::string& name) {
  if (name == "pooled") return BucketAggregation::kPooled;
  if (name == "per_utterance_mean") return BucketAggregation::kPerUtteranceMean;
  throw ValidationError("unknown aggregation '" + name + "' (pooled or per_utterance_mean)");
}

void ExperimentConfig::Validate() const {
  toy.Validate();
  model.Validate();
  if (train.train_size < 1 || train.held_out_size < 1 || train.epochs < 0 || train.batch_size < 1 ||
      !(train.learning_rate > 0.0) || !(train.label_smoothing >= 0.0)) {
    throw ValidationError("bad train section");
  }
  if (test_size < 1) throw ValidationError("test_size must be >= 1");
  for (const auto& c : corruptions) c.Validate();
  adaptation.Validate();
  if (!(baselines.threshold_factor >= 0.0) || !(baselines.coherence_weight >= 0.0)) {
    throw ValidationError("baseline knobs must be >= 0");
  }
  if (methods.empty()) throw ValidationError("methods must not be empty");
  for (const auto& m : methods) ParseMethod(m);
  if (workers < 1) throw ValidationError("workers must be >= 1");
}

ExperimentConfig ConfigFromJson(const json& j) {
  ExperimentConfig c;
  Fields f(j, "config");
  f.Get("seed", c.seed);
  if (const json* s = f.Sub("toy")) ReadToy(*s, c.toy);
  if (const json* s = f.Sub("model")) ReadModel(*s, c.model);
  if (const json* s = f.Sub("train")) ReadTrain(*s, c.train);
  f.Get("test_size", c.test_size);
  if (const json* s = f.Sub("corruptions")) {
    if (!s->is_array()) throw ValidationError("config.corruptions: expected a list");
    c.corruptions.clear();
    for (size_t i = 0; i < s->size(); ++i) c.corruptions.push_back(ReadCorruption((*s)[i], i));
  }
  if (const json* s = f.Sub("adaptation")) ReadAdaptation(*s, c.adaptation);
  if (const json* s = f.Sub("baselines")) {
    Fields b(*s, "baselines");
    b.Get("threshold_factor", c.baselines.threshold_factor);
    b.Get("coherence_weight", c.baselines.coherence_weight);
    b.Finish();
  }
  f.Get("methods", c.methods);
  f.Get("workers", c.workers);
  std::string s;
  if (f.Sub("audio_format")) {
    f.Get("audio_format", s);
    c.audio_format = ParseSampleFormat(s);
  }
  if (f.Sub("aggregation")) {
    f.Get("aggregation", s);
    c.aggregation = ParseBucketAggregation(s);
  }
  f.Get("model_path", c.model_path);
  f.Get("manifest", c.manifest_path);
  f.Get("records", c.records_path);
  f.Finish();
  return c;
}

json ConfigToJson(const ExperimentConfig& c) {
  json corr = json::array();
  for (const auto& x : c.corruptions) corr.push_back(WriteCorruption(x));
  return {{"seed", c.seed},
          {"toy", WriteToy(c.toy)},
          {"model", WriteModel(c.model)},
          {"train", WriteTrain(c.train)},
          {"test_size", c.test_size},
          {"corruptions", corr},
          {"adaptation", WriteAdaptation(c.adaptation)},
          {"baselines",
           {{"threshold_factor", c.baselines.threshold_factor},
            {"coherence_weight", c.baselines.coherence_weight}}},
          {"methods", c.methods},
          {"workers", c.workers},
          {"audio_format", ToString(c.audio_format)},
          {"aggregation", ToString(c.aggregation)},
          {"model_path", c.model_path},
          {"manifest", c.manifest_path},
          {"records", c.records_path}};
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return ConfigFromJson(j);
}

std::uint64_t SubSeed(const ExperimentConfig& c, std::string_view stream, std::uint64_t index) {
  return DeriveSeed(c.seed, Fnv1a(stream), index);
}

std::uint64_t CorruptionSeed(const ExperimentConfig& c, size_t index) {
  const std::uint64_t s = c.corruptions.at(index).seed;
  return s != 0 ? s : SubSeed(c, "corruption", index);
}

TrainConfig ResolvedTrainConfig(const ExperimentConfig& c) {
  TrainConfig t = c.train;
  t.seed = SubSeed(c, "train");
  t.model = c.model;
  return t;
}

}  // namespace cea
