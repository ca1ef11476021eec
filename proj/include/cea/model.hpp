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

// Reference CTC acoustic model, split as logits = encoder(extractor(wave)).
//
// extractor: strided 1-D convolutions (GELU) followed by one layer norm;
//            output z is T x d.
// encoder:   pre-LN transformer blocks (single-head self-attention and a
//            GELU feed-forward), a final layer norm and a linear head to C
//            logits.
//
// Parameter values live in the model as plain matrices. Each forward pass
// wraps them in fresh autograd leaves, so a model is an ordinary value type:
// copying it clones every parameter.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cea/autograd.hpp"
#include "cea/decode.hpp"

namespace cea {

enum class ParameterGroupTag { kFeatureExtractor, kLnAffine, kBias, kOther };

std::string ToString(ParameterGroupTag tag);

// bias_only: {bias}; lns: {ln_affine}; fe_plus_lns: {feature_extractor} u
// {ln_affine}; full: everything.
enum class ParameterScheme { kBiasOnly, kLns, kFePlusLns, kFull };

std::string ToString(ParameterScheme s);
ParameterScheme ParseParameterScheme(const std::string& name);

struct ConvLayerSpec {
  int kernel = 0;
  int stride = 0;
  int channels = 0;
};

struct ModelConfig {
  std::vector<ConvLayerSpec> conv = {{40, 20, 32}, {6, 4, 64}, {3, 2, 64}};
  int ffn_dim = 128;
  int num_blocks = 2;
  double ln_eps = 1e-5;
  std::uint64_t init_seed = 1;

  int model_dim() const { return conv.empty() ? 0 : conv.back().channels; }
  // Samples covered by one output frame.
  int receptive_field() const;
  // Samples between consecutive output frames.
  int total_stride() const;
  // Output frames for a waveform of `samples` samples (0 when too short).
  int NumFrames(std::int64_t samples) const;
  void Validate() const;
};

struct Parameter {
  std::string name;
  ag::Matrix value;
  std::set<ParameterGroupTag> tags;

  bool Has(ParameterGroupTag t) const { return tags.count(t) != 0; }
};

// Sorted indices into AcousticModel::parameters().
using ParameterSelection = std::vector<size_t>;

struct ForwardPass {
  ag::Var features;  // extractor output z, T x d
  ag::Var logits;    // T x C
  std::vector<ag::Var> leaves;  // one per parameter, same order
};

class AcousticModel {
 public:
  AcousticModel(ModelConfig config, Vocabulary vocab);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  int num_classes() const { return vocab_.size(); }
  int blank_index() const { return vocab_.blank_index; }

  const std::vector<Parameter>& parameters() const { return params_; }
  std::vector<Parameter>& mutable_parameters() { return params_; }
  std::int64_t NumScalars(const ParameterSelection& sel) const;
  size_t num_ln_layers() const { return ln_layers_; }

  // Full forward. Leaves flagged in `trainable` (by parameter index) carry
  // gradients; pass an empty span for an inference-only graph.
  ForwardPass Forward(std::span<const double> waveform,
                      const std::vector<bool>& trainable = {}) const;

  // The two halves, usable separately. Forward() is exactly
  // Encode(Extract(...)).
  ag::Var Extract(std::span<const double> waveform, std::vector<ag::Var>& leaves) const;
  ag::Var Encode(const ag::Var& features, std::vector<ag::Var>& leaves) const;
  std::vector<ag::Var> MakeLeaves(const std::vector<bool>& trainable) const;

  // No-grad convenience.
  ag::Matrix Logits(std::span<const double> waveform) const;

  // Identifies the architecture: parameter names and shapes plus vocabulary.
  std::string ArchitectureFingerprint() const;

 private:
  void Register(std::string name, ag::Matrix value, std::set<ParameterGroupTag> tags);
  ag::Var LayerNorm(const ag::Var& x, size_t gamma, const std::vector<ag::Var>& leaves) const;

  ModelConfig config_;
  Vocabulary vocab_;
  std::vector<Parameter> params_;
  size_t ln_layers_ = 0;
  // Parameter index layout, filled by the constructor.
  struct ConvIdx {
    size_t weight, bias;
  };
  struct BlockIdx {
    size_t ln1, wq, bq, wk, bk, wv, bv, wo, bo, ln2, w1, b1, w2, b2;
  };
  std::vector<ConvIdx> conv_idx_;
  size_t extractor_ln_ = 0;
  std::vector<BlockIdx> block_idx_;
  size_t final_ln_ = 0, head_w_ = 0, head_b_ = 0;
};

ParameterSelection SelectParameters(const AcousticModel& model, ParameterScheme scheme);
std::vector<bool> SelectionMask(const AcousticModel& model, const ParameterSelection& sel);
std::vector<ag::Matrix> Gradients(const ForwardPass& pass, const ParameterSelection& sel);

// Adaptive-moment optimizer with decoupled weight decay.
struct AdamWSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamWState {
  std::int64_t step = 0;
  std::vector<ag::Matrix> m, v;
};

class AdamW {
 public:
  // One learning rate per selected parameter.
  AdamW(ParameterSelection selection, std::vector<double> learning_rates,
        AdamWSettings settings);

  void Step(AcousticModel& model, const std::vector<ag::Matrix>& grads);

  const ParameterSelection& selection() const { return selection_; }
  const AdamWState& state() const { return state_; }
  void set_state(AdamWState s) { state_ = std::move(s); }

 private:
  ParameterSelection selection_;
  std::vector<double> lrs_;
  AdamWSettings settings_;
  AdamWState state_;
};

struct Checkpoint {
  std::string fingerprint;
  std::vector<std::string> names;
  std::vector<ag::Matrix> values;
  std::optional<AdamWState> optimizer;
};

Checkpoint Snapshot(const AcousticModel& model, const AdamW* optimizer = nullptr);
// Throws ValidationError if the checkpoint belongs to another architecture.
void Restore(AcousticModel& model, const Checkpoint& ckpt, AdamW* optimizer = nullptr);

// Single-file container: magic, format version, JSON header (model config +
// vocabulary + tensor table), then raw little-endian float64 tensor data.
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;
void SaveModel(const AcousticModel& model, const std::filesystem::path& path);
AcousticModel LoadModel(const std::filesystem::path& path);

}  // namespace cea
