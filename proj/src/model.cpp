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

#include "cea/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cea/errors.hpp"

namespace cea {

using ag::Matrix;
using ag::Var;
using Tag = ParameterGroupTag;

std::string ToString(ParameterGroupTag tag) {
  switch (tag) {
    case Tag::kFeatureExtractor: return "feature_extractor";
    case Tag::kLnAffine: return "ln_affine";
    case Tag::kBias: return "bias";
    case Tag::kOther: return "other";
  }
  return "?";
}

std::string ToString(ParameterScheme s) {
  switch (s) {
    case ParameterScheme::kBiasOnly: return "bias_only";
    case ParameterScheme::kLns: return "lns";
    case ParameterScheme::kFePlusLns: return "fe_plus_lns";
    case ParameterScheme::kFull: return "full";
  }
  return "?";
}

ParameterScheme ParseParameterScheme(const std::string& name) {
  if (name == "bias_only") return ParameterScheme::kBiasOnly;
  if (name == "lns") return ParameterScheme::kLns;
  if (name == "fe_plus_lns") return ParameterScheme::kFePlusLns;
  if (name == "full") return ParameterScheme::kFull;
  throw ValidationError("unknown parameter scheme '" + name + "'");
}

int ModelConfig::receptive_field() const {
  int field = 1;
  int jump = 1;
  for (const auto& c : conv) {
    field += (c.kernel - 1) * jump;
    jump *= c.stride;
  }
  return field;
}

int ModelConfig::total_stride() const {
  int s = 1;
  for (const auto& c : conv) s *= c.stride;
  return s;
}

int ModelConfig::NumFrames(std::int64_t samples) const {
  std::int64_t t = samples;
  for (const auto& c : conv) {
    if (t < c.kernel) return 0;
    t = (t - c.kernel) / c.stride + 1;
  }
  return static_cast<int>(t);
}

void ModelConfig::Validate() const {
  if (conv.empty()) throw ValidationError("model needs at least one conv layer");
  for (const auto& c : conv) {
    if (c.kernel < 1 || c.stride < 1 || c.channels < 1) {
      throw ValidationError("conv layers need positive kernel, stride and channels");
    }
  }
  if (ffn_dim < 1 || num_blocks < 0 || !(ln_eps > 0.0)) {
    throw ValidationError("bad encoder dimensions");
  }
}

AcousticModel::AcousticModel(ModelConfig config, Vocabulary vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.Validate();
  vocab_.Validate();
  std::mt19937_64 rng(config_.init_seed);
  auto dense = [&rng](int fan_in, int fan_out) {
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    Matrix w(fan_in, fan_out);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    return w;
  };
  const std::set<Tag> fe_w{Tag::kFeatureExtractor};
  const std::set<Tag> fe_b{Tag::kFeatureExtractor, Tag::kBias};
  const std::set<Tag> fe_ln_scale{Tag::kFeatureExtractor, Tag::kLnAffine};
  const std::set<Tag> fe_ln_shift{Tag::kFeatureExtractor, Tag::kLnAffine, Tag::kBias};
  const std::set<Tag> ln_scale{Tag::kLnAffine};
  const std::set<Tag> ln_shift{Tag::kLnAffine, Tag::kBias};
  const std::set<Tag> enc_w{Tag::kOther};
  const std::set<Tag> enc_b{Tag::kBias};

  int in_ch = 1;
  for (size_t i = 0; i < config_.conv.size(); ++i) {
    const auto& c = config_.conv[i];
    const std::string p = "extractor.conv" + std::to_string(i);
    ConvIdx idx;
    idx.weight = params_.size();
    Register(p + ".weight", dense(c.kernel * in_ch, c.channels), fe_w);
    idx.bias = params_.size();
    Register(p + ".bias", Matrix::Zero(1, c.channels), fe_b);
    conv_idx_.push_back(idx);
    in_ch = c.channels;
  }
  const int d = config_.model_dim();
  auto add_ln = [&](const std::string& prefix, const std::set<Tag>& scale_tags,
                    const std::set<Tag>& shift_tags) {
    const size_t at = params_.size();
    Register(prefix + ".scale", Matrix::Ones(1, d), scale_tags);
    Register(prefix + ".shift", Matrix::Zero(1, d), shift_tags);
    ++ln_layers_;
    return at;
  };
  extractor_ln_ = add_ln("extractor.norm", fe_ln_scale, fe_ln_shift);

  for (int b = 0; b < config_.num_blocks; ++b) {
    const std::string p = "encoder.block" + std::to_string(b);
    BlockIdx idx{};
    idx.ln1 = add_ln(p + ".attn_norm", ln_scale, ln_shift);
    auto lin = [&](const std::string& name, int fin, int fout, size_t& w, size_t& bias) {
      w = params_.size();
      Register(p + "." + name + ".weight", dense(fin, fout), enc_w);
      bias = params_.size();
      Register(p + "." + name + ".bias", Matrix::Zero(1, fout), enc_b);
    };
    lin("query", d, d, idx.wq, idx.bq);
    lin("key", d, d, idx.wk, idx.bk);
    lin("value", d, d, idx.wv, idx.bv);
    lin("attn_out", d, d, idx.wo, idx.bo);
    idx.ln2 = add_ln(p + ".ffn_norm", ln_scale, ln_shift);
    lin("ffn_in", d, config_.ffn_dim, idx.w1, idx.b1);
    lin("ffn_out", config_.ffn_dim, d, idx.w2, idx.b2);
    block_idx_.push_back(idx);
  }
  final_ln_ = add_ln("encoder.final_norm", ln_scale, ln_shift);
  head_w_ = params_.size();
  Register("head.weight", dense(d, vocab_.size()), enc_w);
  head_b_ = params_.size();
  Register("head.bias", Matrix::Zero(1, vocab_.size()), enc_b);
}

void AcousticModel::Register(std::string name, Matrix value, std::set<Tag> tags) {
  params_.push_back({std::move(name), std::move(value), std::move(tags)});
}

std::int64_t AcousticModel::NumScalars(const ParameterSelection& sel) const {
  std::int64_t n = 0;
  for (size_t i : sel) n += params_.at(i).value.size();
  return n;
}

std::vector<Var> AcousticModel::MakeLeaves(const std::vector<bool>& trainable) const {
  if (!trainable.empty() && trainable.size() != params_.size()) {
    throw ValidationError("trainable mask does not match parameter count");
  }
  std::vector<Var> leaves;
  leaves.reserve(params_.size());
  for (size_t i = 0; i < params_.size(); ++i) {
    leaves.emplace_back(params_[i].value, !trainable.empty() && trainable[i]);
  }
  return leaves;
}

Var AcousticModel::LayerNorm(const Var& x, size_t gamma, const std::vector<Var>& leaves) const {
  return ag::AddRow(ag::MulRow(ag::NormalizeRows(x, config_.ln_eps), leaves[gamma]),
                    leaves[gamma + 1]);
}

Var AcousticModel::Extract(std::span<const double> waveform, std::vector<Var>& leaves) const {
  if (waveform.empty()) throw ValidationError("empty waveform");
  for (double s : waveform) {
    if (!std::isfinite(s)) throw ValidationError("non-finite waveform sample");
  }
  const int rf = config_.receptive_field();
  if (static_cast<std::int64_t>(waveform.size()) < rf) {
    throw ValidationError("waveform of " + std::to_string(waveform.size()) +
                          " samples is shorter than the receptive field (" +
                          std::to_string(rf) + ")");
  }
  Var h(Eigen::Map<const Matrix>(waveform.data(), static_cast<Eigen::Index>(waveform.size()), 1));
  for (size_t i = 0; i < config_.conv.size(); ++i) {
    const auto& c = config_.conv[i];
    h = ag::Frames(h, c.kernel, c.stride);
    h = ag::Gelu(ag::AddRow(ag::MatMul(h, leaves[conv_idx_[i].weight]), leaves[conv_idx_[i].bias]));
  }
  return LayerNorm(h, extractor_ln_, leaves);
}

Var AcousticModel::Encode(const Var& features, std::vector<Var>& leaves) const {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(config_.model_dim()));
  auto linear = [&](const Var& x, size_t w, size_t b) {
    return ag::AddRow(ag::MatMul(x, leaves[w]), leaves[b]);
  };
  Var z = features;
  for (const auto& blk : block_idx_) {
    Var a = LayerNorm(z, blk.ln1, leaves);
    Var q = linear(a, blk.wq, blk.bq);
    Var k = linear(a, blk.wk, blk.bk);
    Var v = linear(a, blk.wv, blk.bv);
    Var att = ag::SoftmaxRows(ag::Scale(ag::MatMul(q, ag::Transpose(k)), inv_sqrt_d));
    z = ag::Add(z, linear(ag::MatMul(att, v), blk.wo, blk.bo));
    Var f = LayerNorm(z, blk.ln2, leaves);
    z = ag::Add(z, linear(ag::Gelu(linear(f, blk.w1, blk.b1)), blk.w2, blk.b2));
  }
  z = LayerNorm(z, final_ln_, leaves);
  return linear(z, head_w_, head_b_);
}

ForwardPass AcousticModel::Forward(std::span<const double> waveform,
                                   const std::vector<bool>& trainable) const {
  ForwardPass pass;
  pass.leaves = MakeLeaves(trainable);
  pass.features = Extract(waveform, pass.leaves);
  pass.logits = Encode(pass.features, pass.leaves);
  return pass;
}

Matrix AcousticModel::Logits(std::span<const double> waveform) const {
  return Forward(waveform).logits.value();
}

std::string AcousticModel::ArchitectureFingerprint() const {
  std::ostringstream os;
  for (const auto& p : params_) os << p.name << ':' << p.value.rows() << 'x' << p.value.cols() << ';';
  os << "vocab:";
  for (const auto& s : vocab_.symbols) os << s << ',';
  os << "blank=" << vocab_.blank_index << ",sep=" << vocab_.separator_index;
  return os.str();
}

ParameterSelection SelectParameters(const AcousticModel& model, ParameterScheme scheme) {
  ParameterSelection sel;
  const auto& params = model.parameters();
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    bool take = false;
    switch (scheme) {
      case ParameterScheme::kBiasOnly: take = p.Has(Tag::kBias); break;
      case ParameterScheme::kLns: take = p.Has(Tag::kLnAffine); break;
      case ParameterScheme::kFePlusLns:
        take = p.Has(Tag::kFeatureExtractor) || p.Has(Tag::kLnAffine);
        break;
      case ParameterScheme::kFull: take = true; break;
    }
    if (take) sel.push_back(i);
  }
  if (sel.empty()) throw ValidationError("parameter scheme selects nothing");
  return sel;
}

std::vector<bool> SelectionMask(const AcousticModel& model, const ParameterSelection& sel) {
  std::vector<bool> mask(model.parameters().size(), false);
  for (size_t i : sel) mask.at(i) = true;
  return mask;
}

std::vector<Matrix> Gradients(const ForwardPass& pass, const ParameterSelection& sel) {
  std::vector<Matrix> grads;
  grads.reserve(sel.size());
  for (size_t i : sel) grads.push_back(pass.leaves.at(i).grad());
  return grads;
}

AdamW::AdamW(ParameterSelection selection, std::vector<double> learning_rates,
             AdamWSettings settings)
    : selection_(std::move(selection)), lrs_(std::move(learning_rates)), settings_(settings) {
  if (lrs_.size() != selection_.size()) {
    throw ValidationError("one learning rate per selected parameter is required");
  }
}

void AdamW::Step(AcousticModel& model, const std::vector<Matrix>& grads) {
  if (grads.size() != selection_.size()) throw ValidationError("gradient count mismatch");
  auto& params = model.mutable_parameters();
  if (state_.m.empty()) {
    for (size_t i : selection_) {
      state_.m.push_back(Matrix::Zero(params[i].value.rows(), params[i].value.cols()));
      state_.v.push_back(Matrix::Zero(params[i].value.rows(), params[i].value.cols()));
    }
  }
  ++state_.step;
  const double bc1 = 1.0 - std::pow(settings_.beta1, static_cast<double>(state_.step));
  const double bc2 = 1.0 - std::pow(settings_.beta2, static_cast<double>(state_.step));
  for (size_t j = 0; j < selection_.size(); ++j) {
    Matrix& theta = params[selection_[j]].value;
    const double lr = lrs_[j];
    if (settings_.weight_decay != 0.0) theta *= 1.0 - lr * settings_.weight_decay;
    state_.m[j] = settings_.beta1 * state_.m[j] + (1.0 - settings_.beta1) * grads[j];
    state_.v[j] = settings_.beta2 * state_.v[j] +
                  (1.0 - settings_.beta2) * grads[j].array().square().matrix();
    theta.array() -= lr * (state_.m[j].array() / bc1) /
                     ((state_.v[j].array() / bc2).sqrt() + settings_.eps);
  }
}

Checkpoint Snapshot(const AcousticModel& model, const AdamW* optimizer) {
  Checkpoint c;
  c.fingerprint = model.ArchitectureFingerprint();
  for (const auto& p : model.parameters()) {
    c.names.push_back(p.name);
    c.values.push_back(p.value);
  }
  if (optimizer != nullptr) c.optimizer = optimizer->state();
  return c;
}

void Restore(AcousticModel& model, const Checkpoint& ckpt, AdamW* optimizer) {
  if (ckpt.fingerprint != model.ArchitectureFingerprint()) {
    throw ValidationError("checkpoint was taken from a different architecture");
  }
  auto& params = model.mutable_parameters();
  for (size_t i = 0; i < params.size(); ++i) params[i].value = ckpt.values[i];
  if (optimizer != nullptr) {
    optimizer->set_state(ckpt.optimizer.value_or(AdamWState{}));
  }
}

namespace {

constexpr char kMagic[8] = {'C', 'E', 'A', 'C', 'K', 'P', 'T', '\0'};

void WriteU64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t ReadU64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ValidationError("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

nlohmann::json ConfigToJson(const ModelConfig& c) {
  nlohmann::json conv = nlohmann::json::array();
  for (const auto& l : c.conv) {
    conv.push_back({{"kernel", l.kernel}, {"stride", l.stride}, {"channels", l.channels}});
  }
  return {{"conv", conv}, {"ffn_dim", c.ffn_dim}, {"num_blocks", c.num_blocks},
          {"ln_eps", c.ln_eps}, {"init_seed", c.init_seed}};
}

ModelConfig ConfigFromJson(const nlohmann::json& j) {
  ModelConfig c;
  c.conv.clear();
  for (const auto& l : j.at("conv")) {
    c.conv.push_back({l.at("kernel").get<int>(), l.at("stride").get<int>(),
                      l.at("channels").get<int>()});
  }
  c.ffn_dim = j.at("ffn_dim").get<int>();
  c.num_blocks = j.at("num_blocks").get<int>();
  c.ln_eps = j.at("ln_eps").get<double>();
  c.init_seed = j.at("init_seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void SaveModel(const AcousticModel& model, const std::filesystem::path& path) {
  nlohmann::json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["model"] = ConfigToJson(model.config());
  header["vocab"] = {{"symbols", model.vocab().symbols},
                     {"blank_index", model.vocab().blank_index},
                     {"separator_index", model.vocab().separator_index}};
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& p : model.parameters()) {
    tensors.push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}});
  }
  header["tensors"] = tensors;
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  WriteU64(out, kCheckpointFormatVersion);
  WriteU64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : model.parameters()) {
    // Column-major order, little-endian IEEE-754 float64.
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      WriteU64(out, std::bit_cast<std::uint64_t>(p.value.data()[i]));
    }
  }
  if (!out) throw RuntimeFailure("failed writing checkpoint " + path.string());
}

AcousticModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw ValidationError(path.string() + " is not a checkpoint file");
  }
  const std::uint64_t version = ReadU64(in);
  if (version != kCheckpointFormatVersion) {
    throw ValidationError("unsupported checkpoint format version " + std::to_string(version));
  }
  const std::uint64_t len = ReadU64(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw ValidationError("truncated checkpoint header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corrupt checkpoint header: ") + e.what());
  }
  Vocabulary vocab;
  vocab.symbols = header.at("vocab").at("symbols").get<std::vector<std::string>>();
  vocab.blank_index = header.at("vocab").at("blank_index").get<int>();
  vocab.separator_index = header.at("vocab").at("separator_index").get<int>();
  AcousticModel model(ConfigFromJson(header.at("model")), std::move(vocab));

  const auto& tensors = header.at("tensors");
  auto& params = model.mutable_parameters();
  if (tensors.size() != params.size()) throw ValidationError("checkpoint tensor count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& t = tensors[i];
    if (t.at("name").get<std::string>() != params[i].name ||
        t.at("rows").get<Eigen::Index>() != params[i].value.rows() ||
        t.at("cols").get<Eigen::Index>() != params[i].value.cols()) {
      throw ValidationError("checkpoint tensor '" + t.at("name").get<std::string>() +
                            "' does not match the architecture");
    }
    for (Eigen::Index k = 0; k < params[i].value.size(); ++k) {
      params[i].value.data()[k] = std::bit_cast<double>(ReadU64(in));
    }
  }
  return model;
}

}  // namespace cea
