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

#include "cea/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "cea/ctc.hpp"
#include "cea/errors.hpp"

namespace cea {

double EvaluateWer(const AcousticModel& model, const std::vector<Utterance>& corpus) {
  EditCounts totals;
  for (const auto& u : corpus) {
    const Transcript hyp = GreedyDecode(model.Logits(u.samples), model.vocab());
    totals += AlignWords(u.words, hyp.words);
  }
  return CorpusWer(totals);
}

AcousticModel TrainReferenceModel(const ToyTaskSpec& spec, const TrainConfig& config,
                                  TrainReport* report,
                                  const std::function<void(const std::string&)>& log) {
  spec.Validate();
  if (config.train_size < 1 || config.held_out_size < 1 || config.epochs < 0 ||
      config.batch_size < 1 || !(config.learning_rate > 0.0) ||
      !(config.label_smoothing >= 0.0)) {
    throw ValidationError("bad training configuration");
  }
  ModelConfig mc = config.model;
  mc.init_seed = DeriveSeed(config.seed, 0x696e6974ULL, 0);
  AcousticModel model(mc, MakeToyVocabulary(spec));

  const auto train = GenerateToyCorpus(spec, config.train_size, DeriveSeed(config.seed, 1, 0), "train-");
  const auto held_out = GenerateToyCorpus(spec, config.held_out_size, DeriveSeed(config.seed, 2, 0), "dev-");

  const ParameterSelection all = SelectParameters(model, ParameterScheme::kFull);
  const std::vector<bool> mask = SelectionMask(model, all);
  AdamW optimizer(all, std::vector<double>(all.size(), config.learning_rate), AdamWSettings{});

  TrainReport local;
  std::mt19937_64 shuffle_rng(DeriveSeed(config.seed, 3, 0));
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const int total_batches = config.epochs * static_cast<int>((train.size() + config.batch_size - 1) / config.batch_size);
  int batch_counter = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      std::vector<ag::Matrix> grads;
      for (size_t b = start; b < end; ++b) {
        const Utterance& u = train[order[b]];
        ForwardPass pass = model.Forward(u.samples, mask);
        ag::Var loss = CtcLossOp(pass.logits, u.target, model.blank_index());
        loss_sum += loss.scalar();
        if (config.label_smoothing > 0.0) {
          loss = ag::Add(loss, ag::Scale(ag::Sum(ag::RowUniformCrossEntropy(pass.logits)),
                                         config.label_smoothing));
        }
        ag::Backward(loss);
        auto g = Gradients(pass, all);
        if (grads.empty()) {
          grads = std::move(g);
        } else {
          for (size_t i = 0; i < grads.size(); ++i) grads[i] += g[i];
        }
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto& g : grads) g *= scale;
      optimizer.Step(model, grads);
      ++batch_counter;
    }
    local.epoch_loss.push_back(loss_sum / static_cast<double>(train.size()));
    local.epochs_run = epoch + 1;
    if (log) {
      std::ostringstream os;
      os << "epoch " << epoch + 1 << "/" << config.epochs << " ctc_loss=" << local.epoch_loss.back()
         << " (" << batch_counter << "/" << total_batches << " batches)";
      log(os.str());
    }
  }
  local.held_out_wer = EvaluateWer(model, held_out);
  local.reached_target = local.held_out_wer <= config.target_wer;
  std::ostringstream diag;
  diag << "held-out WER " << local.held_out_wer << " over " << held_out.size()
       << " utterances (target " << config.target_wer << ")";
  if (!local.epoch_loss.empty()) diag << ", final CTC loss " << local.epoch_loss.back();
  local.diagnostics = diag.str();
  if (report != nullptr) *report = std::move(local);
  return model;
}

}  // namespace cea
