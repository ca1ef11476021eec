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

#include "cea/adaptation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>

#include "cea/errors.hpp"

namespace cea {

void AdaptationConfig::Validate() const {
  if (steps_stage1 < 0 || steps_stage2 < 0) throw ValidationError("step counts must be >= 0");
  if (!(alpha >= 0.0)) throw ValidationError("alpha must be >= 0");
  if (window_k < 2) throw ValidationError("window_k must be >= 2");
  if (!(lr_ln > 0.0) || !(lr_fe > 0.0)) throw ValidationError("learning rates must be > 0");
}

double CeaLoss(const FramePosterior& posterior, const FrameAnalysis& analysis) {
  if (static_cast<int>(analysis.weights.size()) != posterior.num_frames()) {
    throw ValidationError("analysis does not match posterior");
  }
  double loss = 0.0;
  for (size_t i = 0; i < analysis.weights.size(); ++i) loss += analysis.weights[i] * analysis.entropy[i];
  return loss;
}

ag::Var SelfAttentionSmooth(const ag::Var& features) {
  if (features.rows() < 1 || features.cols() < 1) throw ValidationError("empty feature matrix");
  if (!features.value().allFinite()) throw ValidationError("non-finite features");
  const double scale = 1.0 / std::sqrt(static_cast<double>(features.cols()));
  ag::Var scores = ag::Scale(ag::MatMul(features, ag::Transpose(features)), scale);
  return ag::MatMul(ag::SoftmaxRows(scores), features);
}

ag::Matrix SelfAttentionSmooth(const ag::Matrix& features) {
  return SelfAttentionSmooth(ag::Var(features)).value();
}

double StcrLoss(const std::vector<double>& entropy, const ag::Matrix& smoothed,
                const std::vector<bool>& silence_mask, int window_k, double alpha) {
  if (entropy.size() != silence_mask.size() ||
      static_cast<Eigen::Index>(entropy.size()) != smoothed.rows()) {
    throw ValidationError("entropy, features and mask lengths differ");
  }
  double total = 0.0;
  for (double e : entropy) total += e;
  std::vector<bool> active(silence_mask.size());
  for (size_t i = 0; i < active.size(); ++i) active[i] = !silence_mask[i];
  return total + alpha * ag::PairDistanceSum(ag::Var(smoothed), window_k, active).scalar();
}

namespace {

struct StageContext {
  ParameterSelection selection;
  std::vector<bool> mask;
  std::vector<double> lrs;
};

StageContext PrepareStage(const AcousticModel& model, const StagePlan& plan) {
  StageContext ctx;
  ctx.selection = SelectParameters(model, plan.scheme);
  ctx.mask = SelectionMask(model, ctx.selection);
  for (size_t i : ctx.selection) {
    const bool fe = model.parameters()[i].Has(ParameterGroupTag::kFeatureExtractor);
    ctx.lrs.push_back(fe ? plan.lr_fe : plan.lr_ln);
  }
  return ctx;
}

StepRecord Record(int step, int stage, double loss, const FrameAnalysis& a, int num_classes) {
  StepRecord r;
  r.step = step;
  r.stage = stage;
  r.loss = loss;
  r.buckets = ComputeEntropyBuckets(a.entropy, a.silence_mask, DefaultEntropyThreshold(num_classes));
  double sum = 0.0;
  for (size_t i = 0; i < a.entropy.size(); ++i) {
    if (!a.silence_mask[i]) {
      sum += a.entropy[i];
      ++r.num_nonsilent;
    }
  }
  r.mean_nonsilent_entropy = r.num_nonsilent > 0 ? sum / r.num_nonsilent : 0.0;
  return r;
}

bool AllFinite(const std::vector<ag::Matrix>& grads) {
  return std::all_of(grads.begin(), grads.end(), [](const ag::Matrix& g) { return g.allFinite(); });
}

// Restores the snapshot on every exit path.
class EpisodeGuard {
 public:
  explicit EpisodeGuard(AcousticModel& model) : model_(model), snapshot_(Snapshot(model)) {}
  ~EpisodeGuard() { Restore(model_, snapshot_); }
  EpisodeGuard(const EpisodeGuard&) = delete;
  EpisodeGuard& operator=(const EpisodeGuard&) = delete;

 private:
  AcousticModel& model_;
  Checkpoint snapshot_;
};

}  // namespace

ag::Var StageObjective(const StagePlan& plan, const ForwardPass& pass, const FrameAnalysis& a) {
  ag::Var entropy = ag::RowEntropy(pass.logits);
  switch (plan.objective) {
    case Objective::kConfidenceWeighted: {
      if (!plan.unit_weights) return ag::WeightedSum(entropy, a.weights);
      return ag::Sum(entropy);
    }
    case Objective::kEntropy:
      return ag::Sum(entropy);
    case Objective::kFilteredEntropy: {
      std::vector<double> keep(a.entropy.size());
      for (size_t i = 0; i < keep.size(); ++i) keep[i] = a.entropy[i] < plan.filter_threshold ? 1.0 : 0.0;
      return ag::WeightedSum(entropy, keep);
    }
    case Objective::kEntropyConsistency: {
      ag::Var total = ag::Sum(entropy);
      if (plan.consistency_weight == 0.0) return total;
      ag::Var z = plan.smooth_features ? SelfAttentionSmooth(pass.features) : pass.features;
      std::vector<bool> active(a.silence_mask.size(), true);
      if (plan.gate_silence) {
        for (size_t i = 0; i < active.size(); ++i) active[i] = !a.silence_mask[i];
      }
      ag::Var pairs = ag::PairDistanceSum(z, plan.window_k, active);
      return ag::Add(total, ag::Scale(pairs, plan.consistency_weight));
    }
  }
  throw ValidationError("unknown objective");
}

AdaptationReport RunStages(AcousticModel& model, const Utterance& utterance,
                           const std::vector<StagePlan>& stages, const AdamWSettings& optimizer,
                           const std::string& method, const StageObserver& after_stage) {
  AdaptationReport report;
  report.utterance_id = utterance.id;
  report.method = method;
  report.reference = utterance.words;

  EpisodeGuard guard(model);
  report.before = GreedyDecode(model.Logits(utterance.samples), model.vocab());
  report.after = report.before;

  int step = 0;
  try {
    for (const auto& plan : stages) {
      const auto t0 = std::chrono::steady_clock::now();
      if (plan.steps > 0) {
        StageContext ctx = PrepareStage(model, plan);
        AdamW opt(ctx.selection, ctx.lrs, optimizer);  // fresh moments per stage
        for (int s = 0; s < plan.steps; ++s, ++step) {
          ForwardPass pass = model.Forward(utterance.samples, ctx.mask);
          if (!pass.logits.value().allFinite()) throw RuntimeFailure("non-finite logits");
          const FramePosterior posterior =
              FramePosterior::FromLogits(pass.logits.value(), model.blank_index());
          const FrameAnalysis analysis = AnalyzeFrames(posterior, plan.strategy);
          ag::Var loss = StageObjective(plan, pass, analysis);
          report.steps.push_back(Record(step, plan.stage_id, loss.scalar(), analysis, model.num_classes()));
          if (!std::isfinite(loss.scalar())) throw RuntimeFailure("non-finite loss");
          ag::Backward(loss);
          auto grads = Gradients(pass, ctx.selection);
          if (!AllFinite(grads)) throw RuntimeFailure("non-finite gradient");
          opt.Step(model, grads);
        }
      }
      if (after_stage) after_stage(model, plan.stage_id);
      report.stage_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    report.after = GreedyDecode(model.Logits(utterance.samples), model.vocab());
  } catch (const std::exception& e) {
    report.failed = true;
    report.failure = "step " + std::to_string(step) + ": " + e.what();
    report.after = report.before;
  }

  if (!report.reference.empty()) {
    report.errors_before = AlignWords(report.reference, report.before.words);
    report.errors_after = AlignWords(report.reference, report.after.words);
    report.wer_before = CorpusWer(report.errors_before);
    report.wer_after = CorpusWer(report.errors_after);
  }
  return report;
}

std::vector<StagePlan> FullMethodStages(const AdaptationConfig& config) {
  config.Validate();
  StagePlan cea;
  cea.stage_id = 1;
  cea.steps = config.steps_stage1;
  cea.scheme = config.scheme_stage1;
  cea.objective = Objective::kConfidenceWeighted;
  cea.strategy = config.frame_strategy;
  cea.lr_ln = config.lr_ln;
  cea.lr_fe = config.lr_fe;

  StagePlan stcr;
  stcr.stage_id = 2;
  stcr.steps = config.steps_stage2;
  stcr.scheme = config.scheme_stage2;
  stcr.objective = Objective::kEntropyConsistency;
  stcr.consistency_weight = config.alpha;
  stcr.window_k = config.window_k;
  stcr.smooth_features = true;
  stcr.gate_silence = true;
  stcr.lr_ln = config.lr_ln;
  // Stage 2 adapts at the layer-norm rate, extractor norm included.
  stcr.lr_fe = config.lr_ln;
  return {cea, stcr};
}

AdaptationReport AdaptUtterance(AcousticModel& model, const Utterance& utterance,
                                const AdaptationConfig& config) {
  return RunStages(model, utterance, FullMethodStages(config), config.optimizer, "ours");
}

EpisodicSummary Summarize(std::vector<AdaptationReport> reports, const std::string& method) {
  EpisodicSummary s;
  s.method = method;
  s.reports = std::move(reports);
  // step index -> per-utterance records
  std::map<int, std::vector<const StepRecord*>> by_step;
  for (const auto& r : s.reports) {
    s.errors_before += r.errors_before;
    s.errors_after += r.errors_after;
    if (r.failed) ++s.failures;
    for (const auto& st : r.steps) by_step[st.step].push_back(&st);
  }
  if (s.errors_before.reference_words > 0) {
    s.wer_before = CorpusWer(s.errors_before);
    s.wer_after = CorpusWer(s.errors_after);
    if (s.wer_before > 0.0) s.werr = Werr(s.wer_before, s.wer_after);
  }
  for (const auto& [step, records] : by_step) {
    StepAggregate agg;
    agg.step = step;
    agg.stage = records.front()->stage;
    agg.utterances = static_cast<int>(records.size());
    std::vector<EntropyBuckets> parts;
    double ent_sum = 0.0;
    int ent_count = 0;
    for (const StepRecord* r : records) {
      agg.mean_loss += r->loss / static_cast<double>(records.size());
      parts.push_back(r->buckets);
      if (r->num_nonsilent > 0) {
        ent_sum += r->mean_nonsilent_entropy;
        ++ent_count;
      }
    }
    agg.mean_nonsilent_entropy = ent_count > 0 ? ent_sum / ent_count : 0.0;
    agg.pooled = AggregateBuckets(parts, BucketAggregation::kPooled);
    agg.per_utterance_mean = AggregateBuckets(parts, BucketAggregation::kPerUtteranceMean);
    s.steps.push_back(agg);
  }
  return s;
}

EpisodicSummary RunEpisodic(AcousticModel& model, const std::vector<Utterance>& utterances,
                            const Adapter& adapter, int workers) {
  std::vector<AdaptationReport> reports(utterances.size());
  const size_t n_workers = std::clamp<size_t>(static_cast<size_t>(std::max(workers, 1)), 1,
                                              std::max<size_t>(utterances.size(), 1));
  if (n_workers <= 1) {
    for (size_t i = 0; i < utterances.size(); ++i) reports[i] = adapter(model, utterances[i]);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(n_workers);
    for (size_t w = 0; w < n_workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          AcousticModel local = model;
          for (size_t i = w; i < utterances.size(); i += n_workers) {
            reports[i] = adapter(local, utterances[i]);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  const std::string method = reports.empty() ? std::string() : reports.front().method;
  return Summarize(std::move(reports), method);
}

EpisodicSummary RunEpisodic(AcousticModel& model, const std::vector<Utterance>& utterances,
                            const AdaptationConfig& config, int workers) {
  config.Validate();
  EpisodicSummary s = RunEpisodic(
      model, utterances,
      [&config](AcousticModel& m, const Utterance& u) { return AdaptUtterance(m, u, config); },
      workers);
  s.method = "ours";
  return s;
}

}  // namespace cea
