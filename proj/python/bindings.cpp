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

#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cea/commands.hpp"
#include "cea/ctc.hpp"
#include "cea/errors.hpp"

namespace py = pybind11;

namespace {

py::dict AnalysisToDict(const cea::FrameAnalysis& a) {
  py::dict d;
  d["entropy"] = a.entropy;
  d["pseudo_label"] = a.pseudo_label;
  d["silence_mask"] = std::vector<bool>(a.silence_mask.begin(), a.silence_mask.end());
  d["weights"] = a.weights;
  return d;
}

py::dict BucketsToDict(const cea::EntropyBuckets& b) {
  py::dict d;
  d["nonsil_high"] = b.frac_nonsil_high;
  d["nonsil_low"] = b.frac_nonsil_low;
  d["sil_high"] = b.frac_sil_high;
  d["sil_low"] = b.frac_sil_low;
  d["threshold"] = b.threshold;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Frame analysis, decoding, CTC, corruption and pipeline commands.";
  py::register_exception<cea::ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def(
      "frame_entropy",
      [](const Eigen::MatrixXd& probs, int blank) { return cea::FrameEntropy(cea::FramePosterior(probs, blank)); },
      py::arg("probs"), py::arg("blank_index"));
  m.def(
      "analyze_frames",
      [](const Eigen::MatrixXd& probs, int blank, const std::string& strategy) {
        return AnalysisToDict(cea::AnalyzeFrames(cea::FramePosterior(probs, blank), cea::ParseFrameStrategy(strategy)));
      },
      py::arg("probs"), py::arg("blank_index"), py::arg("strategy") = "non_silent");
  m.def(
      "entropy_buckets",
      [](const std::vector<double>& entropy, const std::vector<bool>& silent, double threshold) {
        return BucketsToDict(cea::ComputeEntropyBuckets(entropy, silent, threshold));
      },
      py::arg("entropy"), py::arg("silent"), py::arg("threshold"));
  m.def("default_entropy_threshold", &cea::DefaultEntropyThreshold, py::arg("num_classes"));

  m.def("wer", &cea::Wer, py::arg("reference"), py::arg("hypothesis"));
  m.def("werr", &cea::Werr, py::arg("wer_source"), py::arg("wer_adapted"));
  m.def("ctc_loss", &cea::CtcLoss, py::arg("logits"), py::arg("target"), py::arg("blank_index"));

  m.def(
      "gaussian_corrupt",
      [](const std::vector<double>& clean, double delta, std::uint64_t seed) {
        return cea::GaussianCorrupt(clean, delta, seed);
      },
      py::arg("clean"), py::arg("delta"), py::arg("seed"));
  m.def(
      "snr_mix",
      [](const std::vector<double>& clean, const std::vector<double>& noise, double snr_db, std::uint64_t seed) {
        const cea::MixResult r = cea::SnrMix(clean, noise, snr_db, seed);
        return py::make_tuple(r.mixed, r.measured_snr_db);
      },
      py::arg("clean"), py::arg("noise"), py::arg("snr_db"), py::arg("seed"));

  m.def(
      "toy_utterance",
      [](std::uint64_t seed) {
        const cea::Utterance u = cea::GenerateToyUtterance(cea::ToyTaskSpec{}, seed);
        py::dict d;
        d["samples"] = u.samples;
        d["sample_rate"] = u.sample_rate;
        d["words"] = u.words;
        return d;
      },
      py::arg("seed"));

  m.def(
      "run_command",
      [](const std::string& name, const std::string& out, const std::string& config, std::optional<std::uint64_t> seed,
         std::optional<std::string> method, std::optional<int> workers, std::optional<std::string> model,
         std::optional<std::string> manifest, std::optional<std::string> records) {
        cea::CommandOptions o;
        o.out_dir = out;
        o.config_path = config;
        o.seed = seed;
        o.method = method;
        o.workers = workers;
        o.model_path = model;
        o.manifest_path = manifest;
        o.records_path = records;
        std::ostringstream stdout_text, log;
        int code;
        {
          py::gil_scoped_release release;
          code = cea::RunCommand(name, o, stdout_text, log);
        }
        return py::make_tuple(code, stdout_text.str(), log.str());
      },
      py::arg("name"), py::arg("out"), py::arg("config") = "", py::arg("seed") = py::none(),
      py::arg("method") = py::none(), py::arg("workers") = py::none(), py::arg("model") = py::none(),
      py::arg("manifest") = py::none(), py::arg("records") = py::none());
}
