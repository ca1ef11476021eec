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

// cea: toy-scale test-time adaptation pipeline.
//
//   cea train-toy --out runs/model
//   cea corrupt   --manifest runs/model/test/manifest.jsonl --out runs/noisy
//   cea adapt     --model runs/model/model.ckpt --manifest runs/noisy/manifest.jsonl
//                 --method ours --out runs/adapt
//   cea analyze-entropy --records runs/adapt/ours/records.jsonl --out runs/fig

#include <iostream>

#include <CLI11.hpp>

#include "cea/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Toy-scale test-time adaptation for CTC acoustic models"};
  app.require_subcommand(1);
  cea::CommandOptions opt;

  for (const auto& name : cea::CommandNames()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "experiment config (JSON)");
    sub->add_option("--seed", opt.seed, "global seed");
    sub->add_option("--out", opt.out_dir, "output directory")->required();
    sub->add_option("--workers", opt.workers, "parallel workers (one model copy each)");
    if (name == "adapt") sub->add_option("--method", opt.method, "ours, tent, sar_filter, teco, suta_like, "
                                                                 "ours_wo_stcr, ours_wo_cea or source");
    if (name == "adapt" || name == "evaluate") sub->add_option("--model", opt.model_path, "model checkpoint");
    if (name != "train-toy" && name != "analyze-entropy") {
      sub->add_option("--manifest", opt.manifest_path, "input manifest (JSONL)");
    }
    if (name == "analyze-entropy") sub->add_option("--records", opt.records_path, "per-utterance records (JSONL)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cea::kExitValidation;
  }
  return cea::RunCommand(app.get_subcommands().front()->get_name(), opt, std::cout, std::cerr);
}
