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

#include <vector>

#include "cea/autograd.hpp"

namespace cea {

// Frames needed to align `target`: its length plus one blank between each
// pair of equal neighbours.
int MinimumCtcFrames(const std::vector<int>& target);

struct CtcResult {
  double loss = 0.0;       // -ln P(target | logits)
  ag::Matrix grad_logits;  // d loss / d logits, T x C
};

// Log-space forward-backward over the blank-extended target. Throws
// ValidationError when T is too short for any valid alignment.
CtcResult CtcLossWithGrad(const ag::Matrix& logits, const std::vector<int>& target,
                          int blank_index);

double CtcLoss(const ag::Matrix& logits, const std::vector<int>& target, int blank_index);

// Differentiable op wrapper for training.
ag::Var CtcLossOp(const ag::Var& logits, const std::vector<int>& target, int blank_index);

}  // namespace cea
