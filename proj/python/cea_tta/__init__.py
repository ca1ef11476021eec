# Copyright 2026 The cea-tta Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the cea-tta core library."""

from cea_tta._core import (
    ValidationError,
    analyze_frames,
    ctc_loss,
    default_entropy_threshold,
    entropy_buckets,
    frame_entropy,
    gaussian_corrupt,
    run_command,
    snr_mix,
    toy_utterance,
    wer,
    werr,
)

__all__ = [
    "ValidationError",
    "analyze_frames",
    "ctc_loss",
    "default_entropy_threshold",
    "entropy_buckets",
    "frame_entropy",
    "gaussian_corrupt",
    "run_command",
    "snr_mix",
    "toy_utterance",
    "wer",
    "werr",
]
