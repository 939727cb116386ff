// Copyright 2026 The TensorBudget Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TENSORBUDGET_PASS_FRAMEWORK_H_
#define TENSORBUDGET_PASS_FRAMEWORK_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "tensorbudget/ir.h"

namespace tb {

struct PassConfig {
  // Tensors strictly larger than this many bytes are split candidates.
  int64_t tensor_size_threshold = 1'000'000'000;
  // Upper bound on one slice; unset means equal to the threshold.
  std::optional<int64_t> tensor_split_size;
  bool enable_match_replace = true;
  bool enable_reorder = true;
  bool enable_split = true;

  int64_t split_size() const {
    return tensor_split_size.value_or(tensor_size_threshold);
  }
  // Throws Error(kInvalidArgument) unless 0 < split_size <= threshold.
  void Check() const;
};

// Runs match_replace, reorder and split (those enabled) in that order,
// validating after each, and repeats the sequence until a round changes
// nothing (at most 4 rounds). Throws Error(kPipelineInvariantViolation) when a pass
// leaves an invalid graph. With every pass disabled the input comes back
// untouched; otherwise the result is dead-code-eliminated and canonicalized.
// Split diagnostics are appended to `diagnostics` when given.
Graph RunPipeline(const Graph& graph, const PassConfig& config,
                  std::vector<Diagnostic>* diagnostics = nullptr);

}  // namespace tb

#endif  // TENSORBUDGET_PASS_FRAMEWORK_H_
