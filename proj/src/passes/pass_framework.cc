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

#include "tensorbudget/pass_framework.h"

#include <string>

#include "tensorbudget/match_replace.h"
#include "tensorbudget/reorder.h"
#include "tensorbudget/split.h"
#include "tensorbudget/status.h"

namespace tb {
namespace {

constexpr int kMaxRounds = 4;

void CheckValid(const Graph& graph, const std::string& after) {
  std::vector<Diagnostic> problems = Validate(graph);
  if (problems.empty()) return;
  const Diagnostic& p = problems.front();
  throw Error(ErrorCode::kPipelineInvariantViolation,
              "invalid graph after " + after + ": %" +
                  std::to_string(p.instruction) + " in " + p.computation +
                  ": " + p.reason);
}

}  // namespace

void PassConfig::Check() const {
  if (tensor_size_threshold <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "tensor_size_threshold must be positive");
  }
  const int64_t s = split_size();
  if (s <= 0 || s > tensor_size_threshold) {
    throw Error(ErrorCode::kInvalidArgument,
                "tensor_split_size " + std::to_string(s) +
                    " must be in (0, " +
                    std::to_string(tensor_size_threshold) + "]");
  }
}

Graph RunPipeline(const Graph& graph, const PassConfig& config,
                  std::vector<Diagnostic>* diagnostics) {
  config.Check();
  if (std::vector<Diagnostic> problems = Validate(graph); !problems.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "input graph is invalid: " + problems.front().reason);
  }
  Graph out = graph;
  if (config.enable_match_replace || config.enable_reorder ||
      config.enable_split) {
    // Splitting copies chain fragments into loop bodies and remainders, which
    // can expose new rewrites; repeat until a round changes nothing so that
    // running the pipeline again is a no-op.
    for (int round = 0; round < kMaxRounds; ++round) {
      int changed = 0;
      if (config.enable_match_replace) {
        changed += MatchReplacePass(out);
        CheckValid(out, "match_replace");
      }
      if (config.enable_reorder) {
        changed += ReorderPass(out);
        CheckValid(out, "reorder");
      }
      if (config.enable_split) {
        changed += SplitPass(out, config).applied;
        CheckValid(out, "split");
      }
      if (changed == 0) break;
    }
    out.RemoveDeadCode();
    out = out.Canonicalized();
  }
  if (diagnostics != nullptr) {
    std::vector<Diagnostic> d = DiagnoseOversized(out, config);
    diagnostics->insert(diagnostics->end(), d.begin(), d.end());
  }
  return out;
}

}  // namespace tb
