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

#ifndef TENSORBUDGET_SPLIT_H_
#define TENSORBUDGET_SPLIT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tensorbudget/ir.h"
#include "tensorbudget/pass_framework.h"

namespace tb {

// Dims of operand `operand_index` along which `instr` acts independently:
// slicing the operand there slices the result and nothing else.
std::vector<int64_t> SplittableDims(const Graph& graph, InstrId instr,
                                    int64_t operand_index);

// How a chunk of the split operand reaches one instruction: a window along
// `dim` starting `shift` elements after the chunk offset, or the whole
// tensor when `whole` is set.
struct ChunkAssignment {
  bool whole = false;
  int64_t dim = -1;
  int64_t shift = 0;

  friend bool operator==(const ChunkAssignment&,
                         const ChunkAssignment&) = default;
};

struct SplitCandidate {
  // A dot, reduce or topk.
  InstrId root = -1;
  InstrId operand_to_split = -1;
  // Dims of operand_to_split that are splittable through the whole region
  // and compatible with the root, ascending.
  std::vector<int64_t> split_dims;
  // Region inputs: small tensors, or large parameters and constants.
  std::vector<InstrId> split_producers;
  // Oversized instructions between the producers and the root, in
  // topological order. operand_to_split is last.
  std::vector<InstrId> path;
};

struct SplitPlan {
  SplitCandidate candidate;
  int64_t best_split_dim = -1;
  int64_t extent = 0;
  int64_t split_size = 0;
  // ceil(extent / split_size).
  int64_t trip_count = 0;
  // extent mod split_size; handled by one trailing partial step.
  int64_t remainder = 0;
  // Bytes of the largest per-iteration slice among path instructions.
  int64_t slice_bytes = 0;
  // Chunk placement of every path instruction and producer.
  std::map<InstrId, ChunkAssignment> assignment;
};

// Returns nullopt when the root's output is itself oversized, when no
// operand or two distinct operands are oversized, when the path is shared
// with consumers outside it, or when no dim survives. `why` receives the
// reason.
std::optional<SplitCandidate> FindCandidate(const Graph& graph, InstrId root,
                                            const PassConfig& config,
                                            std::string* why = nullptr);

// Picks the splittable dim with the largest extent (lowest index on ties)
// and the largest chunk whose slices fit tensor_split_size. Throws
// Error(kUnsplittableCandidate) when a single row is already too big.
SplitPlan PlanSplit(const Graph& graph, const SplitCandidate& candidate,
                    const PassConfig& config);

// Replaces the candidate root with a counter While over chunks (plus a
// trailing partial step when remainder > 0) and removes dead code. Loop
// sub-graphs are named "<graph>.body<k>" and "<graph>.cond<k>". Returns the
// id now standing in for the root.
InstrId BuildWhile(Graph& graph, const SplitPlan& plan, int64_t loop_index);

struct SplitStats {
  int applied = 0;
  int unsplittable = 0;
};

// Depth-first from the root, splits every candidate until none remain, then
// re-runs once on each new loop body. Never throws on unsplittable
// candidates; see DiagnoseOversized.
SplitStats SplitPass(Graph& graph, const PassConfig& config);

// One diagnostic per instruction still above the threshold outside loop
// bodies, with the reason it was not split.
std::vector<Diagnostic> DiagnoseOversized(const Graph& graph,
                                          const PassConfig& config);

}  // namespace tb

#endif  // TENSORBUDGET_SPLIT_H_
