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

#ifndef TENSORBUDGET_MATCH_REPLACE_H_
#define TENSORBUDGET_MATCH_REPLACE_H_

#include <functional>
#include <string>
#include <vector>

#include "tensorbudget/ir.h"

namespace tb {

// `matches` inspects the instruction rooted at an id; `build` appends the
// replacement and returns its id, which must have the root's type.
struct RewriteRule {
  std::string name;
  std::function<bool(const Graph&, InstrId)> matches;
  std::function<InstrId(Graph&, InstrId)> build;
};

// mul(x, x) -> square(x); add(a, neg(b)) and add(neg(b), a) -> sub(a, b).
RewriteRule SquareRule();
RewriteRule SubtractRule();

// reduce_sum_k(square(sub(broadcast(x), broadcast(y)))) with x, y rank 2
// sharing the reduced dim becomes |x|^2 + |y|^2 - 2 x.y^T. A max(., 0) clamp
// is added only when every consumer is sqrt.
RewriteRule EuclideanDistanceRule();

// add(M, mul(broadcast(s), eq(iota_0, iota_1))) on square M becomes
// add_diagonal(M, s).
RewriteRule AddDiagonalRule();

// Applies `rules` over the graph in topological order until nothing fires,
// then removes dead code. Returns the number of rewrites.
int ApplyRules(Graph& graph, const std::vector<RewriteRule>& rules);

int Canonicalize(Graph& graph);
int RewriteEuclideanDistance(Graph& graph);
int RewriteAddDiagonal(Graph& graph);

// Canonicalization followed by both rewrites.
int MatchReplacePass(Graph& graph);

}  // namespace tb

#endif  // TENSORBUDGET_MATCH_REPLACE_H_
