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

#ifndef TENSORBUDGET_REORDER_H_
#define TENSORBUDGET_REORDER_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tensorbudget/ir.h"

namespace tb {

// Binary tree over chain factor indices.
struct Parenthesization {
  int64_t factor = -1;  // Leaf when >= 0.
  std::shared_ptr<const Parenthesization> left, right;

  static Parenthesization Leaf(int64_t factor);
  static Parenthesization Product(Parenthesization left,
                                  Parenthesization right);
  static Parenthesization LeftToRight(int64_t factors);
  static Parenthesization RightToLeft(int64_t factors);

  bool IsLeaf() const { return factor >= 0; }
  // "((0 1) 2)" style.
  std::string ToString() const;
  friend bool operator==(const Parenthesization& a, const Parenthesization& b);
};

// A product f0 . f1 ... f(k-1) of plain matrix Dots (contract lhs dim 1 with
// rhs dim 0, no batch dims). Only the last factor may be a vector; it is
// treated as [n, 1]. dims has k + 1 entries: factor i is [dims[i], dims[i+1]].
struct MatmulChain {
  std::vector<InstrId> factors;
  std::vector<Shape> shapes;
  std::vector<int64_t> dims;
  InstrId root = -1;
  DType dtype = DType::kF64;
  bool vector_tail = false;
  // Association found in the graph.
  Parenthesization source;
};

// Maximal chains, flattened through Dots whose only user is the enclosing
// Dot, in topological order of their roots. A Dot with other users ends the chain
// below it, so interior results are never recomputed.
std::vector<MatmulChain> DetectChains(const Graph& graph);

// Bytes of the largest product formed strictly inside `tree` (the final
// result is excluded; it is the same for every association).
int64_t PeakIntermediateBytes(const MatmulChain& chain,
                              const Parenthesization& tree);

// Right-to-left association when the trailing dim is strictly smaller than
// every interior dim and that strictly lowers the peak intermediate;
// otherwise the source association.
Parenthesization ReorderChain(const MatmulChain& chain);

// Rewrites every chain whose ReorderChain differs from its source. Returns
// the number of chains rewritten.
int ReorderPass(Graph& graph);

}  // namespace tb

#endif  // TENSORBUDGET_REORDER_H_
