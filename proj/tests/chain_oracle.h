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

#ifndef TENSORBUDGET_TESTS_CHAIN_ORACLE_H_
#define TENSORBUDGET_TESTS_CHAIN_ORACLE_H_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "tensorbudget/builder.h"
#include "tensorbudget/reorder.h"

namespace tb::testing {

// Classic matrix-chain DP over scalar multiplication counts. Factor i is
// [dims[i], dims[i+1]]. Ties pick the lowest split point.
inline Parenthesization OptimalParenthesization(
    const std::vector<int64_t>& dims) {
  const size_t k = dims.size() - 1;
  std::vector<std::vector<int64_t>> cost(k, std::vector<int64_t>(k + 1, 0));
  std::vector<std::vector<size_t>> split(k, std::vector<size_t>(k + 1, 0));
  for (size_t len = 2; len <= k; ++len) {
    for (size_t i = 0; i + len <= k; ++i) {
      const size_t j = i + len;
      cost[i][j] = std::numeric_limits<int64_t>::max();
      for (size_t s = i + 1; s < j; ++s) {
        const int64_t c = cost[i][s] + cost[s][j] +
                          dims[i] * dims[s] * dims[j];
        if (c < cost[i][j]) {
          cost[i][j] = c;
          split[i][j] = s;
        }
      }
    }
  }
  auto build = [&](auto&& self, size_t i, size_t j) -> Parenthesization {
    if (j - i == 1) return Parenthesization::Leaf(static_cast<int64_t>(i));
    const size_t s = split[i][j];
    return Parenthesization::Product(self(self, i, s), self(self, s, j));
  };
  return build(build, 0, k);
}

// Every binary tree over factors [first, last).
inline std::vector<Parenthesization> AllParenthesizations(int64_t first,
                                                          int64_t last) {
  if (last - first == 1) return {Parenthesization::Leaf(first)};
  std::vector<Parenthesization> out;
  for (int64_t s = first + 1; s < last; ++s) {
    for (const auto& l : AllParenthesizations(first, s)) {
      for (const auto& r : AllParenthesizations(s, last)) {
        out.push_back(Parenthesization::Product(l, r));
      }
    }
  }
  return out;
}

// Parameters f0..f(k-1); the last is a vector when dims.back() == 1.
inline Graph ChainGraph(const std::vector<int64_t>& dims,
                        const Parenthesization& tree,
                        DType dtype = DType::kF64) {
  Builder b("chain");
  const auto k = static_cast<int64_t>(dims.size()) - 1;
  const bool vector_tail = dims.back() == 1;
  std::vector<InstrId> f;
  for (int64_t i = 0; i < k; ++i) {
    const auto u = static_cast<size_t>(i);
    Shape s = vector_tail && i == k - 1 ? Shape({dims[u]})
                                        : Shape({dims[u], dims[u + 1]});
    f.push_back(b.Parameter(i, dtype, s));
  }
  auto emit = [&](auto&& self, const Parenthesization& t) -> InstrId {
    if (t.IsLeaf()) return f[static_cast<size_t>(t.factor)];
    return b.MatMul(self(self, *t.left), self(self, *t.right));
  };
  InstrId root = emit(emit, tree);
  return std::move(b).Build(root);
}

// Vector tail, interior dims in [2, 64], leading dim >= every interior dim.
inline std::vector<int64_t> RandomShrinkingTail(std::mt19937_64& rng,
                                                int64_t factors) {
  std::uniform_int_distribution<int64_t> dim(2, 64);
  std::vector<int64_t> dims(static_cast<size_t>(factors) + 1);
  int64_t widest = 2;
  for (int64_t i = 1; i < factors; ++i) {
    dims[static_cast<size_t>(i)] = dim(rng);
    widest = std::max(widest, dims[static_cast<size_t>(i)]);
  }
  dims[0] = std::uniform_int_distribution<int64_t>(widest, 96)(rng);
  dims.back() = 1;
  return dims;
}

}  // namespace tb::testing

#endif  // TENSORBUDGET_TESTS_CHAIN_ORACLE_H_
