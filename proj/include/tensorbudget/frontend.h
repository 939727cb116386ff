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

#ifndef TENSORBUDGET_FRONTEND_H_
#define TENSORBUDGET_FRONTEND_H_

#include <cstdint>
#include <string_view>

#include "tensorbudget/ir.h"

namespace tb {

// Squared exponential kernel sigma^2 * exp(-|x - y|^2 / (2 l^2)).
struct KernelSpec {
  double variance = 1.0;
  double lengthscale = 1.0;
};

enum class Metric { kL2, kL1, kCosine };

std::string_view MetricName(Metric metric);
// Accepts "l2", "l1", "cosine" (case-insensitive). Throws kInvalidArgument.
Metric ParseMetric(std::string_view name);

// Parameters x:[n], y:[n], v:[n]; returns K(x, y) v as [n]. The kernel matrix
// is built densely from broadcast differences.
Graph BuildKernelMvm(int64_t n, const KernelSpec& spec, DType dtype);

// Parameters data:[n,d], queries:[m,d]; returns the [m,n] distance matrix.
// L2 is the squared distance in broadcast-subtract form, L1 uses abs, and
// cosine is 1 - <q,x> / (|q| |x|). Zero vectors make cosine fail at
// evaluation with kInvalidArgument.
Graph BuildPairwiseDistance(int64_t n, int64_t m, int64_t d, Metric metric,
                            DType dtype);

// Same parameters; returns (distances [m,k], indices [m,k]) of the k nearest
// data points per query, nearest first, ties to the lower index.
Graph BuildKnn(int64_t n, int64_t m, int64_t d, int64_t k, Metric metric,
               DType dtype);

}  // namespace tb

#endif  // TENSORBUDGET_FRONTEND_H_
