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

#include "tensorbudget/frontend.h"

#include <algorithm>
#include <cctype>
#include <string>

#include "tensorbudget/builder.h"
#include "tensorbudget/status.h"

namespace tb {
namespace {

void RequirePositive(int64_t v, const char* what) {
  if (v < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must be >= 1, got " + std::to_string(v));
  }
}

InstrId Distances(Builder& b, InstrId data, InstrId queries, int64_t n,
                  int64_t m, int64_t d, Metric metric, DType dtype) {
  if (metric == Metric::kCosine) {
    InstrId dots = b.Dot(queries, data, DotOp{{1}, {1}, {}, {}});
    InstrId qn = b.Sqrt(b.ReduceSum(b.Square(queries), {1}));
    InstrId xn = b.Sqrt(b.ReduceSum(b.Square(data), {1}));
    InstrId denom = b.Mul(b.Broadcast(qn, Shape{m, n}, {0}),
                          b.Broadcast(xn, Shape{m, n}, {1}));
    InstrId ratio = b.Div(dots, denom);
    return b.Sub(b.Full(dtype, 1.0, Shape{m, n}), ratio);
  }
  const Shape cube{m, n, d};
  InstrId diff = b.Sub(b.Broadcast(queries, cube, {0, 2}),
                       b.Broadcast(data, cube, {1, 2}));
  InstrId term = metric == Metric::kL2 ? b.Square(diff) : b.Abs(diff);
  return b.ReduceSum(term, {2});
}

}  // namespace

std::string_view MetricName(Metric metric) {
  switch (metric) {
    case Metric::kL2:
      return "l2";
    case Metric::kL1:
      return "l1";
    case Metric::kCosine:
      return "cosine";
  }
  return "?";
}

Metric ParseMetric(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "l2") return Metric::kL2;
  if (s == "l1") return Metric::kL1;
  if (s == "cosine") return Metric::kCosine;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown metric '" + std::string(name) + "'");
}

Graph BuildKernelMvm(int64_t n, const KernelSpec& spec, DType dtype) {
  RequirePositive(n, "n");
  if (!(spec.variance > 0) || !(spec.lengthscale > 0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel variance and lengthscale must be positive");
  }
  Builder b("kernel_mvm");
  InstrId x = b.Parameter(0, dtype, Shape{n});
  InstrId y = b.Parameter(1, dtype, Shape{n});
  InstrId v = b.Parameter(2, dtype, Shape{n});
  const Shape nn{n, n};
  InstrId diff = b.Sub(b.Broadcast(x, nn, {0}), b.Broadcast(y, nn, {1}));
  InstrId sq = b.Square(diff);
  const double scale = -0.5 / (spec.lengthscale * spec.lengthscale);
  InstrId e = b.Exp(b.Mul(sq, b.Full(dtype, scale, nn)));
  InstrId k = b.Mul(e, b.Full(dtype, spec.variance, nn));
  return std::move(b).Build(b.MatMul(k, v));
}

Graph BuildPairwiseDistance(int64_t n, int64_t m, int64_t d, Metric metric,
                            DType dtype) {
  RequirePositive(n, "n");
  RequirePositive(m, "m");
  RequirePositive(d, "d");
  Builder b(std::string("pairwise_") + std::string(MetricName(metric)));
  InstrId data = b.Parameter(0, dtype, Shape{n, d});
  InstrId queries = b.Parameter(1, dtype, Shape{m, d});
  return std::move(b).Build(Distances(b, data, queries, n, m, d, metric, dtype));
}

Graph BuildKnn(int64_t n, int64_t m, int64_t d, int64_t k, Metric metric,
               DType dtype) {
  RequirePositive(n, "n");
  RequirePositive(m, "m");
  RequirePositive(d, "d");
  if (k < 1 || k > n) {
    throw Error(ErrorCode::kInvalidArgument,
                "k must be in [1, n], got " + std::to_string(k));
  }
  Builder b(std::string("knn_") + std::string(MetricName(metric)));
  InstrId data = b.Parameter(0, dtype, Shape{n, d});
  InstrId queries = b.Parameter(1, dtype, Shape{m, d});
  InstrId dist = Distances(b, data, queries, n, m, d, metric, dtype);
  return std::move(b).Build(b.TopK(dist, k, 1, /*largest=*/false));
}

}  // namespace tb
