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

#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "tensorbudget/builder.h"
#include "tensorbudget/dump.h"
#include "tensorbudget/frontend.h"
#include "tensorbudget/interpreter.h"
#include "tensorbudget/status.h"
#include "test_util.h"

namespace tb {
namespace {

using ::tb::testing::MaxRelativeError;
using ::tb::testing::RandomInputs;
using ::tb::testing::Tolerance;

PassConfig Config(int64_t threshold, std::optional<int64_t> split = {}) {
  PassConfig c;
  c.tensor_size_threshold = threshold;
  c.tensor_split_size = split;
  return c;
}

bool HasWhile(const Graph& g) {
  for (InstrId id : g.ids()) {
    if (Is<WhileOp>(g.instr(id).op)) return true;
  }
  return false;
}

int64_t SubThresholdBytes(const Graph& g, int64_t threshold) {
  int64_t s = 0;
  for (InstrId id : g.ids()) {
    const Type& t = g.type(id);
    if (!t.IsTuple() && t.ByteSize() <= threshold) s += t.ByteSize();
  }
  return s;
}

TEST(PassConfig, Defaults) {
  PassConfig c;
  EXPECT_EQ(c.tensor_size_threshold, 1'000'000'000);
  EXPECT_EQ(c.split_size(), c.tensor_size_threshold);
  EXPECT_NO_THROW(c.Check());
  c.tensor_split_size = 500'000'000;
  EXPECT_EQ(c.split_size(), 500'000'000);
  EXPECT_NO_THROW(c.Check());
}

TEST(PassConfig, SplitAboveThresholdRejected) {
  PassConfig c = Config(1'000'000'000, 2'000'000'000);
  try {
    c.Check();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  EXPECT_THROW(Config(0).Check(), Error);
  EXPECT_THROW(Config(100, 0).Check(), Error);
}

TEST(RunPipeline, AllDisabledIsIdentity) {
  Graph g = BuildKnn(50, 10, 4, 3, Metric::kL2, DType::kF64);
  PassConfig c = Config(100);
  c.enable_match_replace = c.enable_reorder = c.enable_split = false;
  Graph out = RunPipeline(g, c);
  EXPECT_EQ(Dump(out), Dump(g));
}

TEST(RunPipeline, RejectsInvalidInput) {
  Graph g;
  g.Add(ParameterOp{0, Type(DType::kF64, Shape({2}))});
  EXPECT_THROW(RunPipeline(g, PassConfig{}), Error);
}

TEST(RunPipeline, KnnAtHundredMegabytes) {
  Graph g = BuildKnn(100'000, 1000, 16, 10, Metric::kL2, DType::kF64);
  PassConfig c = Config(100'000'000);
  std::vector<Diagnostic> diags;
  Graph out = RunPipeline(g, c, &diags);
  EXPECT_TRUE(HasWhile(out));
  EXPECT_LE(MaxArrayByteSize(out), c.tensor_size_threshold);
  EXPECT_TRUE(diags.empty());
  for (InstrId id : out.ids()) {
    if (const auto* w = std::get_if<WhileOp>(&out.instr(id).op)) {
      EXPECT_LE(MaxArrayByteSize(*w->body), c.tensor_size_threshold);
    }
  }
}

TEST(RunPipeline, KernelMvmSplitsOnce) {
  Graph g = BuildKernelMvm(16384, {}, DType::kF64);
  Graph out = RunPipeline(g, Config(64 << 20));
  int loops = 0;
  for (InstrId id : out.ids()) loops += Is<WhileOp>(out.instr(id).op);
  EXPECT_EQ(loops, 1);
}

TEST(RunPipeline, Idempotent) {
  std::vector<std::pair<Graph, PassConfig>> cases;
  cases.emplace_back(BuildKnn(300, 40, 4, 5, Metric::kL2, DType::kF64),
                     Config(20'000));
  cases.emplace_back(BuildKnn(300, 40, 4, 5, Metric::kL1, DType::kF64),
                     Config(20'000, 10'000));
  cases.emplace_back(BuildKernelMvm(500, {}, DType::kF64), Config(100'000));
  cases.emplace_back(BuildPairwiseDistance(60, 50, 8, Metric::kCosine,
                                           DType::kF32),
                     Config(4000));
  for (auto& [g, c] : cases) {
    Graph once = RunPipeline(g, c);
    Graph twice = RunPipeline(once, c);
    EXPECT_EQ(Dump(twice), Dump(once));
  }
}

TEST(RunPipeline, DistanceWithinFourMegabytes) {
  Graph g = BuildPairwiseDistance(100, 100, 100, Metric::kL2, DType::kF64);
  auto inputs = RandomInputs(g, 3);
  try {
    Evaluate(g, inputs, 1'000'000);
    FAIL() << "unoptimized graph should not fit";
  } catch (const BudgetExceeded&) {
  }
  PassConfig c = Config(512 * 1024);
  Graph out = RunPipeline(g, c);
  auto r = Evaluate(out, inputs, 4'000'000);
  const int64_t bound = c.tensor_size_threshold + 4 * c.split_size() +
                        SubThresholdBytes(out, c.tensor_size_threshold);
  EXPECT_LE(r.trace.peak_live_bytes, bound);
  EXPECT_LE(MaxRelativeError(r.outputs, Evaluate(g, inputs).outputs), 1e-10);
}

TEST(RunPipeline, OrderMattersForDistance) {
  // Without the rewrite the split pass has to loop over the [m,n,d] cube.
  Graph g = BuildPairwiseDistance(64, 64, 32, Metric::kL2, DType::kF64);
  PassConfig c = Config(40'000);
  PassConfig no_mr = c;
  no_mr.enable_match_replace = false;
  Graph with = RunPipeline(g, c);
  Graph without = RunPipeline(g, no_mr);
  EXPECT_TRUE(HasWhile(without));
  EXPECT_FALSE(HasWhile(with));
  auto inputs = RandomInputs(g, 8);
  auto want = Evaluate(g, inputs).outputs;
  EXPECT_LE(MaxRelativeError(Evaluate(with, inputs).outputs, want), 1e-10);
  EXPECT_LE(MaxRelativeError(Evaluate(without, inputs).outputs, want), 1e-10);
}

TEST(RunPipeline, ReordersChainFragmentsLeftBySplit) {
  // The split remainder holds slice(A)[6,21] . B[21,18] . C[18,3], which is
  // cheaper right to left; a single pass sequence would leave it for the
  // next run.
  Builder b;
  std::vector<int64_t> dims{33, 21, 18, 3, 6, 45};
  InstrId acc = b.Parameter(0, DType::kF32, Shape({dims[0], dims[1]}));
  for (int64_t i = 1; i + 1 < static_cast<int64_t>(dims.size()); ++i) {
    acc = b.MatMul(acc, b.Parameter(i, DType::kF32, Shape({dims[i], dims[i + 1]})));
  }
  Graph g = std::move(b).Build(acc);
  PassConfig c = Config(1980);
  Graph once = RunPipeline(g, c);
  EXPECT_TRUE(HasWhile(once));
  EXPECT_EQ(Dump(RunPipeline(once, c)), Dump(once));
  auto inputs = RandomInputs(g, 1);
  EXPECT_LE(MaxRelativeError(Evaluate(once, inputs).outputs,
                             Evaluate(g, inputs).outputs),
            Tolerance(DType::kF32));
}

struct Case {
  std::string name;
  std::function<Graph(std::mt19937_64&, DType)> build;
};

std::vector<Case> Builders() {
  auto dim = [](std::mt19937_64& r, int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(r);
  };
  std::vector<Case> cases;
  cases.push_back({"mvm", [=](std::mt19937_64& r, DType t) {
                     return BuildKernelMvm(dim(r, 2, 64), {1.3, 0.8}, t);
                   }});
  for (Metric m : {Metric::kL2, Metric::kL1, Metric::kCosine}) {
    cases.push_back({"knn_" + std::string(MetricName(m)),
                     [=](std::mt19937_64& r, DType t) {
                       const int64_t n = dim(r, 2, 64);
                       return BuildKnn(n, dim(r, 1, 64), dim(r, 1, 16),
                                       dim(r, 1, n), m, t);
                     }});
  }
  cases.push_back({"chain", [=](std::mt19937_64& r, DType t) {
                     Builder b;
                     const int64_t n = dim(r, 2, 40);
                     auto a = b.Parameter(0, t, Shape({n, n}));
                     auto c = b.Parameter(1, t, Shape({n, n}));
                     auto v = b.Parameter(2, t, Shape({n}));
                     return std::move(b).Build(
                         b.MatMul(b.MatMul(a, c), v));
                   }});
  return cases;
}

TEST(RunPipeline, PreservesValuesOnRandomGraphs) {
  for (const Case& c : Builders()) {
    for (DType dtype : {DType::kF64, DType::kF32}) {
      std::mt19937_64 rng(17);
      int looped = 0;
      for (int trial = 0; trial < 20; ++trial) {
        Graph g = c.build(rng, dtype);
        // Aim the threshold below the largest tensor left after rewriting.
        PassConfig probe;
        probe.enable_split = false;
        const int64_t biggest = MaxArrayByteSize(RunPipeline(g, probe));
        PassConfig cfg = Config(std::max<int64_t>(biggest / 3, 64));
        Graph out = RunPipeline(g, cfg);
        ASSERT_TRUE(Validate(out).empty());
        looped += HasWhile(out);
        auto inputs = RandomInputs(g, 900 + trial, 0.1, 1.0);
        auto want = Evaluate(g, inputs).outputs;
        auto got = Evaluate(out, inputs).outputs;
        ASSERT_LE(MaxRelativeError({got.begin(), got.begin() + 1},
                                   {want.begin(), want.begin() + 1}),
                  Tolerance(dtype))
            << c.name << " trial " << trial;
      }
      if (c.name != "chain") EXPECT_GT(looped, 10) << c.name;
    }
  }
}

TEST(RunPipeline, DiagnosticsForUnsplittable) {
  Builder b;
  auto x = b.Parameter(0, DType::kF64, Shape({}));
  auto big = b.Exp(b.Broadcast(x, Shape({20, 20}), {}));
  Graph g = std::move(b).Build(b.ReduceSum(big, {0, 1}));
  std::vector<Diagnostic> diags;
  Graph out = RunPipeline(g, Config(100), &diags);
  EXPECT_FALSE(diags.empty());
  EXPECT_FALSE(HasWhile(out));
}

}  // namespace
}  // namespace tb
