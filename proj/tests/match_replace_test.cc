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

#include "tensorbudget/match_replace.h"

#include <gtest/gtest.h>

#include <random>

#include "tensorbudget/builder.h"
#include "tensorbudget/dump.h"
#include "tensorbudget/frontend.h"
#include "tensorbudget/interpreter.h"
#include "test_util.h"

namespace tb {
namespace {

using ::tb::testing::RandomInputs;
using ::tb::testing::RelativeError;

TensorValue Vec(std::vector<double> v, Shape s) {
  return TensorValue::FromDoubles(DType::kF64, std::move(s), v);
}

// Naive squared distance between rows of x [n,d] and y [m,d] as [n,m].
Graph NaiveDistance(int64_t n, int64_t m, int64_t d, bool with_sqrt = false,
                    bool mul_form = false) {
  Builder b;
  auto x = b.Parameter(0, DType::kF64, Shape({n, d}));
  auto y = b.Parameter(1, DType::kF64, Shape({m, d}));
  auto bx = b.Broadcast(x, Shape({n, m, d}), {0, 2});
  auto by = b.Broadcast(y, Shape({n, m, d}), {1, 2});
  auto diff = b.Sub(bx, by);
  auto sq = mul_form ? b.Mul(diff, diff) : b.Square(diff);
  auto r = b.ReduceSum(sq, {2});
  return std::move(b).Build(with_sqrt ? b.Sqrt(r) : r);
}

int MaxRank(const Graph& g) {
  int64_t r = 0;
  for (InstrId id : g.ids()) {
    if (!g.type(id).IsTuple()) r = std::max(r, g.instr(id).shape().rank());
  }
  return static_cast<int>(r);
}

TEST(Euclidean, ThreeFourFive) {
  Graph g = NaiveDistance(1, 1, 2);
  Graph r = g;
  EXPECT_EQ(RewriteEuclideanDistance(r), 1);
  std::vector<TensorValue> in{Vec({0, 0}, {1, 2}),
                              Vec({3, 4}, {1, 2})};
  EXPECT_EQ(Evaluate(r, in).outputs[0].at(0), 25.0);
  EXPECT_EQ(Evaluate(g, in).outputs[0].at(0), 25.0);
}

TEST(Euclidean, RandomSmallMatchesNaive) {
  Graph g = NaiveDistance(4, 3, 2);
  Graph r = g;
  RewriteEuclideanDistance(r);
  EXPECT_EQ(r.type(r.root()), g.type(g.root()));
  for (int seed = 0; seed < 20; ++seed) {
    auto in = RandomInputs(g, seed);
    const TensorValue want = Evaluate(g, in).outputs[0];
    const TensorValue got = Evaluate(r, in).outputs[0];
    for (int64_t i = 0; i < want.size(); ++i) {
      ASSERT_NEAR(got.at(i), want.at(i), 1e-12);
    }
  }
}

TEST(Euclidean, LargestIntermediateShrinks) {
  Graph g = NaiveDistance(1000, 1000, 1000);
  EXPECT_EQ(MaxArrayByteSize(g), int64_t{8} * 1'000'000'000);
  RewriteEuclideanDistance(g);
  EXPECT_EQ(MaxArrayByteSize(g), int64_t{8} * 1'000'000);
  EXPECT_LE(MaxRank(g), 2);
}

TEST(Euclidean, ClampOnlyBeforeSqrt) {
  auto count_max = [](const Graph& g) {
    int n = 0;
    for (InstrId id : g.ids()) {
      const auto* b = std::get_if<BinaryOp>(&g.instr(id).op);
      n += b != nullptr && b->kind == BinaryKind::kMax;
    }
    return n;
  };
  Graph plain = NaiveDistance(5, 6, 3);
  Graph rooted = NaiveDistance(5, 6, 3, true);
  RewriteEuclideanDistance(plain);
  RewriteEuclideanDistance(rooted);
  EXPECT_EQ(count_max(plain), 0);
  EXPECT_EQ(count_max(rooted), 1);
  // Identical points give exact zeros instead of NaN from a tiny negative.
  Graph ref = NaiveDistance(5, 6, 3, true);
  std::mt19937_64 rng(9);
  auto x = ::tb::testing::RandomTensor(DType::kF64, Shape({5, 3}), rng, -1e3,
                                       1e3);
  TensorValue y(DType::kF64, Shape({6, 3}));
  for (int64_t i = 0; i < y.size(); ++i) y.set(i, x.at(i % x.size()));
  std::vector<TensorValue> in{x, y};
  const TensorValue got = Evaluate(rooted, in).outputs[0];
  for (int64_t i = 0; i < got.size(); ++i) ASSERT_FALSE(std::isnan(got.at(i)));
}

TEST(Euclidean, FrontendL2Rewrites) {
  Graph g = BuildPairwiseDistance(30, 20, 5, Metric::kL2, DType::kF64);
  Graph r = g;
  EXPECT_GE(MatchReplacePass(r), 1);
  EXPECT_LE(MaxRank(r), 2);
  for (int seed = 0; seed < 10; ++seed) {
    auto in = RandomInputs(g, seed);
    EXPECT_LE(RelativeError(Evaluate(r, in).outputs[0],
                            Evaluate(g, in).outputs[0]),
              1e-12);
  }
}

TEST(Euclidean, OtherMetricsUntouched) {
  for (Metric m : {Metric::kL1, Metric::kCosine}) {
    Graph g = BuildPairwiseDistance(6, 4, 3, m, DType::kF64);
    Graph r = g;
    MatchReplacePass(r);
    EXPECT_EQ(MaxArrayByteSize(r), MaxArrayByteSize(g)) << MetricName(m);
  }
}

TEST(Euclidean, HundredSeedsWithinRelative1e9) {
  Graph g = NaiveDistance(12, 9, 4);
  Graph r = g;
  RewriteEuclideanDistance(r);
  for (int seed = 0; seed < 100; ++seed) {
    // Row norms stay at or below 1e3.
    auto in = RandomInputs(g, 500 + seed, -400, 400);
    ASSERT_LE(RelativeError(Evaluate(r, in).outputs[0],
                            Evaluate(g, in).outputs[0]),
              1e-9)
        << "seed " << seed;
  }
}

TEST(Euclidean, MulFormNeedsCanonicalization) {
  Graph g = NaiveDistance(6, 4, 3, false, true);
  Graph direct = g;
  EXPECT_EQ(RewriteEuclideanDistance(direct), 0);
  Graph pass = g;
  EXPECT_EQ(MatchReplacePass(pass), 2);
  EXPECT_LE(MaxRank(pass), 2);
}

TEST(Euclidean, NoMatchLeavesGraphAlone) {
  Builder b;
  auto x = b.Parameter(0, DType::kF64, Shape({3, 4}));
  auto y = b.Parameter(1, DType::kF64, Shape({3, 4}));
  Graph g = std::move(b).Build(b.ReduceSum(b.Square(b.Sub(x, y)), {1}));
  Graph r = g;
  EXPECT_EQ(RewriteEuclideanDistance(r), 0);
  EXPECT_EQ(Dump(r), Dump(g));
}

Graph NaiveAddDiagonal(int64_t rows, int64_t cols) {
  Builder b;
  auto m = b.Parameter(0, DType::kF64, Shape({rows, cols}));
  auto s = b.Parameter(1, DType::kF64, Shape({}));
  auto eye = b.Equal(b.Iota(DType::kF64, Shape({rows, cols}), 0),
                     b.Iota(DType::kF64, Shape({rows, cols}), 1));
  auto scaled = b.Mul(b.Broadcast(s, Shape({rows, cols}), {}), eye);
  return std::move(b).Build(b.Add(m, scaled));
}

TEST(AddDiagonal, ByHand) {
  Graph g = NaiveAddDiagonal(2, 2);
  EXPECT_EQ(RewriteAddDiagonal(g), 1);
  bool fused = false;
  for (InstrId id : g.ids()) {
    fused |= Is<AddDiagonalOp>(g.instr(id).op);
    EXPECT_FALSE(Is<IotaOp>(g.instr(id).op));
  }
  EXPECT_TRUE(fused);
  std::vector<TensorValue> in{
      Vec({1, 2, 3, 4}, {2, 2}),
      Vec({10}, {})};
  const TensorValue out = Evaluate(g, in).outputs[0];
  EXPECT_EQ(out.at(0), 11);
  EXPECT_EQ(out.at(1), 2);
  EXPECT_EQ(out.at(2), 3);
  EXPECT_EQ(out.at(3), 14);
}

TEST(AddDiagonal, RandomMatchesNaive) {
  Graph g = NaiveAddDiagonal(50, 50);
  Graph r = g;
  RewriteAddDiagonal(r);
  for (int seed = 0; seed < 100; ++seed) {
    auto in = RandomInputs(g, seed);
    ASSERT_LE(RelativeError(Evaluate(r, in).outputs[0],
                            Evaluate(g, in).outputs[0]),
              1e-14);
  }
}

TEST(AddDiagonal, NonSquareDoesNotFire) {
  Graph g = NaiveAddDiagonal(3, 4);
  Graph r = g;
  EXPECT_EQ(RewriteAddDiagonal(r), 0);
  EXPECT_EQ(Dump(r), Dump(g));
}

TEST(Canonicalize, SquareAndSubtract) {
  Builder b;
  auto x = b.Parameter(0, DType::kF64, Shape({4}));
  auto y = b.Parameter(1, DType::kF64, Shape({4}));
  auto e = b.Add(b.Mul(x, x), b.Neg(y));
  Graph g = std::move(b).Build(e);
  Graph r = g;
  EXPECT_EQ(Canonicalize(r), 2);
  int squares = 0, subs = 0;
  for (InstrId id : r.ids()) {
    const Op& op = r.instr(id).op;
    if (const auto* u = std::get_if<UnaryOp>(&op)) {
      squares += u->kind == UnaryKind::kSquare;
    }
    if (const auto* bo = std::get_if<BinaryOp>(&op)) {
      subs += bo->kind == BinaryKind::kSub;
    }
  }
  EXPECT_EQ(squares, 1);
  EXPECT_EQ(subs, 1);
  for (int seed = 0; seed < 10; ++seed) {
    auto in = RandomInputs(g, seed);
    EXPECT_EQ(RelativeError(Evaluate(r, in).outputs[0],
                            Evaluate(g, in).outputs[0]),
              0.0);
  }
}

TEST(MatchReplacePass, PreservesValueOverSeeds) {
  std::vector<Graph> graphs{NaiveDistance(7, 5, 3, false, true),
                            NaiveDistance(7, 5, 3, true, true),
                            NaiveAddDiagonal(6, 6),
                            BuildKernelMvm(20, {}, DType::kF64)};
  for (const Graph& g : graphs) {
    Graph r = g;
    MatchReplacePass(r);
    EXPECT_TRUE(Validate(r).empty());
    EXPECT_EQ(r.type(r.root()), g.type(g.root()));
    for (int seed = 0; seed < 100; ++seed) {
      auto in = RandomInputs(g, seed, 0.1, 2.0);
      ASSERT_LE(RelativeError(Evaluate(r, in).outputs[0],
                              Evaluate(g, in).outputs[0]),
                1e-10);
    }
  }
}

}  // namespace
}  // namespace tb
