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

#include "tensorbudget/reorder.h"

#include <gtest/gtest.h>

#include <random>

#include "chain_oracle.h"
#include "tensorbudget/builder.h"
#include "tensorbudget/dump.h"
#include "tensorbudget/interpreter.h"
#include "test_util.h"

namespace tb {
namespace {

using ::tb::testing::AllParenthesizations;
using ::tb::testing::ChainGraph;
using ::tb::testing::OptimalParenthesization;
using ::tb::testing::RandomInputs;
using ::tb::testing::RelativeError;

Graph ABv(int64_t n) {
  Builder b;
  auto a = b.Parameter(0, DType::kF64, Shape({n, n}));
  auto bb = b.Parameter(1, DType::kF64, Shape({n, n}));
  auto v = b.Parameter(2, DType::kF64, Shape({n}));
  return std::move(b).Build(b.MatMul(b.MatMul(a, bb), v));
}

TEST(DetectChains, MatrixMatrixVector) {
  Graph g = ABv(8);
  auto chains = DetectChains(g);
  ASSERT_EQ(chains.size(), 1u);
  const MatmulChain& c = chains[0];
  EXPECT_EQ(c.factors, (std::vector<InstrId>{0, 1, 2}));
  EXPECT_TRUE(c.vector_tail);
  EXPECT_EQ(c.dims, (std::vector<int64_t>{8, 8, 8, 1}));
  EXPECT_EQ(c.root, g.root());
  EXPECT_EQ(c.source.ToString(), "((0 1) 2)");
}

TEST(DetectChains, SingleDotIsNoGain) {
  Builder b;
  auto a = b.Parameter(0, DType::kF64, Shape({3, 5}));
  auto c = b.Parameter(1, DType::kF64, Shape({5, 4}));
  Graph g = std::move(b).Build(b.MatMul(a, c));
  auto chains = DetectChains(g);
  ASSERT_EQ(chains.size(), 1u);
  EXPECT_EQ(chains[0].factors.size(), 2u);
  EXPECT_EQ(ReorderChain(chains[0]), chains[0].source);
  Graph r = g;
  EXPECT_EQ(ReorderPass(r), 0);
  EXPECT_EQ(Dump(r), Dump(g));
}

TEST(DetectChains, InteriorReuseBreaksChain) {
  Builder b;
  auto a = b.Parameter(0, DType::kF64, Shape({6, 6}));
  auto c = b.Parameter(1, DType::kF64, Shape({6, 6}));
  auto v = b.Parameter(2, DType::kF64, Shape({6}));
  auto ab = b.MatMul(a, c);
  auto abv = b.MatMul(ab, v);
  auto other = b.ReduceSum(ab, {1});
  Graph g = std::move(b).Build(b.Add(abv, other));
  for (const MatmulChain& chain : DetectChains(g)) {
    EXPECT_LT(chain.factors.size(), 3u);
  }
  Graph r = g;
  EXPECT_EQ(ReorderPass(r), 0);
}

TEST(DetectChains, NoDot) {
  Builder b;
  auto x = b.Parameter(0, DType::kF64, Shape({4}));
  Graph g = std::move(b).Build(b.Exp(x));
  EXPECT_TRUE(DetectChains(g).empty());
  Graph r = g;
  EXPECT_EQ(ReorderPass(r), 0);
  EXPECT_EQ(Dump(r), Dump(g));
}

TEST(DetectChains, LongChainFlattens) {
  Builder b;
  std::vector<InstrId> f;
  for (int i = 0; i < 4; ++i) {
    f.push_back(b.Parameter(i, DType::kF64, Shape({5, 5})));
  }
  auto v = b.Parameter(4, DType::kF64, Shape({5}));
  auto left = b.MatMul(b.MatMul(f[0], f[1]), f[2]);
  auto right = b.MatMul(f[3], v);
  Graph g = std::move(b).Build(b.MatMul(left, right));
  auto chains = DetectChains(g);
  ASSERT_EQ(chains.size(), 1u);
  EXPECT_EQ(chains[0].factors.size(), 5u);
  EXPECT_EQ(chains[0].source.ToString(), "(((0 1) 2) (3 4))");
}

TEST(ReorderChain, SquareMatricesThenVector) {
  Graph g = ABv(100);
  MatmulChain c = DetectChains(g).at(0);
  Parenthesization p = ReorderChain(c);
  EXPECT_EQ(p.ToString(), "(0 (1 2))");
  EXPECT_EQ(PeakIntermediateBytes(c, c.source), 100 * 100 * 8);
  EXPECT_EQ(PeakIntermediateBytes(c, p), 100 * 8);
}

TEST(ReorderChain, TieKeepsSource) {
  // Right-to-left is allowed by the dims but does not lower the peak.
  Builder b;
  auto a = b.Parameter(0, DType::kF64, Shape({2, 100}));
  auto c = b.Parameter(1, DType::kF64, Shape({100, 3}));
  auto v = b.Parameter(2, DType::kF64, Shape({3}));
  Graph g = std::move(b).Build(b.MatMul(b.MatMul(a, c), v));
  MatmulChain chain = DetectChains(g).at(0);
  EXPECT_EQ(ReorderChain(chain), chain.source);
}

TEST(ReorderPass, HandNumbers) {
  Graph g = ABv(2);
  std::vector<TensorValue> in{
      TensorValue::FromDoubles(DType::kF64, Shape({2, 2}),
                               std::vector<double>{1, 2, 3, 4}),
      TensorValue::FromDoubles(DType::kF64, Shape({2, 2}),
                               std::vector<double>{5, 6, 7, 8}),
      TensorValue::FromDoubles(DType::kF64, Shape({2}),
                               std::vector<double>{1, 1})};
  Graph r = g;
  EXPECT_EQ(ReorderPass(r), 1);
  for (const Graph* graph : {&g, &r}) {
    auto out = Evaluate(*graph, in).outputs.at(0).ToDoubles();
    EXPECT_EQ(out, (std::vector<double>{41, 93}));
  }
  // The rewritten graph never forms the 2x2 product.
  EXPECT_EQ(DetectChains(r).at(0).source.ToString(), "(0 (1 2))");
}

TEST(ReorderPass, LowersPeakMemory) {
  Graph g = ABv(200);
  Graph r = g;
  ReorderPass(r);
  EXPECT_LT(EstimatePeakMemory(r), EstimatePeakMemory(g));
}

TEST(ReorderPass, NestedChainsInTopologicalOrder) {
  // The outer chain uses the inner chain's root as a factor twice.
  Builder b;
  auto a = b.Parameter(0, DType::kF64, Shape({9, 9}));
  auto c = b.Parameter(1, DType::kF64, Shape({9, 9}));
  auto v = b.Parameter(2, DType::kF64, Shape({9}));
  auto inner = b.MatMul(b.MatMul(a, c), v);
  auto outer = b.MatMul(b.MatMul(a, a), inner);
  Graph g = std::move(b).Build(b.Add(outer, inner));
  Graph r = g;
  EXPECT_EQ(ReorderPass(r), 2);
  EXPECT_TRUE(Validate(r).empty());
  auto in = RandomInputs(g, 4);
  EXPECT_LE(RelativeError(Evaluate(r, in).outputs[0],
                          Evaluate(g, in).outputs[0]),
            1e-10);
}

TEST(ReorderProperties, MatchesDynamicProgrammingOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int64_t k = 3 + trial % 4;
    auto dims = ::tb::testing::RandomShrinkingTail(rng, k);
    Graph g = ChainGraph(dims, Parenthesization::LeftToRight(k));
    MatmulChain chain = DetectChains(g).at(0);
    ASSERT_EQ(chain.dims, dims);
    const Parenthesization h = ReorderChain(chain);
    const Parenthesization opt = OptimalParenthesization(dims);
    EXPECT_EQ(PeakIntermediateBytes(chain, h),
              PeakIntermediateBytes(chain, opt))
        << h.ToString() << " vs " << opt.ToString();
    auto in = RandomInputs(g, 100 + trial);
    const TensorValue want = Evaluate(g, in).outputs[0];
    for (const Parenthesization& p : AllParenthesizations(0, k)) {
      Graph alt = ChainGraph(dims, p);
      ASSERT_LE(RelativeError(Evaluate(alt, in).outputs[0], want), 1e-10)
          << p.ToString();
    }
  }
}

TEST(ReorderProperties, NeverRaisesPeak) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int64_t> dim(1, 40), len(2, 6);
  for (int trial = 0; trial < 300; ++trial) {
    const int64_t k = len(rng);
    std::vector<int64_t> dims;
    for (int64_t i = 0; i <= k; ++i) dims.push_back(dim(rng));
    const auto sources = AllParenthesizations(0, k);
    const Parenthesization& src =
        sources[static_cast<size_t>(trial) % sources.size()];
    Graph g = ChainGraph(dims, src);
    auto chains = DetectChains(g);
    ASSERT_FALSE(chains.empty());
    for (const MatmulChain& c : chains) {
      ASSERT_LE(PeakIntermediateBytes(c, ReorderChain(c)),
                PeakIntermediateBytes(c, c.source));
    }
    Graph r = g;
    ReorderPass(r);
    auto in = RandomInputs(g, trial);
    ASSERT_LE(RelativeError(Evaluate(r, in).outputs[0],
                            Evaluate(g, in).outputs[0]),
              1e-10);
  }
}

}  // namespace
}  // namespace tb
