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

// Acceptance checks. Prints one line per criterion and exits non-zero when
// any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "chain_oracle.h"
#include "tensorbudget/builder.h"
#include "tensorbudget/dump.h"
#include "tensorbudget/frontend.h"
#include "tensorbudget/interpreter.h"
#include "tensorbudget/match_replace.h"
#include "tensorbudget/pass_framework.h"
#include "tensorbudget/reorder.h"
#include "tensorbudget/split.h"
#include "tensorbudget/status.h"
#include "test_util.h"

namespace tb {
namespace {

using testing::MaxRelativeError;
using testing::RandomInputs;
using testing::RelativeError;

constexpr double kTolF64 = 1e-10;
constexpr double kTolF32 = 1e-4;
constexpr int64_t kMiB = int64_t{1} << 20;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void Note(const std::string& what) {
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

PassConfig Config(int64_t threshold) {
  PassConfig c;
  c.tensor_size_threshold = threshold;
  return c;
}

int Loops(const Graph& g) {
  int n = 0;
  for (InstrId id : g.ids()) n += Is<WhileOp>(g.instr(id).op);
  return n;
}

// Sum of top-level array tensors at or below the threshold.
int64_t Residual(const Graph& g, int64_t threshold) {
  int64_t s = 0;
  for (InstrId id : g.ids()) {
    const Type& t = g.type(id);
    if (!t.IsTuple() && t.ByteSize() <= threshold) s += t.ByteSize();
  }
  return s;
}

int64_t Bound(const Graph& g, const PassConfig& c) {
  return c.tensor_size_threshold + 4 * c.split_size() +
         Residual(g, c.tensor_size_threshold);
}

Outcome ChunkArithmetic() {
  Outcome o;
  const int64_t n = 1'000'000;
  Graph g = BuildKernelMvm(n, {}, DType::kF64);
  const int64_t matrix = n * n * 8;
  o.Require(MaxArrayByteSize(g) == matrix, "largest tensor is the kernel matrix");
  const int64_t estimate = EstimatePeakMemory(g);
  o.Require(estimate >= matrix, "estimate covers the 8e12-byte matrix");
  o.Note("matrix " + std::to_string(matrix) + " B, estimate " +
         std::to_string(estimate) + " B");
  const PassConfig c = Config(1'000'000'000);
  auto cand = FindCandidate(g, g.root(), c);
  o.Require(cand.has_value(), "kernel dot is a split candidate");
  if (!cand) return o;
  SplitPlan p = PlanSplit(g, *cand, c);
  o.Require(p.split_size == 125, "125 rows per chunk");
  o.Require(p.slice_bytes == 1'000'000'000, "1e9 bytes per chunk");
  o.Require(p.trip_count == 8000 && p.remainder == 0, "8000 full chunks");
  o.Note("split_size " + std::to_string(p.split_size) + ", chunk " +
         std::to_string(p.slice_bytes) + " B, trips " +
         std::to_string(p.trip_count));
  return o;
}

std::vector<double> DirectMvm(const std::vector<TensorValue>& in) {
  const auto& x = in[0].data<double>();
  const auto& y = in[1].data<double>();
  const auto& v = in[2].data<double>();
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double acc = 0;
    for (size_t j = 0; j < y.size(); ++j) {
      const double d = x[i] - y[j];
      acc += std::exp(-0.5 * d * d) * v[j];
    }
    out[i] = acc;
  }
  return out;
}

Outcome MemoryControl() {
  Outcome o;
  for (int64_t n : {4096, 8192, 16384}) {
    Graph g = BuildKernelMvm(n, {}, DType::kF64);
    auto inputs = RandomInputs(g, static_cast<uint64_t>(n));
    const int64_t dense = n * n * 8;
    o.Require(MaxArrayByteSize(g) == dense,
              "n=" + std::to_string(n) + " dense matrix is n^2*8");
    o.Require(EstimatePeakMemory(g) >= dense,
              "n=" + std::to_string(n) + " unoptimized peak >= n^2*8");
    std::vector<TensorValue> unsplit;
    if (n == 4096) {
      auto r = Evaluate(g, inputs);
      o.Require(r.trace.peak_live_bytes >= dense,
                "n=4096 measured unoptimized peak >= n^2*8");
      o.Note("n=4096 unoptimized peak " +
             std::to_string(r.trace.peak_live_bytes));
      unsplit = r.outputs;
    }
    TensorValue direct = TensorValue::FromDoubles(DType::kF64, Shape({n}),
                                                  DirectMvm(inputs));
    for (int64_t t : {16 * kMiB, 64 * kMiB}) {
      const PassConfig c = Config(t);
      Graph out = RunPipeline(g, c);
      const int64_t bound = Bound(out, c);
      const std::string tag =
          "n=" + std::to_string(n) + " t=" + std::to_string(t / kMiB) + "MiB";
      try {
        auto r = Evaluate(out, inputs, bound);
        o.Require(r.trace.peak_live_bytes <= bound, tag + " peak within bound");
        if (!unsplit.empty()) {
          const double err = MaxRelativeError(r.outputs, unsplit);
          o.Require(err <= kTolF64, tag + " matches unsplit oracle");
        }
        const double err = RelativeError(r.outputs.at(0), direct);
        o.Require(err <= kTolF64, tag + " matches direct summation");
        o.Note(tag + " peak " + std::to_string(r.trace.peak_live_bytes) +
               " <= " + std::to_string(bound) + ", err " + Fmt("%.1e", err));
      } catch (const BudgetExceeded& e) {
        o.Require(false, tag + " " + e.what());
      }
    }
  }
  return o;
}

// k nearest by (q - x)^2, ties to the lower index.
std::vector<int64_t> BruteForceKnn(const TensorValue& data,
                                   const TensorValue& queries, int64_t q,
                                   int64_t k) {
  const int64_t n = data.shape().dims()[0], d = data.shape().dims()[1];
  const auto& xs = data.data<double>();
  const auto& qs = queries.data<double>();
  std::vector<std::pair<double, int64_t>> dist(n);
  for (int64_t i = 0; i < n; ++i) {
    double s = 0;
    for (int64_t j = 0; j < d; ++j) {
      const double diff = qs[q * d + j] - xs[i * d + j];
      s += diff * diff;
    }
    dist[i] = {s, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  std::vector<int64_t> out;
  for (int64_t i = 0; i < k; ++i) out.push_back(dist[i].second);
  return out;
}

Outcome OomEmulation() {
  Outcome o;
  const int64_t n = 100'000, m = 1000, d = 16, k = 10;
  const int64_t budget = 256 * kMiB;
  Graph g = BuildKnn(n, m, d, k, Metric::kL2, DType::kF64);
  auto inputs = RandomInputs(g, 2024);
  try {
    Evaluate(g, inputs, budget);
    o.Require(false, "unoptimized graph should exceed 256MiB");
  } catch (const BudgetExceeded& e) {
    o.Note("without passes: " + std::string(e.what()));
  }
  const PassConfig c = Config(64 * kMiB);
  std::vector<Diagnostic> diags;
  Graph out = RunPipeline(g, c, &diags);
  o.Require(diags.empty(), "nothing left oversized");
  try {
    auto r = Evaluate(out, inputs, budget);
    o.Note("with passes: peak " + std::to_string(r.trace.peak_live_bytes) +
           ", " + std::to_string(Loops(out)) + " loop(s)");
    const TensorValue& idx = r.outputs.at(1);
    int mismatches = 0;
    for (int64_t q = 0; q < 100; ++q) {
      auto want = BruteForceKnn(inputs[0], inputs[1], q, k);
      for (int64_t j = 0; j < k; ++j) {
        mismatches += static_cast<int64_t>(idx.at(q * k + j)) != want[j];
      }
    }
    o.Require(mismatches == 0, "indices match brute force on 100 queries");
    o.Note(std::to_string(mismatches) + " index mismatches on 100 queries");
  } catch (const BudgetExceeded& e) {
    o.Require(false, std::string("with passes: ") + e.what());
  }
  return o;
}

struct RandomBuilder {
  std::string name;
  std::function<Graph(std::mt19937_64&, DType)> build;
};

std::vector<RandomBuilder> RandomBuilders() {
  auto dim = [](std::mt19937_64& r, int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(r);
  };
  std::vector<RandomBuilder> out;
  out.push_back({"kernel_mvm", [=](std::mt19937_64& r, DType t) {
                   return BuildKernelMvm(dim(r, 2, 64), {1.3, 0.8}, t);
                 }});
  for (Metric m : {Metric::kL2, Metric::kL1, Metric::kCosine}) {
    const std::string name(MetricName(m));
    out.push_back({"pairwise_" + name, [=](std::mt19937_64& r, DType t) {
                     return BuildPairwiseDistance(dim(r, 1, 64), dim(r, 1, 64),
                                                  dim(r, 1, 64), m, t);
                   }});
    out.push_back({"knn_" + name, [=](std::mt19937_64& r, DType t) {
                     const int64_t n = dim(r, 2, 64);
                     return BuildKnn(n, dim(r, 1, 64), dim(r, 1, 64),
                                     dim(r, 1, n), m, t);
                   }});
  }
  out.push_back({"matmul_chain", [=](std::mt19937_64& r, DType t) {
                   const int64_t k = dim(r, 2, 5);
                   std::vector<int64_t> dims;
                   for (int64_t i = 0; i < k; ++i) dims.push_back(dim(r, 2, 64));
                   dims.push_back(dim(r, 0, 1) ? 1 : dim(r, 2, 64));
                   return testing::ChainGraph(
                       dims, Parenthesization::LeftToRight(k), t);
                 }});
  return out;
}

Outcome PassCorrectness() {
  Outcome o;
  constexpr int kTrials = 100;
  for (const RandomBuilder& b : RandomBuilders()) {
    for (DType dtype : {DType::kF64, DType::kF32}) {
      std::mt19937_64 rng(std::hash<std::string>{}(b.name) ^
                          static_cast<uint64_t>(dtype));
      const double tol = dtype == DType::kF64 ? kTolF64 : kTolF32;
      int failures = 0, not_idempotent = 0, looped = 0;
      double worst = 0;
      for (int trial = 0; trial < kTrials; ++trial) {
        Graph g = b.build(rng, dtype);
        PassConfig probe;
        probe.enable_split = false;
        const int64_t biggest = MaxArrayByteSize(RunPipeline(g, probe));
        const PassConfig c = Config(std::max<int64_t>(biggest / 3, 64));
        Graph once = RunPipeline(g, c);
        Graph twice = RunPipeline(once, c);
        not_idempotent += Dump(once) != Dump(twice);
        looped += Loops(once) > 0;
        // Positive inputs keep cosine away from zero-norm rows.
        auto inputs = RandomInputs(g, 7000 + trial, 0.1, 1.0);
        auto want = Evaluate(g, inputs).outputs;
        auto got = Evaluate(once, inputs).outputs;
        // Values only; kNN indices may swap on exact ties.
        const double err = RelativeError(got.at(0), want.at(0));
        worst = std::max(worst, err);
        failures += !(err <= tol);
      }
      const std::string tag =
          b.name + (dtype == DType::kF64 ? "/f64" : "/f32");
      o.Require(failures == 0, tag + " values (" + std::to_string(failures) +
                                   " over tolerance)");
      o.Require(not_idempotent == 0, tag + " idempotence");
      o.Note(tag + " worst " + Fmt("%.1e", worst) + ", " +
             std::to_string(looped) + "/" + std::to_string(kTrials) + " split");
    }
  }
  return o;
}

Outcome ReorderOptimality() {
  Outcome o;
  std::mt19937_64 rng(11);
  int peak_mismatch = 0, value_mismatch = 0, reordered = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int64_t k = 3 + trial % 4;
    auto dims = testing::RandomShrinkingTail(rng, k);
    Graph g = testing::ChainGraph(dims, Parenthesization::LeftToRight(k));
    MatmulChain chain = DetectChains(g).at(0);
    const Parenthesization h = ReorderChain(chain);
    reordered += !(h == chain.source);
    peak_mismatch +=
        PeakIntermediateBytes(chain, h) !=
        PeakIntermediateBytes(chain, testing::OptimalParenthesization(dims));
    auto in = RandomInputs(g, 100 + trial);
    const TensorValue want = Evaluate(g, in).outputs[0];
    for (const Parenthesization& p : testing::AllParenthesizations(0, k)) {
      Graph alt = testing::ChainGraph(dims, p);
      value_mismatch += !(RelativeError(Evaluate(alt, in).outputs[0], want) <=
                          kTolF64);
    }
  }
  o.Require(peak_mismatch == 0, "heuristic peak equals DP peak");
  o.Require(value_mismatch == 0, "all parenthesizations agree");
  o.Note("50 chains, " + std::to_string(reordered) + " reordered, " +
         std::to_string(peak_mismatch) + " peak mismatches");
  return o;
}

Outcome MatchReplaceSizes() {
  Outcome o;
  const int64_t n = 128;
  Graph g = BuildPairwiseDistance(n, n, n, Metric::kL2, DType::kF64);
  const int64_t before = MaxArrayByteSize(g) / 8;
  Graph r = g;
  const int rewrites = MatchReplacePass(r);
  const int64_t after = MaxArrayByteSize(r) / 8;
  o.Require(rewrites > 0, "pattern matched");
  o.Require(before == n * n * n, "before: n*m*d elements");
  o.Require(after == n * n, "after: n*m elements");
  o.Note(std::to_string(before) + " -> " + std::to_string(after) +
         " elements");
  return o;
}

}  // namespace
}  // namespace tb

int main() {
  struct Criterion {
    const char* name;
    tb::Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"1 chunk arithmetic for n=1e6 at 1GB", tb::ChunkArithmetic},
      {"2 kernel MVM memory control", tb::MemoryControl},
      {"3 kNN under a 256MiB budget", tb::OomEmulation},
      {"4 pipeline correctness on random graphs", tb::PassCorrectness},
      {"5 chain reorder vs DP oracle", tb::ReorderOptimality},
      {"6 distance rewrite intermediate size", tb::MatchReplaceSizes},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    tb::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.Require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    std::printf("[%s] %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", c.name,
                secs, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf(
      "[N/A ] 7 throughput and wall-clock figures, GP regression results: "
      "hardware dependent, not reproduced; covered by 2-4 instead\n");
  return failed == 0 ? 0 : 1;
}
