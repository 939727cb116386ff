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

#include "cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "tensorbudget/dump.h"
#include "tensorbudget/interpreter.h"
#include "tensorbudget/status.h"

namespace tb::cli {
namespace {

struct Unit {
  std::string_view suffix;
  int64_t bytes;
};

constexpr std::array<Unit, 4> kDecimal{{{"TB", 1'000'000'000'000},
                                        {"GB", 1'000'000'000},
                                        {"MB", 1'000'000},
                                        {"KB", 1'000}}};
constexpr std::array<Unit, 4> kBinary{{{"TiB", int64_t{1} << 40},
                                       {"GiB", int64_t{1} << 30},
                                       {"MiB", int64_t{1} << 20},
                                       {"KiB", int64_t{1} << 10}}};

[[noreturn]] void BadSize(std::string_view text, std::string_view why) {
  throw Error(ErrorCode::kInvalidArgument,
              "malformed size '" + std::string(text) + "': " + std::string(why));
}

Kind ParseKind(const std::string& s) {
  if (s == "mvm") return Kind::kMvm;
  if (s == "knn") return Kind::kKnn;
  throw Error(ErrorCode::kInvalidArgument, "unknown workload '" + s + "'");
}

std::string_view KindName(Kind k) { return k == Kind::kMvm ? "mvm" : "knn"; }

DType ParseDType(const std::string& s) {
  if (s == "f64") return DType::kF64;
  if (s == "f32") return DType::kF32;
  throw Error(ErrorCode::kInvalidArgument, "unknown dtype '" + s + "'");
}

std::string CsvSafe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// Registers workload flags on `sub`; strings are resolved after parsing.
struct WorkloadFlags {
  std::string kind;
  std::string metric = "l2";
  std::string dtype = "f64";
  WorkloadParams params;

  void Attach(CLI::App* sub) {
    sub->add_option("kind", kind, "mvm or knn")->required();
    sub->add_option("-n", params.n, "data points / kernel size");
    sub->add_option("-m", params.m, "queries (knn)");
    sub->add_option("-d", params.d, "feature dim (knn)");
    sub->add_option("-k", params.k, "neighbours (knn)");
    sub->add_option("--metric", metric, "l2, l1 or cosine");
    sub->add_option("--dtype", dtype, "f64 or f32");
    sub->add_option("--variance", params.kernel.variance);
    sub->add_option("--lengthscale", params.kernel.lengthscale);
  }

  WorkloadParams Resolve() const {
    WorkloadParams p = params;
    p.kind = ParseKind(kind);
    p.metric = ParseMetric(metric);
    p.dtype = ParseDType(dtype);
    return p;
  }
};

}  // namespace

int64_t ParseSize(std::string_view text) {
  size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
    ++i;
  }
  size_t end = text.size();
  while (end > i && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
    --end;
  }
  std::string_view body = text.substr(i, end - i);
  size_t digits = 0;
  while (digits < body.size() &&
         (std::isdigit(static_cast<unsigned char>(body[digits])) ||
          body[digits] == '.')) {
    ++digits;
  }
  std::string_view number = body.substr(0, digits);
  std::string_view suffix = body.substr(digits);
  if (number.empty()) BadSize(text, "expected a number");
  if (std::count(number.begin(), number.end(), '.') > 1 ||
      number.front() == '.' || number.back() == '.') {
    BadSize(text, "bad number");
  }
  int64_t unit = 0;
  if (suffix.empty() || suffix == "B") unit = 1;
  for (const auto& table : {kDecimal, kBinary}) {
    for (const Unit& u : table) {
      if (suffix == u.suffix) unit = u.bytes;
    }
  }
  if (unit == 0) BadSize(text, "unknown suffix");

  __int128 mantissa = 0, scale = 1;
  bool fraction = false;
  for (char c : number) {
    if (c == '.') {
      fraction = true;
      continue;
    }
    mantissa = mantissa * 10 + (c - '0');
    if (fraction) scale *= 10;
    if (mantissa > (__int128{1} << 100)) BadSize(text, "too large");
  }
  const __int128 total = mantissa * unit;
  if (total % scale != 0) BadSize(text, "not a whole number of bytes");
  const __int128 bytes = total / scale;
  if (bytes > std::numeric_limits<int64_t>::max()) BadSize(text, "too large");
  return static_cast<int64_t>(bytes);
}

std::string FormatSize(int64_t bytes) {
  if (bytes > 0) {
    for (const auto& table : {kDecimal, kBinary}) {
      for (const Unit& u : table) {
        if (bytes % u.bytes == 0) {
          return std::to_string(bytes / u.bytes) + std::string(u.suffix);
        }
      }
    }
  }
  return std::to_string(bytes) + "B";
}

std::vector<std::string> SplitFlags(std::string_view flags) {
  std::vector<std::string> out;
  std::istringstream in{std::string(flags)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

Graph BuildWorkload(const WorkloadParams& p) {
  if (p.kind == Kind::kMvm) return BuildKernelMvm(p.n, p.kernel, p.dtype);
  return BuildKnn(p.n, p.m, p.d, p.k, p.metric, p.dtype);
}

std::vector<TensorValue> SeededInputs(const Graph& graph, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<TensorValue> inputs;
  for (const ParameterInfo& p : graph.parameters()) {
    TensorValue t(p.type.dtype(), p.type.shape());
    for (int64_t i = 0; i < t.size(); ++i) t.set(i, dist(rng));
    inputs.push_back(std::move(t));
  }
  return inputs;
}

void RunBench(const BenchOptions& o, std::ostream& out) {
  const WorkloadParams& p = o.params;
  Graph graph = BuildWorkload(p);
  std::vector<Diagnostic> diags;
  if (o.passes) graph = RunPipeline(graph, o.config, &diags);
  const std::vector<TensorValue> inputs = SeededInputs(graph, o.seed);
  const int64_t estimate = EstimatePeakMemory(graph);
  const bool knn = p.kind == Kind::kKnn;

  out << kBenchHeader << "\n";
  for (int r = 0; r < o.repeats; ++r) {
    std::string status = "ok", detail, peak, wall, qps;
    const auto start = std::chrono::steady_clock::now();
    try {
      EvaluationResult res =
          Evaluate(graph, inputs, o.budget.value_or(kUnlimitedBudget));
      const double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
      peak = std::to_string(res.trace.peak_live_bytes);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6f", secs);
      wall = buf;
      if (knn && secs > 0) {
        std::snprintf(buf, sizeof(buf), "%.3f",
                      static_cast<double>(p.m) / secs);
        qps = buf;
      }
      if (!o.trace_path.empty() && r + 1 == o.repeats) {
        std::ofstream(o.trace_path) << res.trace.ToCsv();
      }
      if (!diags.empty()) {
        detail = std::to_string(diags.size()) + " oversized tensors kept";
      }
    } catch (const BudgetExceeded& e) {
      status = diags.empty() ? "budget_exceeded" : "unsplittable";
      detail = e.what();
      if (!diags.empty()) detail += "; " + diags.front().reason;
    }
    out << KindName(p.kind) << "," << p.n << "," << (knn ? p.m : 0) << ","
        << (knn ? p.d : 0) << "," << (knn ? p.k : 0) << ","
        << (knn ? MetricName(p.metric) : "") << ","
        << (p.dtype == DType::kF64 ? "f64" : "f32") << ","
        << (o.passes ? "on" : "off") << "," << o.config.tensor_size_threshold
        << "," << o.config.split_size() << ","
        << (o.budget ? std::to_string(*o.budget) : "") << "," << r << ","
        << status << "," << peak << "," << estimate << "," << wall << ","
        << qps << "," << CsvSafe(detail) << "\n";
  }
}

bool RunVerify(const VerifyOptions& o, std::ostream& out) {
  const Graph original = BuildWorkload(o.params);
  std::vector<Diagnostic> diags;
  const Graph transformed = RunPipeline(original, o.config, &diags);
  const double tol = o.params.dtype == DType::kF64 ? 1e-10 : 1e-4;
  int loops = 0;
  for (InstrId id : transformed.ids()) {
    loops += Is<WhileOp>(transformed.instr(id).op);
  }
  out << "graph " << original.name() << ": " << original.size() << " -> "
      << transformed.size() << " instructions, " << loops << " loops, max "
      << FormatSize(MaxArrayByteSize(original)) << " -> "
      << FormatSize(MaxArrayByteSize(transformed)) << "\n";
  for (const Diagnostic& d : diags) out << "diagnostic: " << d.reason << "\n";
  double worst = 0;
  for (int s = 0; s < o.seeds; ++s) {
    const uint64_t seed = o.seed + static_cast<uint64_t>(s);
    auto inputs = SeededInputs(original, seed);
    auto want = Evaluate(original, inputs).outputs;
    auto got = Evaluate(transformed, inputs).outputs;
    // Values only: kNN indices may legitimately swap on exact ties.
    double err = 0, scale = 0;
    const TensorValue& a = got.at(0);
    const TensorValue& b = want.at(0);
    for (int64_t i = 0; i < b.size(); ++i) {
      err = std::max(err, std::abs(a.at(i) - b.at(i)));
      scale = std::max(scale, std::abs(b.at(i)));
    }
    const double rel = scale > 0 ? err / scale : err;
    worst = std::max(worst, rel);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "seed %llu max_rel_err %.3e\n",
                  static_cast<unsigned long long>(seed), rel);
    out << buf;
  }
  const bool ok = worst <= tol;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s max_rel_err %.3e tol %.0e\n",
                ok ? "PASS" : "FAIL", worst, tol);
  out << buf;
  return ok;
}

void RunDumpHlo(const WorkloadParams& params, const PassConfig& config,
                Stage stage, std::ostream& out) {
  Graph g = BuildWorkload(params);
  if (stage == Stage::kAfter) g = RunPipeline(g, config);
  out << Dump(g);
}

int Main(const std::vector<std::string>& args, std::string_view env_flags,
         std::ostream& out, std::ostream& err) {
  CLI::App app{"Memory-budgeted tensor graph compiler", "tensorbudget"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string threshold, split;
  bool no_mr = false, no_reorder = false, no_split = false;
  app.add_option("--tensor-size-threshold", threshold,
                 "split tensors above this size (default 1GB)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--tensor-split-size", split,
                 "largest slice per loop step (default: threshold)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_flag("--no-match-replace", no_mr);
  app.add_flag("--no-reorder", no_reorder);
  app.add_flag("--no-split", no_split);

  CLI::App* bench = app.add_subcommand("bench", "time and measure one workload");
  WorkloadFlags bench_w;
  bench_w.Attach(bench);
  bool no_passes = false;
  std::string budget, trace;
  int repeats = 1;
  uint64_t bench_seed = 0;
  bench->add_flag("--no-passes", no_passes, "evaluate the unoptimized graph");
  bench->add_option("--budget", budget, "memory budget, e.g. 256MiB");
  bench->add_option("--repeats", repeats)->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_seed);
  bench->add_option("--trace", trace, "write the last memory trace as CSV");

  CLI::App* verify =
      app.add_subcommand("verify", "compare original and optimized outputs");
  WorkloadFlags verify_w;
  verify_w.Attach(verify);
  int seeds = 10;
  uint64_t verify_seed = 0;
  verify->add_option("--seeds", seeds)->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_seed);

  CLI::App* dump = app.add_subcommand("dump-hlo", "print the graph");
  WorkloadFlags dump_w;
  dump_w.Attach(dump);
  std::string stage = "after";
  dump->add_option("--stage", stage, "before or after")
      ->check(CLI::IsMember({"before", "after"}));

  std::vector<std::string> all = SplitFlags(env_flags);
  all.insert(all.end(), args.begin(), args.end());
  std::reverse(all.begin(), all.end());
  try {
    app.parse(all);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  PassConfig config;
  try {
    if (!threshold.empty()) config.tensor_size_threshold = ParseSize(threshold);
    if (!split.empty()) config.tensor_split_size = ParseSize(split);
    config.enable_match_replace = !no_mr;
    config.enable_reorder = !no_reorder;
    config.enable_split = !no_split;
    config.Check();
  } catch (const Error& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (bench->parsed()) {
      BenchOptions o;
      o.params = bench_w.Resolve();
      o.config = config;
      o.passes = !no_passes;
      if (!budget.empty()) o.budget = ParseSize(budget);
      o.repeats = repeats;
      o.seed = bench_seed;
      o.trace_path = trace;
      RunBench(o, out);
      return kExitOk;
    }
    if (verify->parsed()) {
      VerifyOptions o;
      o.params = verify_w.Resolve();
      o.config = config;
      o.seeds = seeds;
      o.seed = verify_seed;
      return RunVerify(o, out) ? kExitOk : kExitVerifyFailed;
    }
    RunDumpHlo(dump_w.Resolve(), config,
               stage == "before" ? Stage::kBefore : Stage::kAfter, out);
    return kExitOk;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) {
      err << "usage error: " << e.what() << "\n";
      return kExitUsage;
    }
    err << "error: " << e.what() << "\n";
    return kExitVerifyFailed;
  }
}

}  // namespace tb::cli
