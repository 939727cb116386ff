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

#ifndef TENSORBUDGET_TOOLS_CLI_H_
#define TENSORBUDGET_TOOLS_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tensorbudget/frontend.h"
#include "tensorbudget/interpreter.h"
#include "tensorbudget/ir.h"
#include "tensorbudget/pass_framework.h"

namespace tb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

// "1GB" -> 10^9, "8MiB" -> 2^23, "512" -> 512. Suffixes B, KB, MB, GB, TB are
// decimal; KiB, MiB, GiB, TiB binary. A fraction is allowed when the result
// is a whole number of bytes. Throws Error(kInvalidArgument).
int64_t ParseSize(std::string_view text);

// Largest suffix that divides exactly, decimal first: 10^9 -> "1GB",
// 2^23 -> "8MiB", 1500 -> "1500B". ParseSize inverts it.
std::string FormatSize(int64_t bytes);

// Splits a TB_FLAGS value on whitespace.
std::vector<std::string> SplitFlags(std::string_view flags);

enum class Kind { kMvm, kKnn };

struct WorkloadParams {
  Kind kind = Kind::kMvm;
  int64_t n = 1024;
  int64_t m = 128;
  int64_t d = 3;
  int64_t k = 10;
  Metric metric = Metric::kL2;
  DType dtype = DType::kF64;
  KernelSpec kernel;
};

Graph BuildWorkload(const WorkloadParams& params);

// Uniform [-1, 1) values for every parameter, reproducible from `seed`.
std::vector<TensorValue> SeededInputs(const Graph& graph, uint64_t seed);

struct BenchOptions {
  WorkloadParams params;
  PassConfig config;
  bool passes = true;
  std::optional<int64_t> budget;
  int repeats = 1;
  uint64_t seed = 0;
  std::string trace_path;
};

inline constexpr std::string_view kBenchHeader =
    "kind,n,m,d,k,metric,dtype,passes,threshold,split_size,budget,repeat,"
    "status,peak_live_bytes,estimate_bytes,wall_time_s,queries_per_s,detail";

// Writes the header and one row per repeat. Budget overruns become
// "budget_exceeded" rows, or "unsplittable" rows when the pipeline reported
// tensors it could not split.
void RunBench(const BenchOptions& options, std::ostream& out);

struct VerifyOptions {
  WorkloadParams params;
  PassConfig config;
  int seeds = 10;
  uint64_t seed = 0;
};

// Returns true when every seed is within the dtype tolerance.
bool RunVerify(const VerifyOptions& options, std::ostream& out);

enum class Stage { kBefore, kAfter };

void RunDumpHlo(const WorkloadParams& params, const PassConfig& config,
                Stage stage, std::ostream& out);

// Full command line: `args` excludes the program name, `env_flags` is the
// TB_FLAGS value. Flags in `args` override those from the environment.
int Main(const std::vector<std::string>& args, std::string_view env_flags,
         std::ostream& out, std::ostream& err);

}  // namespace tb::cli

#endif  // TENSORBUDGET_TOOLS_CLI_H_
