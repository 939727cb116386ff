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

#ifndef TENSORBUDGET_INTERPRETER_H_
#define TENSORBUDGET_INTERPRETER_H_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tensorbudget/ir.h"

namespace tb {

// Dense row-major tensor. F32 data is stored as float, F64 as double.
class TensorValue {
 public:
  TensorValue() = default;
  TensorValue(DType dtype, Shape shape);
  static TensorValue FromDoubles(DType dtype, Shape shape,
                                 std::span<const double> values);

  DType dtype() const { return dtype_; }
  const Shape& shape() const { return shape_; }
  int64_t size() const;

  double at(int64_t flat_index) const;
  void set(int64_t flat_index, double value);
  std::vector<double> ToDoubles() const;

  template <typename T>
  std::vector<T>& data() {
    return std::get<std::vector<T>>(data_);
  }
  template <typename T>
  const std::vector<T>& data() const {
    return std::get<std::vector<T>>(data_);
  }

 private:
  DType dtype_ = DType::kF64;
  Shape shape_;
  std::variant<std::vector<float>, std::vector<double>> data_;
};

struct MemoryEvent {
  enum class Kind { kAlloc, kFree };
  // Index into MemoryTrace::computations.
  int32_t computation = 0;
  InstrId instruction = -1;
  Kind kind = Kind::kAlloc;
  int64_t bytes = 0;
  int64_t live_after = 0;
};

struct MemoryTrace {
  std::vector<std::string> computations;
  std::vector<MemoryEvent> events;
  int64_t peak_live_bytes = 0;

  // Header "event,computation,instruction,kind,bytes,live_after".
  std::string ToCsv() const;
};

inline constexpr int64_t kUnlimitedBudget = std::numeric_limits<int64_t>::max();

struct EvaluationResult {
  // One entry per array leaf of the root (two for a TopK root).
  std::vector<TensorValue> outputs;
  MemoryTrace trace;
};

// Runs the graph in TopologicalOrder. Every buffer is released right after its
// last consumer; While bodies run iteratively and free their temporaries each
// trip. Throws BudgetExceeded when an allocation would push live bytes past
// `budget`, and Error(kShapeMismatch) when inputs do not match the parameters.
EvaluationResult Evaluate(const Graph& graph,
                          std::span<const TensorValue> inputs,
                          int64_t budget = kUnlimitedBudget);

// Replays Evaluate's schedule and allocation decisions without touching data.
// Loops must have a StaticTripCount.
int64_t EstimatePeakMemory(const Graph& graph);

}  // namespace tb

#endif  // TENSORBUDGET_INTERPRETER_H_
