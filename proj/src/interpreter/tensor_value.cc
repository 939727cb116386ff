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

#include <sstream>

#include "tensorbudget/interpreter.h"
#include "tensorbudget/status.h"

namespace tb {

TensorValue::TensorValue(DType dtype, Shape shape)
    : dtype_(dtype), shape_(std::move(shape)) {
  const auto n = static_cast<size_t>(shape_.ElementCount());
  if (dtype_ == DType::kF32) {
    data_ = std::vector<float>(n);
  } else {
    data_ = std::vector<double>(n);
  }
}

TensorValue TensorValue::FromDoubles(DType dtype, Shape shape,
                                     std::span<const double> values) {
  TensorValue t(dtype, std::move(shape));
  if (static_cast<int64_t>(values.size()) != t.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "expected " + std::to_string(t.size()) + " values for " +
                    t.shape().ToString() + ", got " +
                    std::to_string(values.size()));
  }
  for (int64_t i = 0; i < t.size(); ++i) {
    t.set(i, values[static_cast<size_t>(i)]);
  }
  return t;
}

int64_t TensorValue::size() const {
  return std::visit([](const auto& v) { return static_cast<int64_t>(v.size()); },
                    data_);
}

double TensorValue::at(int64_t i) const {
  return std::visit(
      [i](const auto& v) { return static_cast<double>(v.at(static_cast<size_t>(i))); },
      data_);
}

void TensorValue::set(int64_t i, double value) {
  std::visit(
      [i, value](auto& v) {
        using T = typename std::decay_t<decltype(v)>::value_type;
        v.at(static_cast<size_t>(i)) = static_cast<T>(value);
      },
      data_);
}

std::vector<double> TensorValue::ToDoubles() const {
  return std::visit(
      [](const auto& v) { return std::vector<double>(v.begin(), v.end()); },
      data_);
}

std::string MemoryTrace::ToCsv() const {
  std::ostringstream os;
  os << "event,computation,instruction,kind,bytes,live_after\n";
  for (size_t i = 0; i < events.size(); ++i) {
    const MemoryEvent& e = events[i];
    os << i << ',' << computations.at(static_cast<size_t>(e.computation))
       << ',' << e.instruction << ','
       << (e.kind == MemoryEvent::Kind::kAlloc ? "alloc" : "free") << ','
       << e.bytes << ',' << e.live_after << '\n';
  }
  return os.str();
}

}  // namespace tb
