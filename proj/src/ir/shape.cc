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

#include "tensorbudget/shape.h"

#include <sstream>

#include "tensorbudget/status.h"

namespace tb {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch:
      return "ShapeMismatch";
    case ErrorCode::kAttributeOutOfRange:
      return "AttributeOutOfRange";
    case ErrorCode::kOverflow:
      return "Overflow";
    case ErrorCode::kCycleDetected:
      return "CycleDetected";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kBudgetExceeded:
      return "BudgetExceeded";
    case ErrorCode::kUnsplittableCandidate:
      return "UnsplittableCandidate";
    case ErrorCode::kPipelineInvariantViolation:
      return "PipelineInvariantViolation";
    case ErrorCode::kUnimplemented:
      return "Unimplemented";
    case ErrorCode::kInternal:
      return "Internal";
  }
  return "Unknown";
}

BudgetExceeded::BudgetExceeded(int64_t instruction, int64_t requested,
                               int64_t live, int64_t budget)
    : Error(ErrorCode::kBudgetExceeded,
            "BudgetExceeded: instruction %" + std::to_string(instruction) +
                " requested " + std::to_string(requested) + " bytes with " +
                std::to_string(live) + " live (budget " +
                std::to_string(budget) + ")"),
      instruction_(instruction),
      requested_(requested),
      live_(live),
      budget_(budget) {}

int64_t ByteWidth(DType dtype) { return dtype == DType::kF32 ? 4 : 8; }

std::string_view DTypeName(DType dtype) {
  return dtype == DType::kF32 ? "f32" : "f64";
}

Shape::Shape(std::initializer_list<int64_t> dims) : dims_(dims) {
  for (int64_t d : dims_) {
    if (d < 0) throw Error(ErrorCode::kInvalidArgument, "negative dimension");
  }
}

Shape::Shape(std::vector<int64_t> dims) : dims_(std::move(dims)) {
  for (int64_t d : dims_) {
    if (d < 0) throw Error(ErrorCode::kInvalidArgument, "negative dimension");
  }
}

int64_t Shape::ElementCount() const {
  int64_t count = 1;
  for (int64_t d : dims_) {
    if (__builtin_mul_overflow(count, d, &count)) {
      throw Error(ErrorCode::kOverflow,
                  "element count of " + ToString() + " overflows int64");
    }
  }
  return count;
}

int64_t Shape::ByteSize(DType dtype) const {
  int64_t bytes;
  if (__builtin_mul_overflow(ElementCount(), ByteWidth(dtype), &bytes)) {
    throw Error(ErrorCode::kOverflow,
                "byte size of " + ToString() + " overflows int64");
  }
  return bytes;
}

Shape Shape::WithDim(int64_t i, int64_t extent) const {
  std::vector<int64_t> dims = dims_;
  dims.at(static_cast<size_t>(i)) = extent;
  return Shape(std::move(dims));
}

std::string Shape::ToString() const {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << ',';
    os << dims_[i];
  }
  os << ']';
  return os.str();
}

Type Type::Tuple(std::vector<Type> elements) {
  Type t;
  t.is_tuple_ = true;
  t.elements_ = std::move(elements);
  return t;
}

DType Type::dtype() const {
  if (is_tuple_) throw Error(ErrorCode::kInternal, "dtype() of a tuple type");
  return dtype_;
}

const Shape& Type::shape() const {
  if (is_tuple_) throw Error(ErrorCode::kInternal, "shape() of a tuple type");
  return shape_;
}

int64_t Type::ByteSize() const {
  if (!is_tuple_) return shape_.ByteSize(dtype_);
  int64_t total = 0;
  for (const Type& e : elements_) {
    if (__builtin_add_overflow(total, e.ByteSize(), &total)) {
      throw Error(ErrorCode::kOverflow, "tuple byte size overflows int64");
    }
  }
  return total;
}

std::string Type::ToString() const {
  if (!is_tuple_) {
    return "(" + shape_.ToString() + "," + std::string(DTypeName(dtype_)) +
           ")";
  }
  std::string out = "(";
  for (size_t i = 0; i < elements_.size(); ++i) {
    if (i) out += ",";
    out += elements_[i].ToString();
  }
  return out + ")";
}

}  // namespace tb
