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

#ifndef TENSORBUDGET_SHAPE_H_
#define TENSORBUDGET_SHAPE_H_

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace tb {

enum class DType { kF32, kF64 };

// Bytes per element: 4 for F32, 8 for F64.
int64_t ByteWidth(DType dtype);
std::string_view DTypeName(DType dtype);

// Dense dimension list. An empty list is a scalar.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<int64_t> dims);
  explicit Shape(std::vector<int64_t> dims);

  int64_t rank() const { return static_cast<int64_t>(dims_.size()); }
  int64_t dim(int64_t i) const { return dims_.at(static_cast<size_t>(i)); }
  const std::vector<int64_t>& dims() const { return dims_; }

  // Both throw Error(kOverflow) when the product does not fit in int64.
  int64_t ElementCount() const;
  int64_t ByteSize(DType dtype) const;

  // Copy with dimension `i` set to `extent`.
  Shape WithDim(int64_t i, int64_t extent) const;

  std::string ToString() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<int64_t> dims_;
};

// Array (dtype + shape) or a flat tuple of arrays.
class Type {
 public:
  Type() = default;
  Type(DType dtype, Shape shape)
      : dtype_(dtype), shape_(std::move(shape)) {}
  static Type Tuple(std::vector<Type> elements);

  bool IsTuple() const { return is_tuple_; }
  DType dtype() const;
  const Shape& shape() const;
  const std::vector<Type>& elements() const { return elements_; }

  // Sum over leaves for tuples.
  int64_t ByteSize() const;

  // "([4,3],f64)" for arrays, "(([],f64),([4],f64))" for tuples.
  std::string ToString() const;

  friend bool operator==(const Type&, const Type&) = default;

 private:
  bool is_tuple_ = false;
  DType dtype_ = DType::kF64;
  Shape shape_;
  std::vector<Type> elements_;
};

}  // namespace tb

#endif  // TENSORBUDGET_SHAPE_H_
