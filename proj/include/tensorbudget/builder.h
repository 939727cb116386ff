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

#ifndef TENSORBUDGET_BUILDER_H_
#define TENSORBUDGET_BUILDER_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tensorbudget/ir.h"

namespace tb {

// Thin convenience layer over Graph::Add. Every call infers and checks the
// result type, so a Builder can only produce well-typed graphs.
class Builder {
 public:
  explicit Builder(std::string name = "main") : graph_(std::move(name)) {}
  explicit Builder(Graph graph) : graph_(std::move(graph)) {}

  Graph& graph() { return graph_; }
  const Type& type(InstrId id) const { return graph_.type(id); }
  const Shape& shape(InstrId id) const { return graph_.type(id).shape(); }
  DType dtype(InstrId id) const { return graph_.type(id).dtype(); }

  InstrId Parameter(int64_t index, DType dtype, Shape shape);
  // Tuple-typed parameter, used by While sub-graphs.
  InstrId TupleParameter(int64_t index, const Type& type);
  InstrId Constant(DType dtype, double value);
  InstrId ConstantArray(DType dtype, Shape shape, std::vector<double> values);
  // Scalar constant broadcast to `shape`.
  InstrId Full(DType dtype, double value, const Shape& shape);

  InstrId Unary(UnaryKind kind, InstrId x);
  InstrId Neg(InstrId x) { return Unary(UnaryKind::kNeg, x); }
  InstrId Exp(InstrId x) { return Unary(UnaryKind::kExp, x); }
  InstrId Abs(InstrId x) { return Unary(UnaryKind::kAbs, x); }
  InstrId Square(InstrId x) { return Unary(UnaryKind::kSquare, x); }
  InstrId Sqrt(InstrId x) { return Unary(UnaryKind::kSqrt, x); }
  InstrId Reciprocal(InstrId x) { return Unary(UnaryKind::kReciprocal, x); }

  InstrId Binary(BinaryKind kind, InstrId a, InstrId b);
  InstrId Add(InstrId a, InstrId b) { return Binary(BinaryKind::kAdd, a, b); }
  InstrId Sub(InstrId a, InstrId b) { return Binary(BinaryKind::kSub, a, b); }
  InstrId Mul(InstrId a, InstrId b) { return Binary(BinaryKind::kMul, a, b); }
  InstrId Div(InstrId a, InstrId b) { return Binary(BinaryKind::kDiv, a, b); }
  InstrId Pow(InstrId a, InstrId b) { return Binary(BinaryKind::kPow, a, b); }
  InstrId Max(InstrId a, InstrId b) { return Binary(BinaryKind::kMax, a, b); }
  InstrId Min(InstrId a, InstrId b) { return Binary(BinaryKind::kMin, a, b); }
  InstrId LessThan(InstrId a, InstrId b) {
    return Binary(BinaryKind::kLessThan, a, b);
  }
  InstrId Equal(InstrId a, InstrId b) {
    return Binary(BinaryKind::kEqual, a, b);
  }

  InstrId Broadcast(InstrId x, Shape shape, std::vector<int64_t> mapped_dims);
  InstrId ReduceSum(InstrId x, std::vector<int64_t> dims);
  InstrId ReduceMax(InstrId x, std::vector<int64_t> dims);
  InstrId Dot(InstrId lhs, InstrId rhs, DotOp dims);
  // Plain matrix product contracting lhs' last dim with rhs' first dim.
  InstrId MatMul(InstrId lhs, InstrId rhs);
  InstrId Transpose(InstrId x, std::vector<int64_t> perm);
  InstrId Slice(InstrId x, std::vector<int64_t> starts,
                std::vector<int64_t> limits, std::vector<int64_t> strides);
  InstrId DynamicSlice(InstrId x, std::vector<InstrId> starts,
                       std::vector<int64_t> sizes);
  InstrId DynamicUpdateSlice(InstrId x, InstrId update,
                             std::vector<InstrId> starts);
  InstrId Concat(std::vector<InstrId> xs, int64_t dim);
  InstrId Iota(DType dtype, Shape shape, int64_t dim);
  InstrId TopK(InstrId x, int64_t k, int64_t dim, bool largest);
  InstrId TriangularSolve(InstrId a, InstrId b, bool lower);
  InstrId AddDiagonal(InstrId matrix, InstrId scalar);
  InstrId While(InstrId init, std::shared_ptr<const Graph> condition,
                std::shared_ptr<const Graph> body);
  InstrId Tuple(std::vector<InstrId> elements);
  InstrId GetTupleElement(InstrId tuple, int64_t index);

  Graph Build(InstrId root) &&;

 private:
  Graph graph_;
};

}  // namespace tb

#endif  // TENSORBUDGET_BUILDER_H_
