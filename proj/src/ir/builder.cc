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

#include "tensorbudget/builder.h"

#include "tensorbudget/status.h"

namespace tb {

InstrId Builder::Parameter(int64_t index, DType dtype, Shape shape) {
  return graph_.Add(ParameterOp{index, Type(dtype, std::move(shape))});
}

InstrId Builder::TupleParameter(int64_t index, const Type& type) {
  return graph_.Add(ParameterOp{index, type});
}

InstrId Builder::Constant(DType dtype, double value) {
  return graph_.Add(ConstantOp{dtype, Shape{}, {value}});
}

InstrId Builder::ConstantArray(DType dtype, Shape shape,
                               std::vector<double> values) {
  return graph_.Add(ConstantOp{dtype, std::move(shape), std::move(values)});
}

InstrId Builder::Full(DType dtype, double value, const Shape& shape) {
  return Broadcast(Constant(dtype, value), shape, {});
}

InstrId Builder::Unary(UnaryKind kind, InstrId x) {
  return graph_.Add(UnaryOp{kind}, {x});
}

InstrId Builder::Binary(BinaryKind kind, InstrId a, InstrId b) {
  return graph_.Add(BinaryOp{kind}, {a, b});
}

InstrId Builder::Broadcast(InstrId x, Shape shape,
                           std::vector<int64_t> mapped_dims) {
  return graph_.Add(BroadcastOp{std::move(shape), std::move(mapped_dims)},
                    {x});
}

InstrId Builder::ReduceSum(InstrId x, std::vector<int64_t> dims) {
  return graph_.Add(ReduceOp{ReduceKind::kSum, std::move(dims)}, {x});
}

InstrId Builder::ReduceMax(InstrId x, std::vector<int64_t> dims) {
  return graph_.Add(ReduceOp{ReduceKind::kMax, std::move(dims)}, {x});
}

InstrId Builder::Dot(InstrId lhs, InstrId rhs, DotOp dims) {
  return graph_.Add(std::move(dims), {lhs, rhs});
}

InstrId Builder::MatMul(InstrId lhs, InstrId rhs) {
  const int64_t lhs_rank = shape(lhs).rank();
  if (lhs_rank < 1 || shape(rhs).rank() < 1) {
    throw Error(ErrorCode::kShapeMismatch, "matmul of a scalar");
  }
  return Dot(lhs, rhs, DotOp{{lhs_rank - 1}, {0}, {}, {}});
}

InstrId Builder::Transpose(InstrId x, std::vector<int64_t> perm) {
  return graph_.Add(TransposeOp{std::move(perm)}, {x});
}

InstrId Builder::Slice(InstrId x, std::vector<int64_t> starts,
                       std::vector<int64_t> limits,
                       std::vector<int64_t> strides) {
  return graph_.Add(
      SliceOp{std::move(starts), std::move(limits), std::move(strides)}, {x});
}

InstrId Builder::DynamicSlice(InstrId x, std::vector<InstrId> starts,
                              std::vector<int64_t> sizes) {
  std::vector<InstrId> operands{x};
  operands.insert(operands.end(), starts.begin(), starts.end());
  return graph_.Add(DynamicSliceOp{std::move(sizes)}, std::move(operands));
}

InstrId Builder::DynamicUpdateSlice(InstrId x, InstrId update,
                                    std::vector<InstrId> starts) {
  std::vector<InstrId> operands{x, update};
  operands.insert(operands.end(), starts.begin(), starts.end());
  return graph_.Add(DynamicUpdateSliceOp{}, std::move(operands));
}

InstrId Builder::Concat(std::vector<InstrId> xs, int64_t dim) {
  return graph_.Add(ConcatOp{dim}, std::move(xs));
}

InstrId Builder::Iota(DType dtype, Shape shape, int64_t dim) {
  return graph_.Add(IotaOp{dtype, std::move(shape), dim});
}

InstrId Builder::TopK(InstrId x, int64_t k, int64_t dim, bool largest) {
  return graph_.Add(TopKOp{k, dim, largest}, {x});
}

InstrId Builder::TriangularSolve(InstrId a, InstrId b, bool lower) {
  return graph_.Add(TriangularSolveOp{lower}, {a, b});
}

InstrId Builder::AddDiagonal(InstrId matrix, InstrId scalar) {
  return graph_.Add(AddDiagonalOp{}, {matrix, scalar});
}

InstrId Builder::While(InstrId init, std::shared_ptr<const Graph> condition,
                       std::shared_ptr<const Graph> body) {
  return graph_.Add(WhileOp{std::move(condition), std::move(body)}, {init});
}

InstrId Builder::Tuple(std::vector<InstrId> elements) {
  return graph_.Add(TupleOp{}, std::move(elements));
}

InstrId Builder::GetTupleElement(InstrId tuple, int64_t index) {
  return graph_.Add(GetTupleElementOp{index}, {tuple});
}

Graph Builder::Build(InstrId root) && {
  graph_.set_root(root);
  return std::move(graph_);
}

}  // namespace tb
