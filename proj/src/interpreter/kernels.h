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

#ifndef TENSORBUDGET_SRC_INTERPRETER_KERNELS_H_
#define TENSORBUDGET_SRC_INTERPRETER_KERNELS_H_

#include <vector>

#include "tensorbudget/interpreter.h"
#include "tensorbudget/ir.h"

// Reference kernels. Every kernel writes into a preallocated `out` whose
// dtype and shape already match the instruction's type.
namespace tb::kernels {

void Constant(const ConstantOp& op, TensorValue& out);
void Iota(const IotaOp& op, TensorValue& out);
void Unary(UnaryKind kind, const TensorValue& x, TensorValue& out);
void Binary(BinaryKind kind, const TensorValue& a, const TensorValue& b,
            TensorValue& out);
void Broadcast(const BroadcastOp& op, const TensorValue& x, TensorValue& out);
void Reduce(const ReduceOp& op, const TensorValue& x, TensorValue& out);
void Dot(const DotOp& op, const TensorValue& lhs, const TensorValue& rhs,
         TensorValue& out);
void Transpose(const TransposeOp& op, const TensorValue& x, TensorValue& out);
void Slice(const SliceOp& op, const TensorValue& x, TensorValue& out);
// `starts` must already be clamped into range.
void DynamicSlice(const std::vector<int64_t>& starts, const TensorValue& x,
                  TensorValue& out);
void DynamicUpdateSlice(const std::vector<int64_t>& starts,
                        const TensorValue& update, TensorValue& inout);
void Concat(int64_t dim, const std::vector<const TensorValue*>& xs,
            TensorValue& out);
void TopK(const TopKOp& op, const TensorValue& x, TensorValue& values,
          TensorValue& indices);
void TriangularSolve(bool lower, const TensorValue& a, const TensorValue& b,
                     TensorValue& out);
void AddDiagonal(const TensorValue& m, const TensorValue& s, TensorValue& out);
void Copy(const TensorValue& x, TensorValue& out);

}  // namespace tb::kernels

#endif  // TENSORBUDGET_SRC_INTERPRETER_KERNELS_H_
