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

#ifndef TENSORBUDGET_IR_H_
#define TENSORBUDGET_IR_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tensorbudget/shape.h"

namespace tb {

using InstrId = int64_t;

class Graph;

enum class UnaryKind { kNeg, kExp, kAbs, kSquare, kSqrt, kReciprocal };

// kLessThan and kEqual produce 1 or 0 in the operand dtype.
enum class BinaryKind {
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kMax,
  kMin,
  kLessThan,
  kEqual,
};

enum class ReduceKind { kSum, kMax };

// `type` is an array, or a tuple for While sub-graph parameters.
struct ParameterOp {
  int64_t index = 0;
  Type type;
};

// Dense data, stored as doubles and rounded to `dtype` on materialization.
struct ConstantOp {
  DType dtype = DType::kF64;
  Shape shape;
  std::vector<double> values;
};

struct UnaryOp {
  UnaryKind kind;
};

struct BinaryOp {
  BinaryKind kind;
};

// Operand dim i lands on result dim mapped_dims[i]; the rest are replicated.
struct BroadcastOp {
  Shape shape;
  std::vector<int64_t> mapped_dims;
};

struct ReduceOp {
  ReduceKind kind;
  std::vector<int64_t> dims;
};

// Result dims: batch dims, then lhs free dims, then rhs free dims.
struct DotOp {
  std::vector<int64_t> lhs_contracting;
  std::vector<int64_t> rhs_contracting;
  std::vector<int64_t> lhs_batch;
  std::vector<int64_t> rhs_batch;
};

// result.dim(i) == operand.dim(perm[i]).
struct TransposeOp {
  std::vector<int64_t> perm;
};

struct SliceOp {
  std::vector<int64_t> starts;
  std::vector<int64_t> limits;
  std::vector<int64_t> strides;
};

// Operands: tensor, then one scalar start index per dim. Starts are clamped
// so the window stays in bounds.
struct DynamicSliceOp {
  std::vector<int64_t> sizes;
};

// Operands: tensor, update, then one scalar start index per dim.
struct DynamicUpdateSliceOp {};

struct ConcatOp {
  int64_t dim = 0;
};

struct IotaOp {
  DType dtype = DType::kF64;
  Shape shape;
  int64_t dim = 0;
};

// Returns (values, indices). Indices are F64 and ties go to the lower index.
struct TopKOp {
  int64_t k = 1;
  int64_t dim = 0;
  bool largest = true;
};

// Solves a * x = b for x with a: [..., n, n] triangular, b: [..., n, r].
struct TriangularSolveOp {
  bool lower = true;
};

// matrix + scalar * I without materializing I. Operands: [n,n] matrix, scalar.
struct AddDiagonalOp {};

// Single tuple operand (counter, accumulators..., loop-invariant inputs...).
// Both sub-graphs take the tuple as parameter 0; the body returns the next
// tuple and the condition returns a nonzero scalar to continue.
struct WhileOp {
  std::shared_ptr<const Graph> condition;
  std::shared_ptr<const Graph> body;
};

struct TupleOp {};

struct GetTupleElementOp {
  int64_t index = 0;
};

using Op = std::variant<ParameterOp, ConstantOp, UnaryOp, BinaryOp,
                        BroadcastOp, ReduceOp, DotOp, TransposeOp, SliceOp,
                        DynamicSliceOp, DynamicUpdateSliceOp, ConcatOp, IotaOp,
                        TopKOp, TriangularSolveOp, AddDiagonalOp, WhileOp,
                        TupleOp, GetTupleElementOp>;

std::string_view UnaryKindName(UnaryKind kind);
std::string_view BinaryKindName(BinaryKind kind);
std::string_view ReduceKindName(ReduceKind kind);

// Lower-case opcode name used in dumps, e.g. "dot", "reduce_sum", "exp".
std::string OpName(const Op& op);

template <typename T>
bool Is(const Op& op) {
  return std::holds_alternative<T>(op);
}

struct Instruction {
  InstrId id = -1;
  Op op;
  std::vector<InstrId> operands;
  Type type;

  const Shape& shape() const { return type.shape(); }
  DType dtype() const { return type.dtype(); }
  // Throws Error(kOverflow) past int64.
  int64_t ByteSize() const { return type.ByteSize(); }
};

struct ParameterInfo {
  int64_t index;
  InstrId id;
  Type type;
};

struct Diagnostic {
  std::string computation;
  InstrId instruction = -1;
  std::string reason;
};

// SSA dataflow graph. Instructions live in an id-indexed store; ids only grow
// while a graph is edited and Canonicalized() renumbers them in topological
// order.
class Graph {
 public:
  explicit Graph(std::string name = "main") : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  // Appends an instruction with an inferred type. Throws on shape errors.
  InstrId Add(Op op, std::vector<InstrId> operands = {});
  // Appends an instruction with a caller-supplied type; nothing is checked.
  InstrId AddUnchecked(Op op, std::vector<InstrId> operands, Type type);

  bool Contains(InstrId id) const { return instrs_.contains(id); }
  const Instruction& instr(InstrId id) const;
  const Type& type(InstrId id) const { return instr(id).type; }

  InstrId root() const { return root_; }
  void set_root(InstrId id);

  size_t size() const { return instrs_.size(); }
  // Ascending ids.
  std::vector<InstrId> ids() const;
  // Sorted by parameter index.
  std::vector<ParameterInfo> parameters() const;
  // users[id] lists each user once, ascending.
  std::map<InstrId, std::vector<InstrId>> Users() const;

  void SetOperand(InstrId id, int64_t operand_index, InstrId new_operand);
  void ReplaceAllUsesWith(InstrId from, InstrId to);
  // Drops instructions not reachable from the root. Parameters stay.
  void RemoveDeadCode();
  // Copy with ids renumbered 0.. in topological order.
  Graph Canonicalized() const;

 private:
  std::string name_;
  std::map<InstrId, Instruction> instrs_;
  InstrId next_id_ = 0;
  InstrId root_ = -1;
};

// Deterministic Kahn order over instructions reachable from the root; among
// ready instructions the lowest id goes first. Throws Error(kCycleDetected).
std::vector<InstrId> TopologicalOrder(const Graph& graph);

// Same, but over every instruction in the graph.
std::vector<InstrId> TopologicalOrderAll(const Graph& graph);

// Shape inference for one instruction given its operand types.
Type InferShape(const Op& op, std::span<const Type> operand_types);

// Empty result means the graph is well formed. Never mutates.
std::vector<Diagnostic> Validate(const Graph& graph);

// Trip count of a counter loop built as
//   init tuple element 0 = constant c0, body advances it by constant 1,
//   condition = lt(gte(param, 0), constant limit).
// Returns nullopt when the loop does not have that shape.
std::optional<int64_t> StaticTripCount(const Graph& graph, InstrId while_id);

// Largest array byte size among the graph's own instructions (not While
// sub-graphs).
int64_t MaxArrayByteSize(const Graph& graph);

}  // namespace tb

#endif  // TENSORBUDGET_IR_H_
