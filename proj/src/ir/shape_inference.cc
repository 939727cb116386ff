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

#include <algorithm>
#include <set>
#include <sstream>

#include "tensorbudget/ir.h"
#include "tensorbudget/status.h"

namespace tb {
namespace {

constexpr int64_t kMaxConstantBytes = int64_t{1} << 20;

[[noreturn]] void Mismatch(const std::string& what) {
  throw Error(ErrorCode::kShapeMismatch, what);
}

[[noreturn]] void OutOfRange(const std::string& what) {
  throw Error(ErrorCode::kAttributeOutOfRange, what);
}

std::string DimsString(const std::vector<int64_t>& dims) {
  std::ostringstream os;
  os << '{';
  for (size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << '}';
  return os.str();
}

void ExpectArity(std::string_view op, std::span<const Type> operands,
                 size_t arity) {
  if (operands.size() != arity) {
    Mismatch(std::string(op) + " expects " + std::to_string(arity) +
             " operands, got " + std::to_string(operands.size()));
  }
}

const Type& ExpectArray(std::string_view op, const Type& t) {
  if (t.IsTuple()) Mismatch(std::string(op) + " operand must be an array");
  return t;
}

void ExpectScalar(std::string_view op, const Type& t) {
  if (t.IsTuple() || t.shape().rank() != 0) {
    Mismatch(std::string(op) + " start index must be a scalar, got " +
             t.ToString());
  }
}

// Checks dims are unique and inside [0, rank).
void CheckDimList(std::string_view what, const std::vector<int64_t>& dims,
                  int64_t rank) {
  std::set<int64_t> seen;
  for (int64_t d : dims) {
    if (d < 0 || d >= rank || !seen.insert(d).second) {
      OutOfRange(std::string(what) + " " + DimsString(dims) +
                 " invalid for rank " + std::to_string(rank));
    }
  }
}

Type InferDot(const DotOp& dot, const Type& lhs, const Type& rhs) {
  if (lhs.dtype() != rhs.dtype()) Mismatch("dot operand dtypes differ");
  const Shape& ls = lhs.shape();
  const Shape& rs = rhs.shape();
  if (dot.lhs_contracting.size() != dot.rhs_contracting.size()) {
    Mismatch("dot contracting dim counts differ");
  }
  if (dot.lhs_batch.size() != dot.rhs_batch.size()) {
    Mismatch("dot batch dim counts differ");
  }
  std::vector<int64_t> lhs_used = dot.lhs_contracting;
  lhs_used.insert(lhs_used.end(), dot.lhs_batch.begin(), dot.lhs_batch.end());
  std::vector<int64_t> rhs_used = dot.rhs_contracting;
  rhs_used.insert(rhs_used.end(), dot.rhs_batch.begin(), dot.rhs_batch.end());
  CheckDimList("dot lhs dims", lhs_used, ls.rank());
  CheckDimList("dot rhs dims", rhs_used, rs.rank());
  for (size_t i = 0; i < dot.lhs_contracting.size(); ++i) {
    if (ls.dim(dot.lhs_contracting[i]) != rs.dim(dot.rhs_contracting[i])) {
      Mismatch("dot contracting extents differ: " + ls.ToString() + " vs " +
               rs.ToString());
    }
  }
  std::vector<int64_t> dims;
  for (size_t i = 0; i < dot.lhs_batch.size(); ++i) {
    if (ls.dim(dot.lhs_batch[i]) != rs.dim(dot.rhs_batch[i])) {
      Mismatch("dot batch extents differ");
    }
    dims.push_back(ls.dim(dot.lhs_batch[i]));
  }
  for (int64_t d = 0; d < ls.rank(); ++d) {
    if (std::find(lhs_used.begin(), lhs_used.end(), d) == lhs_used.end()) {
      dims.push_back(ls.dim(d));
    }
  }
  for (int64_t d = 0; d < rs.rank(); ++d) {
    if (std::find(rhs_used.begin(), rhs_used.end(), d) == rhs_used.end()) {
      dims.push_back(rs.dim(d));
    }
  }
  return Type(lhs.dtype(), Shape(std::move(dims)));
}

Type InferWhile(const WhileOp& w, const Type& operand) {
  if (!w.condition || !w.body) Mismatch("while without sub-graphs");
  if (!operand.IsTuple()) Mismatch("while operand must be a tuple");
  auto check_param = [&](const Graph& g, std::string_view role) {
    auto params = g.parameters();
    if (params.size() != 1 || !(params[0].type == operand)) {
      Mismatch("while " + std::string(role) + " '" + g.name() +
               "' parameter must be " + operand.ToString());
    }
    if (!g.Contains(g.root())) {
      Mismatch("while " + std::string(role) + " has no root");
    }
  };
  check_param(*w.condition, "condition");
  check_param(*w.body, "body");
  const Type& cond_root = w.condition->type(w.condition->root());
  if (cond_root.IsTuple() || cond_root.shape().rank() != 0) {
    Mismatch("while condition must return a scalar");
  }
  const Type& body_root = w.body->type(w.body->root());
  if (!(body_root == operand)) {
    Mismatch("while body changes the carried tuple from " +
             operand.ToString() + " to " + body_root.ToString());
  }
  return operand;
}

}  // namespace

Type InferShape(const Op& op, std::span<const Type> operands) {
  const std::string name = OpName(op);
  return std::visit(
      [&](const auto& o) -> Type {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, ParameterOp>) {
          ExpectArity(name, operands, 0);
          if (o.index < 0) OutOfRange("negative parameter index");
          return o.type;
        } else if constexpr (std::is_same_v<T, ConstantOp>) {
          ExpectArity(name, operands, 0);
          if (static_cast<int64_t>(o.values.size()) !=
              o.shape.ElementCount()) {
            Mismatch("constant holds " + std::to_string(o.values.size()) +
                     " values for shape " + o.shape.ToString());
          }
          if (o.shape.ByteSize(o.dtype) >= kMaxConstantBytes) {
            throw Error(ErrorCode::kInvalidArgument,
                        "constants must be smaller than 1 MiB; feed large "
                        "tensors as parameters");
          }
          return Type(o.dtype, o.shape);
        } else if constexpr (std::is_same_v<T, UnaryOp>) {
          ExpectArity(name, operands, 1);
          return ExpectArray(name, operands[0]);
        } else if constexpr (std::is_same_v<T, BinaryOp>) {
          ExpectArity(name, operands, 2);
          const Type& a = ExpectArray(name, operands[0]);
          const Type& b = ExpectArray(name, operands[1]);
          if (!(a == b)) {
            Mismatch(name + " operands differ: " + a.ToString() + " vs " +
                     b.ToString());
          }
          return a;
        } else if constexpr (std::is_same_v<T, BroadcastOp>) {
          ExpectArity(name, operands, 1);
          const Type& x = ExpectArray(name, operands[0]);
          if (static_cast<int64_t>(o.mapped_dims.size()) != x.shape().rank()) {
            OutOfRange("broadcast dims " + DimsString(o.mapped_dims) +
                       " do not match operand rank " +
                       std::to_string(x.shape().rank()));
          }
          CheckDimList("broadcast dims", o.mapped_dims, o.shape.rank());
          for (size_t i = 0; i < o.mapped_dims.size(); ++i) {
            if (i > 0 && o.mapped_dims[i] <= o.mapped_dims[i - 1]) {
              OutOfRange("broadcast dims must be increasing");
            }
            if (o.shape.dim(o.mapped_dims[i]) !=
                x.shape().dim(static_cast<int64_t>(i))) {
              Mismatch("broadcast of " + x.shape().ToString() + " into " +
                       o.shape.ToString() + " with dims " +
                       DimsString(o.mapped_dims));
            }
          }
          return Type(x.dtype(), o.shape);
        } else if constexpr (std::is_same_v<T, ReduceOp>) {
          ExpectArity(name, operands, 1);
          const Type& x = ExpectArray(name, operands[0]);
          CheckDimList("reduce dims", o.dims, x.shape().rank());
          std::vector<int64_t> dims;
          for (int64_t d = 0; d < x.shape().rank(); ++d) {
            if (std::find(o.dims.begin(), o.dims.end(), d) == o.dims.end()) {
              dims.push_back(x.shape().dim(d));
            }
          }
          return Type(x.dtype(), Shape(std::move(dims)));
        } else if constexpr (std::is_same_v<T, DotOp>) {
          ExpectArity(name, operands, 2);
          return InferDot(o, ExpectArray(name, operands[0]),
                          ExpectArray(name, operands[1]));
        } else if constexpr (std::is_same_v<T, TransposeOp>) {
          ExpectArity(name, operands, 1);
          const Type& x = ExpectArray(name, operands[0]);
          if (static_cast<int64_t>(o.perm.size()) != x.shape().rank()) {
            OutOfRange("transpose perm " + DimsString(o.perm) +
                       " does not match rank");
          }
          CheckDimList("transpose perm", o.perm, x.shape().rank());
          std::vector<int64_t> dims;
          for (int64_t p : o.perm) dims.push_back(x.shape().dim(p));
          return Type(x.dtype(), Shape(std::move(dims)));
        } else if constexpr (std::is_same_v<T, SliceOp>) {
          ExpectArity(name, operands, 1);
          const Type& x = ExpectArray(name, operands[0]);
          const int64_t rank = x.shape().rank();
          if (static_cast<int64_t>(o.starts.size()) != rank ||
              static_cast<int64_t>(o.limits.size()) != rank ||
              static_cast<int64_t>(o.strides.size()) != rank) {
            OutOfRange("slice attribute lengths must equal rank");
          }
          std::vector<int64_t> dims;
          for (int64_t d = 0; d < rank; ++d) {
            const auto i = static_cast<size_t>(d);
            if (o.starts[i] < 0 || o.starts[i] > o.limits[i] ||
                o.limits[i] > x.shape().dim(d) || o.strides[i] < 1) {
              OutOfRange("slice bounds out of range on dim " +
                         std::to_string(d));
            }
            dims.push_back((o.limits[i] - o.starts[i] + o.strides[i] - 1) /
                           o.strides[i]);
          }
          return Type(x.dtype(), Shape(std::move(dims)));
        } else if constexpr (std::is_same_v<T, DynamicSliceOp>) {
          if (operands.empty()) Mismatch("dynamic_slice needs an operand");
          const Type& x = ExpectArray(name, operands[0]);
          const int64_t rank = x.shape().rank();
          ExpectArity(name, operands, static_cast<size_t>(rank) + 1);
          if (static_cast<int64_t>(o.sizes.size()) != rank) {
            OutOfRange("dynamic_slice sizes must equal rank");
          }
          for (int64_t d = 0; d < rank; ++d) {
            ExpectScalar(name, operands[static_cast<size_t>(d) + 1]);
            const int64_t s = o.sizes[static_cast<size_t>(d)];
            if (s < 0 || s > x.shape().dim(d)) {
              OutOfRange("dynamic_slice size out of range on dim " +
                         std::to_string(d));
            }
          }
          return Type(x.dtype(), Shape(o.sizes));
        } else if constexpr (std::is_same_v<T, DynamicUpdateSliceOp>) {
          if (operands.size() < 2) Mismatch("dynamic_update_slice arity");
          const Type& x = ExpectArray(name, operands[0]);
          const Type& u = ExpectArray(name, operands[1]);
          const int64_t rank = x.shape().rank();
          ExpectArity(name, operands, static_cast<size_t>(rank) + 2);
          if (x.dtype() != u.dtype() || u.shape().rank() != rank) {
            Mismatch("dynamic_update_slice update " + u.ToString() +
                     " incompatible with " + x.ToString());
          }
          for (int64_t d = 0; d < rank; ++d) {
            ExpectScalar(name, operands[static_cast<size_t>(d) + 2]);
            if (u.shape().dim(d) > x.shape().dim(d)) {
              Mismatch("dynamic_update_slice update larger than operand");
            }
          }
          return x;
        } else if constexpr (std::is_same_v<T, ConcatOp>) {
          if (operands.empty()) Mismatch("concatenate needs operands");
          const Type& first = ExpectArray(name, operands[0]);
          const int64_t rank = first.shape().rank();
          if (o.dim < 0 || o.dim >= rank) OutOfRange("concatenate dim");
          int64_t extent = 0;
          for (const Type& t : operands) {
            ExpectArray(name, t);
            if (t.dtype() != first.dtype() || t.shape().rank() != rank) {
              Mismatch("concatenate operands differ");
            }
            for (int64_t d = 0; d < rank; ++d) {
              if (d != o.dim && t.shape().dim(d) != first.shape().dim(d)) {
                Mismatch("concatenate operands differ off the concat dim");
              }
            }
            extent += t.shape().dim(o.dim);
          }
          return Type(first.dtype(), first.shape().WithDim(o.dim, extent));
        } else if constexpr (std::is_same_v<T, IotaOp>) {
          ExpectArity(name, operands, 0);
          if (o.dim < 0 || o.dim >= o.shape.rank()) OutOfRange("iota dim");
          return Type(o.dtype, o.shape);
        } else if constexpr (std::is_same_v<T, TopKOp>) {
          ExpectArity(name, operands, 1);
          const Type& x = ExpectArray(name, operands[0]);
          if (o.dim < 0 || o.dim >= x.shape().rank()) OutOfRange("topk dim");
          if (o.k < 1 || o.k > x.shape().dim(o.dim)) {
            OutOfRange("topk k=" + std::to_string(o.k) + " out of range");
          }
          Shape out = x.shape().WithDim(o.dim, o.k);
          return Type::Tuple({Type(x.dtype(), out), Type(DType::kF64, out)});
        } else if constexpr (std::is_same_v<T, TriangularSolveOp>) {
          ExpectArity(name, operands, 2);
          const Type& a = ExpectArray(name, operands[0]);
          const Type& b = ExpectArray(name, operands[1]);
          const int64_t rank = a.shape().rank();
          if (rank < 2 || b.shape().rank() != rank || a.dtype() != b.dtype()) {
            Mismatch("triangular_solve needs a:[...,n,n], b:[...,n,r]");
          }
          const int64_t n = a.shape().dim(rank - 1);
          if (a.shape().dim(rank - 2) != n || b.shape().dim(rank - 2) != n) {
            Mismatch("triangular_solve matrix must be square and match b");
          }
          for (int64_t d = 0; d < rank - 2; ++d) {
            if (a.shape().dim(d) != b.shape().dim(d)) {
              Mismatch("triangular_solve batch dims differ");
            }
          }
          return b;
        } else if constexpr (std::is_same_v<T, AddDiagonalOp>) {
          ExpectArity(name, operands, 2);
          const Type& m = ExpectArray(name, operands[0]);
          const Type& s = ExpectArray(name, operands[1]);
          if (m.shape().rank() != 2 || m.shape().dim(0) != m.shape().dim(1)) {
            Mismatch("add_diagonal needs a square matrix");
          }
          if (s.shape().rank() != 0 || s.dtype() != m.dtype()) {
            Mismatch("add_diagonal needs a scalar of the matrix dtype");
          }
          return m;
        } else if constexpr (std::is_same_v<T, WhileOp>) {
          ExpectArity(name, operands, 1);
          return InferWhile(o, operands[0]);
        } else if constexpr (std::is_same_v<T, TupleOp>) {
          std::vector<Type> elements;
          for (const Type& t : operands) {
            elements.push_back(ExpectArray("tuple element", t));
          }
          return Type::Tuple(std::move(elements));
        } else if constexpr (std::is_same_v<T, GetTupleElementOp>) {
          ExpectArity(name, operands, 1);
          if (!operands[0].IsTuple()) {
            Mismatch("get_tuple_element of a non-tuple");
          }
          const auto& el = operands[0].elements();
          if (o.index < 0 || o.index >= static_cast<int64_t>(el.size())) {
            OutOfRange("get_tuple_element index " + std::to_string(o.index));
          }
          return el[static_cast<size_t>(o.index)];
        }
      },
      op);
}

}  // namespace tb
