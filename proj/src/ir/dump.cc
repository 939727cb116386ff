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

#include "tensorbudget/dump.h"

#include <set>
#include <sstream>

namespace tb {
namespace {

std::string List(const std::vector<int64_t>& v) {
  std::ostringstream os;
  os << '{';
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << '}';
  return os.str();
}

std::string Number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string Attributes(const Op& op) {
  return std::visit(
      [](const auto& o) -> std::string {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, ParameterOp>) {
          return "index=" + std::to_string(o.index);
        } else if constexpr (std::is_same_v<T, ConstantOp>) {
          std::string s = "value={";
          for (size_t i = 0; i < o.values.size(); ++i) {
            s += (i ? "," : "") + Number(o.values[i]);
          }
          return s + "}";
        } else if constexpr (std::is_same_v<T, BroadcastOp>) {
          return "dims=" + List(o.mapped_dims);
        } else if constexpr (std::is_same_v<T, ReduceOp>) {
          return "dims=" + List(o.dims);
        } else if constexpr (std::is_same_v<T, DotOp>) {
          std::string s;
          if (!o.lhs_batch.empty()) {
            s += "lhs_batch=" + List(o.lhs_batch) + ",rhs_batch=" +
                 List(o.rhs_batch) + ",";
          }
          return s + "lhs_contracting=" + List(o.lhs_contracting) +
                 ",rhs_contracting=" + List(o.rhs_contracting);
        } else if constexpr (std::is_same_v<T, TransposeOp>) {
          return "perm=" + List(o.perm);
        } else if constexpr (std::is_same_v<T, SliceOp>) {
          std::string s = "slice={";
          for (size_t i = 0; i < o.starts.size(); ++i) {
            s += (i ? "," : "") + std::string("[") +
                 std::to_string(o.starts[i]) + ":" +
                 std::to_string(o.limits[i]) + ":" +
                 std::to_string(o.strides[i]) + "]";
          }
          return s + "}";
        } else if constexpr (std::is_same_v<T, DynamicSliceOp>) {
          return "sizes=" + List(o.sizes);
        } else if constexpr (std::is_same_v<T, ConcatOp>) {
          return "dim=" + std::to_string(o.dim);
        } else if constexpr (std::is_same_v<T, IotaOp>) {
          return "dim=" + std::to_string(o.dim);
        } else if constexpr (std::is_same_v<T, TopKOp>) {
          return "k=" + std::to_string(o.k) + ",dim=" + std::to_string(o.dim) +
                 ",largest=" + (o.largest ? "true" : "false");
        } else if constexpr (std::is_same_v<T, TriangularSolveOp>) {
          return std::string("lower=") + (o.lower ? "true" : "false");
        } else if constexpr (std::is_same_v<T, WhileOp>) {
          return "condition=" + o.condition->name() +
                 ",body=" + o.body->name();
        } else if constexpr (std::is_same_v<T, GetTupleElementOp>) {
          return "index=" + std::to_string(o.index);
        } else {
          return "";
        }
      },
      op);
}

void DumpInto(const Graph& graph, std::set<const Graph*>& printed,
              std::ostringstream& os) {
  const std::vector<InstrId> order = TopologicalOrderAll(graph);
  for (InstrId id : order) {
    if (const auto* w = std::get_if<WhileOp>(&graph.instr(id).op)) {
      for (const Graph* sub : {w->condition.get(), w->body.get()}) {
        if (printed.insert(sub).second) DumpInto(*sub, printed, os);
      }
    }
  }
  os << "computation " << graph.name() << " (root=%" << graph.root()
     << ") {\n";
  for (InstrId id : order) {
    const Instruction& in = graph.instr(id);
    os << "  %" << id << " = " << OpName(in.op) << in.type.ToString();
    for (size_t i = 0; i < in.operands.size(); ++i) {
      os << (i ? ", %" : " %") << in.operands[i];
    }
    std::string attrs = Attributes(in.op);
    if (!attrs.empty()) os << " [" << attrs << "]";
    os << "\n";
  }
  os << "}\n";
}

}  // namespace

std::string Dump(const Graph& graph) {
  std::ostringstream os;
  std::set<const Graph*> printed;
  DumpInto(graph, printed, os);
  return os.str();
}

}  // namespace tb
