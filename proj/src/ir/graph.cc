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
#include <cmath>
#include <queue>
#include <set>

#include "tensorbudget/ir.h"
#include "tensorbudget/status.h"

namespace tb {

std::string_view UnaryKindName(UnaryKind kind) {
  switch (kind) {
    case UnaryKind::kNeg:
      return "neg";
    case UnaryKind::kExp:
      return "exp";
    case UnaryKind::kAbs:
      return "abs";
    case UnaryKind::kSquare:
      return "square";
    case UnaryKind::kSqrt:
      return "sqrt";
    case UnaryKind::kReciprocal:
      return "reciprocal";
  }
  return "?";
}

std::string_view BinaryKindName(BinaryKind kind) {
  switch (kind) {
    case BinaryKind::kAdd:
      return "add";
    case BinaryKind::kSub:
      return "sub";
    case BinaryKind::kMul:
      return "mul";
    case BinaryKind::kDiv:
      return "div";
    case BinaryKind::kPow:
      return "pow";
    case BinaryKind::kMax:
      return "max";
    case BinaryKind::kMin:
      return "min";
    case BinaryKind::kLessThan:
      return "lt";
    case BinaryKind::kEqual:
      return "eq";
  }
  return "?";
}

std::string_view ReduceKindName(ReduceKind kind) {
  return kind == ReduceKind::kSum ? "reduce_sum" : "reduce_max";
}

std::string OpName(const Op& op) {
  return std::visit(
      [](const auto& o) -> std::string {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, ParameterOp>) return "parameter";
        if constexpr (std::is_same_v<T, ConstantOp>) return "constant";
        if constexpr (std::is_same_v<T, UnaryOp>) {
          return std::string(UnaryKindName(o.kind));
        }
        if constexpr (std::is_same_v<T, BinaryOp>) {
          return std::string(BinaryKindName(o.kind));
        }
        if constexpr (std::is_same_v<T, BroadcastOp>) return "broadcast";
        if constexpr (std::is_same_v<T, ReduceOp>) {
          return std::string(ReduceKindName(o.kind));
        }
        if constexpr (std::is_same_v<T, DotOp>) return "dot";
        if constexpr (std::is_same_v<T, TransposeOp>) return "transpose";
        if constexpr (std::is_same_v<T, SliceOp>) return "slice";
        if constexpr (std::is_same_v<T, DynamicSliceOp>) {
          return "dynamic_slice";
        }
        if constexpr (std::is_same_v<T, DynamicUpdateSliceOp>) {
          return "dynamic_update_slice";
        }
        if constexpr (std::is_same_v<T, ConcatOp>) return "concatenate";
        if constexpr (std::is_same_v<T, IotaOp>) return "iota";
        if constexpr (std::is_same_v<T, TopKOp>) return "topk";
        if constexpr (std::is_same_v<T, TriangularSolveOp>) {
          return "triangular_solve";
        }
        if constexpr (std::is_same_v<T, AddDiagonalOp>) return "add_diagonal";
        if constexpr (std::is_same_v<T, WhileOp>) return "while";
        if constexpr (std::is_same_v<T, TupleOp>) return "tuple";
        if constexpr (std::is_same_v<T, GetTupleElementOp>) {
          return "get_tuple_element";
        }
      },
      op);
}

InstrId Graph::Add(Op op, std::vector<InstrId> operands) {
  std::vector<Type> types;
  types.reserve(operands.size());
  for (InstrId id : operands) types.push_back(type(id));
  Type t = InferShape(op, types);
  return AddUnchecked(std::move(op), std::move(operands), std::move(t));
}

InstrId Graph::AddUnchecked(Op op, std::vector<InstrId> operands, Type type) {
  for (InstrId id : operands) {
    if (!Contains(id)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "operand %" + std::to_string(id) + " does not exist");
    }
  }
  const InstrId id = next_id_++;
  instrs_.emplace(id, Instruction{id, std::move(op), std::move(operands),
                                  std::move(type)});
  return id;
}

const Instruction& Graph::instr(InstrId id) const {
  auto it = instrs_.find(id);
  if (it == instrs_.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no instruction %" + std::to_string(id) + " in " + name_);
  }
  return it->second;
}

void Graph::set_root(InstrId id) {
  instr(id);
  root_ = id;
}

std::vector<InstrId> Graph::ids() const {
  std::vector<InstrId> out;
  out.reserve(instrs_.size());
  for (const auto& [id, _] : instrs_) out.push_back(id);
  return out;
}

std::vector<ParameterInfo> Graph::parameters() const {
  std::vector<ParameterInfo> out;
  for (const auto& [id, in] : instrs_) {
    if (const auto* p = std::get_if<ParameterOp>(&in.op)) {
      out.push_back({p->index, id, in.type});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.index < b.index; });
  return out;
}

std::map<InstrId, std::vector<InstrId>> Graph::Users() const {
  std::map<InstrId, std::vector<InstrId>> users;
  for (const auto& [id, in] : instrs_) {
    users[id];
    for (InstrId op : in.operands) {
      auto& u = users[op];
      if (u.empty() || u.back() != id) u.push_back(id);
    }
  }
  return users;
}

void Graph::SetOperand(InstrId id, int64_t operand_index, InstrId new_operand) {
  instr(new_operand);
  auto it = instrs_.find(id);
  if (it == instrs_.end()) instr(id);
  it->second.operands.at(static_cast<size_t>(operand_index)) = new_operand;
}

void Graph::ReplaceAllUsesWith(InstrId from, InstrId to) {
  instr(to);
  for (auto& [id, in] : instrs_) {
    if (id == to) continue;
    for (InstrId& op : in.operands) {
      if (op == from) op = to;
    }
  }
  if (root_ == from) root_ = to;
}

void Graph::RemoveDeadCode() {
  std::set<InstrId> live;
  std::vector<InstrId> stack;
  if (Contains(root_)) stack.push_back(root_);
  while (!stack.empty()) {
    InstrId id = stack.back();
    stack.pop_back();
    if (!live.insert(id).second) continue;
    for (InstrId op : instr(id).operands) stack.push_back(op);
  }
  for (auto it = instrs_.begin(); it != instrs_.end();) {
    if (!live.contains(it->first) && !Is<ParameterOp>(it->second.op)) {
      it = instrs_.erase(it);
    } else {
      ++it;
    }
  }
}

Graph Graph::Canonicalized() const {
  Graph out(name_);
  std::map<InstrId, InstrId> remap;
  // Parameters first so their ids stay dense and stable even when unused.
  for (const ParameterInfo& p : parameters()) {
    const Instruction& in = instr(p.id);
    remap[p.id] = out.AddUnchecked(in.op, {}, in.type);
  }
  for (InstrId id : TopologicalOrderAll(*this)) {
    if (remap.contains(id)) continue;
    const Instruction& in = instr(id);
    std::vector<InstrId> ops;
    ops.reserve(in.operands.size());
    for (InstrId op : in.operands) ops.push_back(remap.at(op));
    remap[id] = out.AddUnchecked(in.op, std::move(ops), in.type);
  }
  if (Contains(root_)) out.root_ = remap.at(root_);
  return out;
}

namespace {

std::vector<InstrId> KahnOrder(const Graph& graph,
                               const std::set<InstrId>& nodes) {
  std::map<InstrId, int64_t> pending;
  std::map<InstrId, std::vector<InstrId>> users;
  for (InstrId id : nodes) {
    std::set<InstrId> distinct(graph.instr(id).operands.begin(),
                               graph.instr(id).operands.end());
    pending[id] = static_cast<int64_t>(distinct.size());
    for (InstrId op : distinct) users[op].push_back(id);
  }
  std::priority_queue<InstrId, std::vector<InstrId>, std::greater<>> ready;
  for (const auto& [id, n] : pending) {
    if (n == 0) ready.push(id);
  }
  std::vector<InstrId> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    InstrId id = ready.top();
    ready.pop();
    order.push_back(id);
    for (InstrId u : users[id]) {
      if (--pending[u] == 0) ready.push(u);
    }
  }
  if (order.size() != nodes.size()) {
    throw Error(ErrorCode::kCycleDetected,
                "CycleDetected: graph '" + graph.name() + "' has a cycle");
  }
  return order;
}

}  // namespace

std::vector<InstrId> TopologicalOrder(const Graph& graph) {
  std::set<InstrId> reachable;
  std::vector<InstrId> stack;
  if (graph.Contains(graph.root())) stack.push_back(graph.root());
  while (!stack.empty()) {
    InstrId id = stack.back();
    stack.pop_back();
    if (!reachable.insert(id).second) continue;
    for (InstrId op : graph.instr(id).operands) stack.push_back(op);
  }
  return KahnOrder(graph, reachable);
}

std::vector<InstrId> TopologicalOrderAll(const Graph& graph) {
  std::vector<InstrId> ids = graph.ids();
  return KahnOrder(graph, std::set<InstrId>(ids.begin(), ids.end()));
}

std::vector<Diagnostic> Validate(const Graph& graph) {
  std::vector<Diagnostic> out;
  auto report = [&](InstrId id, std::string reason) {
    out.push_back({graph.name(), id, std::move(reason)});
  };
  if (!graph.Contains(graph.root())) report(-1, "graph has no root");

  const auto params = graph.parameters();
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].index != static_cast<int64_t>(i)) {
      report(params[i].id, "parameter indices must be dense 0..P-1");
      break;
    }
  }

  bool operands_ok = true;
  for (InstrId id : graph.ids()) {
    for (InstrId op : graph.instr(id).operands) {
      if (!graph.Contains(op)) {
        report(id, "operand %" + std::to_string(op) + " does not exist");
        operands_ok = false;
      }
    }
  }
  if (!operands_ok) return out;

  std::vector<InstrId> order;
  try {
    order = TopologicalOrderAll(graph);
  } catch (const Error& e) {
    report(-1, e.what());
    return out;
  }

  for (InstrId id : order) {
    const Instruction& in = graph.instr(id);
    std::vector<Type> types;
    for (InstrId op : in.operands) types.push_back(graph.type(op));
    try {
      Type inferred = InferShape(in.op, types);
      if (!(inferred == in.type)) {
        report(id, "%" + std::to_string(id) + " records type " +
                       in.type.ToString() + " but inference gives " +
                       inferred.ToString());
      }
    } catch (const Error& e) {
      report(id, "%" + std::to_string(id) + ": " + e.what());
    }
    if (const auto* w = std::get_if<WhileOp>(&in.op)) {
      for (const auto* sub : {w->condition.get(), w->body.get()}) {
        if (sub == nullptr) continue;
        for (Diagnostic& d : Validate(*sub)) out.push_back(std::move(d));
      }
    }
  }
  return out;
}

std::optional<int64_t> StaticTripCount(const Graph& graph, InstrId while_id) {
  const Instruction& w = graph.instr(while_id);
  const auto* op = std::get_if<WhileOp>(&w.op);
  if (op == nullptr) return std::nullopt;

  auto scalar_constant = [](const Graph& g,
                            InstrId id) -> std::optional<double> {
    const auto* c = std::get_if<ConstantOp>(&g.instr(id).op);
    if (c == nullptr || c->values.size() != 1) return std::nullopt;
    return c->values[0];
  };
  auto is_counter = [](const Graph& g, InstrId id) {
    const Instruction& in = g.instr(id);
    const auto* gte = std::get_if<GetTupleElementOp>(&in.op);
    return gte != nullptr && gte->index == 0 &&
           Is<ParameterOp>(g.instr(in.operands[0]).op);
  };

  const Instruction& init = graph.instr(w.operands[0]);
  if (!Is<TupleOp>(init.op) || init.operands.empty()) return std::nullopt;
  auto start = scalar_constant(graph, init.operands[0]);

  const Graph& cond = *op->condition;
  const Instruction& lt = cond.instr(cond.root());
  const auto* cmp = std::get_if<BinaryOp>(&lt.op);
  if (cmp == nullptr || cmp->kind != BinaryKind::kLessThan ||
      !is_counter(cond, lt.operands[0])) {
    return std::nullopt;
  }
  auto limit = scalar_constant(cond, lt.operands[1]);

  const Graph& body = *op->body;
  const Instruction& next = body.instr(body.root());
  if (!Is<TupleOp>(next.op)) return std::nullopt;
  const Instruction& inc = body.instr(next.operands[0]);
  const auto* add = std::get_if<BinaryOp>(&inc.op);
  if (add == nullptr || add->kind != BinaryKind::kAdd ||
      !is_counter(body, inc.operands[0])) {
    return std::nullopt;
  }
  auto step = scalar_constant(body, inc.operands[1]);
  if (!start || !limit || !step || *step != 1.0) return std::nullopt;
  const double trips = std::ceil(*limit - *start);
  return trips > 0 ? static_cast<int64_t>(trips) : 0;
}

int64_t MaxArrayByteSize(const Graph& graph) {
  int64_t best = 0;
  for (InstrId id : graph.ids()) {
    const Type& t = graph.type(id);
    if (!t.IsTuple()) best = std::max(best, t.ByteSize());
  }
  return best;
}

}  // namespace tb
