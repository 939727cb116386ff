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

#include "tensorbudget/split.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <set>

#include "tensorbudget/status.h"

namespace tb {
namespace {

// Where result dim j of an instruction comes from in one operand.
struct DimMap {
  enum Kind { kInvalid, kWhole, kDim } kind = kInvalid;
  int64_t dim = -1;
  int64_t shift = 0;
};

DimMap Invalid() { return {}; }
DimMap Whole() { return {DimMap::kWhole}; }
DimMap Dim(int64_t d, int64_t shift = 0) { return {DimMap::kDim, d, shift}; }

std::vector<int64_t> FreeDims(int64_t rank, const std::vector<int64_t>& batch,
                              const std::vector<int64_t>& contracting) {
  std::vector<int64_t> out;
  for (int64_t d = 0; d < rank; ++d) {
    if (std::find(batch.begin(), batch.end(), d) == batch.end() &&
        std::find(contracting.begin(), contracting.end(), d) ==
            contracting.end()) {
      out.push_back(d);
    }
  }
  return out;
}

int64_t IndexOf(const std::vector<int64_t>& v, int64_t x) {
  auto it = std::find(v.begin(), v.end(), x);
  return it == v.end() ? -1 : static_cast<int64_t>(it - v.begin());
}

DimMap MapDimToOperand(const Graph& g, const Instruction& u, int64_t j,
                       size_t a) {
  return std::visit(
      [&](const auto& op) -> DimMap {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, UnaryOp> ||
                      std::is_same_v<T, BinaryOp>) {
          return Dim(j);
        } else if constexpr (std::is_same_v<T, BroadcastOp>) {
          const int64_t k = IndexOf(op.mapped_dims, j);
          return k < 0 ? Whole() : Dim(k);
        } else if constexpr (std::is_same_v<T, ReduceOp>) {
          const int64_t rank = g.instr(u.operands[0]).shape().rank();
          std::vector<int64_t> kept = FreeDims(rank, op.dims, {});
          return Dim(kept.at(static_cast<size_t>(j)));
        } else if constexpr (std::is_same_v<T, TransposeOp>) {
          return Dim(op.perm.at(static_cast<size_t>(j)));
        } else if constexpr (std::is_same_v<T, SliceOp>) {
          const auto uj = static_cast<size_t>(j);
          return op.strides[uj] == 1 ? Dim(j, op.starts[uj]) : Invalid();
        } else if constexpr (std::is_same_v<T, ConcatOp>) {
          return j == op.dim ? Invalid() : Dim(j);
        } else if constexpr (std::is_same_v<T, TriangularSolveOp>) {
          return j < u.shape().rank() - 2 ? Dim(j) : Invalid();
        } else if constexpr (std::is_same_v<T, DotOp>) {
          const Shape& ls = g.instr(u.operands[0]).shape();
          const Shape& rs = g.instr(u.operands[1]).shape();
          const auto nb = static_cast<int64_t>(op.lhs_batch.size());
          auto lf = FreeDims(ls.rank(), op.lhs_batch, op.lhs_contracting);
          auto rf = FreeDims(rs.rank(), op.rhs_batch, op.rhs_contracting);
          if (j < nb) {
            const auto uj = static_cast<size_t>(j);
            return Dim(a == 0 ? op.lhs_batch[uj] : op.rhs_batch[uj]);
          }
          const auto nl = static_cast<int64_t>(lf.size());
          if (j < nb + nl) {
            return a == 0 ? Dim(lf[static_cast<size_t>(j - nb)]) : Whole();
          }
          return a == 1 ? Dim(rf[static_cast<size_t>(j - nb - nl)]) : Whole();
        } else {
          return Invalid();
        }
      },
      u.op);
}

bool IsRootKind(const Instruction& in) {
  return Is<DotOp>(in.op) || Is<ReduceOp>(in.op) || Is<TopKOp>(in.op);
}

bool IsLarge(const Graph& g, InstrId id, int64_t threshold) {
  return g.type(id).ByteSize() > threshold;
}

// Oversized computed arrays; parameters and constants are always inputs.
bool InPath(const Graph& g, InstrId id, int64_t threshold) {
  const Instruction& in = g.instr(id);
  return !in.type.IsTuple() && IsLarge(g, id, threshold) &&
         !Is<ParameterOp>(in.op) && !Is<ConstantOp>(in.op);
}

// How the root consumes a chunk of the split operand along `dim`.
struct RootUse {
  bool accumulate = false;
  ReduceKind combine = ReduceKind::kSum;
  // Result dim receiving the chunk when not accumulating.
  int64_t out_dim = -1;
  // The other dot operand and how it is chunked.
  int64_t other_index = -1;
  ChunkAssignment other;
};

std::optional<RootUse> RootCompat(const Graph& g, const Instruction& root,
                                  InstrId o, int64_t d) {
  if (const auto* top = std::get_if<TopKOp>(&root.op)) {
    if (d == top->dim) return std::nullopt;
    return RootUse{false, ReduceKind::kSum, d, -1, {}};
  }
  if (const auto* red = std::get_if<ReduceOp>(&root.op)) {
    if (IndexOf(red->dims, d) >= 0) {
      return RootUse{true, red->kind, -1, -1, {}};
    }
    auto kept = FreeDims(g.instr(o).shape().rank(), red->dims, {});
    return RootUse{false, ReduceKind::kSum, IndexOf(kept, d), -1, {}};
  }
  const auto& dot = std::get<DotOp>(root.op);
  const auto nb = static_cast<int64_t>(dot.lhs_batch.size());
  if (root.operands[0] == root.operands[1]) {
    for (size_t i = 0; i < dot.lhs_contracting.size(); ++i) {
      if (dot.lhs_contracting[i] == d && dot.rhs_contracting[i] == d) {
        return RootUse{true, ReduceKind::kSum, -1, -1, {}};
      }
    }
    for (size_t i = 0; i < dot.lhs_batch.size(); ++i) {
      if (dot.lhs_batch[i] == d && dot.rhs_batch[i] == d) {
        return RootUse{false, ReduceKind::kSum, static_cast<int64_t>(i), -1,
                       {}};
      }
    }
    return std::nullopt;
  }
  const size_t a = root.operands[0] == o ? 0 : 1;
  const auto& batch_a = a == 0 ? dot.lhs_batch : dot.rhs_batch;
  const auto& batch_b = a == 0 ? dot.rhs_batch : dot.lhs_batch;
  const auto& con_a = a == 0 ? dot.lhs_contracting : dot.rhs_contracting;
  const auto& con_b = a == 0 ? dot.rhs_contracting : dot.lhs_contracting;
  RootUse use;
  use.other_index = static_cast<int64_t>(1 - a);
  if (int64_t i = IndexOf(batch_a, d); i >= 0) {
    use.out_dim = i;
    use.other = {false, batch_b[static_cast<size_t>(i)], 0};
    return use;
  }
  if (int64_t i = IndexOf(con_a, d); i >= 0) {
    use.accumulate = true;
    use.other = {false, con_b[static_cast<size_t>(i)], 0};
    return use;
  }
  const Shape& lhs = g.instr(root.operands[0]).shape();
  auto free_a =
      FreeDims(g.instr(o).shape().rank(), batch_a, con_a);
  int64_t pos = nb + IndexOf(free_a, d);
  if (a == 1) {
    pos += static_cast<int64_t>(
        FreeDims(lhs.rank(), dot.lhs_batch, dot.lhs_contracting).size());
  }
  use.out_dim = pos;
  use.other = {true, -1, 0};
  return use;
}

using Assignment = std::map<InstrId, ChunkAssignment>;

bool Merge(Assignment& a, InstrId id, const ChunkAssignment& c) {
  auto [it, inserted] = a.emplace(id, c);
  return inserted || it->second == c;
}

std::optional<Assignment> Propagate(const Graph& g, const SplitCandidate& c,
                                    int64_t d, const RootUse& use) {
  Assignment assign;
  const Instruction& root = g.instr(c.root);
  assign[c.operand_to_split] = {false, d, 0};
  if (use.other_index >= 0) {
    const InstrId other = root.operands[static_cast<size_t>(use.other_index)];
    if (!Merge(assign, other, use.other)) return std::nullopt;
  }
  const std::set<InstrId> path(c.path.begin(), c.path.end());
  for (auto it = c.path.rbegin(); it != c.path.rend(); ++it) {
    const Instruction& u = g.instr(*it);
    auto found = assign.find(u.id);
    if (found == assign.end() || found->second.whole) return std::nullopt;
    const ChunkAssignment cur = found->second;
    if (const auto* io = std::get_if<IotaOp>(&u.op)) {
      if (io->dim == cur.dim) return std::nullopt;
    }
    for (size_t a = 0; a < u.operands.size(); ++a) {
      const DimMap m = MapDimToOperand(g, u, cur.dim, a);
      if (m.kind == DimMap::kInvalid) return std::nullopt;
      const InstrId o = u.operands[a];
      ChunkAssignment next;
      if (m.kind == DimMap::kWhole) {
        if (path.contains(o)) return std::nullopt;
        next.whole = true;
      } else {
        next = {false, m.dim, cur.shift + m.shift};
      }
      if (!Merge(assign, o, next)) return std::nullopt;
    }
  }
  return assign;
}

std::optional<SplitCandidate> Fail(std::string* why, std::string reason) {
  if (why != nullptr) *why = std::move(reason);
  return std::nullopt;
}

std::string Id(InstrId id) { return "%" + std::to_string(id); }

struct BuiltLoop {
  InstrId while_id = -1;
  InstrId result = -1;
};

// Appends one chunk of the path plus the root op to `target`. `values` maps
// every producer to its chunked value in `target` and is extended with the
// path. Returns the root's partial results.
std::vector<InstrId> EmitChunk(Graph& target, const Graph& src,
                               const SplitPlan& plan, int64_t size,
                               std::map<InstrId, InstrId>& values) {
  const SplitCandidate& c = plan.candidate;
  auto mapped = [&](const Instruction& in) {
    std::vector<InstrId> ops;
    for (InstrId o : in.operands) ops.push_back(values.at(o));
    return ops;
  };
  for (InstrId id : c.path) {
    const Instruction& in = src.instr(id);
    const int64_t d = plan.assignment.at(id).dim;
    Op op = in.op;
    if (auto* b = std::get_if<BroadcastOp>(&op)) {
      b->shape = b->shape.WithDim(d, size);
    } else if (auto* io = std::get_if<IotaOp>(&op)) {
      io->shape = io->shape.WithDim(d, size);
    } else if (auto* s = std::get_if<SliceOp>(&op)) {
      const auto ud = static_cast<size_t>(d);
      s->starts[ud] = 0;
      s->limits[ud] = size;
      s->strides[ud] = 1;
    }
    values[id] = target.Add(std::move(op), mapped(in));
  }
  const Instruction& root = src.instr(c.root);
  if (Is<TopKOp>(root.op)) {
    InstrId t = target.Add(root.op, mapped(root));
    return {target.Add(GetTupleElementOp{0}, {t}),
            target.Add(GetTupleElementOp{1}, {t})};
  }
  return {target.Add(root.op, mapped(root))};
}

InstrId Scalar(Graph& g, double v, DType dtype = DType::kF64) {
  return g.Add(ConstantOp{dtype, Shape{}, {v}});
}

BuiltLoop BuildLoop(Graph& graph, const SplitPlan& plan, int64_t loop_index) {
  const SplitCandidate& c = plan.candidate;
  const Instruction root = graph.instr(c.root);
  const int64_t s = plan.split_size;
  const int64_t full = plan.extent / s;
  const std::optional<RootUse> use =
      RootCompat(graph, root, c.operand_to_split, plan.best_split_dim);
  if (!use) throw Error(ErrorCode::kInternal, "plan does not fit its root");

  std::vector<Type> acc_types =
      root.type.IsTuple() ? root.type.elements() : std::vector<Type>{root.type};
  const double init_value =
      use->accumulate && use->combine == ReduceKind::kMax
          ? -std::numeric_limits<double>::infinity()
          : 0.0;
  std::vector<InstrId> carried;
  for (InstrId p : c.split_producers) {
    if (!Is<ConstantOp>(graph.instr(p).op)) carried.push_back(p);
  }
  std::vector<Type> elems{Type(DType::kF64, Shape{})};
  elems.insert(elems.end(), acc_types.begin(), acc_types.end());
  for (InstrId p : carried) elems.push_back(graph.type(p));
  const Type loop_type = Type::Tuple(elems);
  const size_t nacc = acc_types.size();

  // Slices producer `p` (already available as `base` in `g`) for a chunk
  // starting at `offset`, a scalar instruction in `g`.
  auto chunk_of = [&](Graph& g, InstrId p, InstrId base, InstrId offset,
                      InstrId zero, int64_t size) {
    const ChunkAssignment& a = plan.assignment.at(p);
    if (a.whole) return base;
    const Shape& shape = graph.instr(p).shape();
    std::vector<InstrId> starts;
    for (int64_t dd = 0; dd < shape.rank(); ++dd) {
      if (dd != a.dim) {
        starts.push_back(zero);
      } else if (a.shift == 0) {
        starts.push_back(offset);
      } else {
        starts.push_back(g.Add(BinaryOp{BinaryKind::kAdd},
                               {offset, Scalar(g, static_cast<double>(a.shift))}));
      }
    }
    return g.Add(DynamicSliceOp{shape.WithDim(a.dim, size).dims()},
                 [&] {
                   std::vector<InstrId> ops{base};
                   ops.insert(ops.end(), starts.begin(), starts.end());
                   return ops;
                 }());
  };
  auto combine = [&](Graph& g, InstrId acc, InstrId partial, InstrId offset,
                     InstrId zero) {
    if (use->accumulate) {
      const BinaryKind k = use->combine == ReduceKind::kMax ? BinaryKind::kMax
                                                            : BinaryKind::kAdd;
      return g.Add(BinaryOp{k}, {acc, partial});
    }
    std::vector<InstrId> ops{acc, partial};
    for (int64_t dd = 0; dd < g.instr(acc).shape().rank(); ++dd) {
      ops.push_back(dd == use->out_dim ? offset : zero);
    }
    return g.Add(DynamicUpdateSliceOp{}, std::move(ops));
  };

  const std::string base_name = graph.name();
  auto body = std::make_shared<Graph>(base_name + ".body" +
                                      std::to_string(loop_index));
  {
    Graph& b = *body;
    InstrId p = b.Add(ParameterOp{0, loop_type});
    std::vector<InstrId> gte;
    for (size_t i = 0; i < elems.size(); ++i) {
      gte.push_back(b.Add(GetTupleElementOp{static_cast<int64_t>(i)}, {p}));
    }
    InstrId offset = b.Add(BinaryOp{BinaryKind::kMul},
                           {gte[0], Scalar(b, static_cast<double>(s))});
    InstrId zero = Scalar(b, 0.0);
    std::map<InstrId, InstrId> values;
    for (InstrId prod : c.split_producers) {
      InstrId base;
      auto it = std::find(carried.begin(), carried.end(), prod);
      if (it == carried.end()) {
        const Instruction& k = graph.instr(prod);
        base = b.Add(k.op, {});
      } else {
        base = gte[1 + nacc + static_cast<size_t>(it - carried.begin())];
      }
      values[prod] = chunk_of(b, prod, base, offset, zero, s);
    }
    std::vector<InstrId> partials = EmitChunk(b, graph, plan, s, values);
    std::vector<InstrId> out{b.Add(BinaryOp{BinaryKind::kAdd},
                                   {gte[0], Scalar(b, 1.0)})};
    for (size_t i = 0; i < nacc; ++i) {
      out.push_back(combine(b, gte[1 + i], partials[i], offset, zero));
    }
    for (size_t i = 0; i < carried.size(); ++i) out.push_back(gte[1 + nacc + i]);
    b.set_root(b.Add(TupleOp{}, out));
    b.RemoveDeadCode();
  }
  auto cond = std::make_shared<Graph>(base_name + ".cond" +
                                      std::to_string(loop_index));
  {
    Graph& g = *cond;
    InstrId p = g.Add(ParameterOp{0, loop_type});
    InstrId i = g.Add(GetTupleElementOp{0}, {p});
    g.set_root(g.Add(BinaryOp{BinaryKind::kLessThan},
                     {i, Scalar(g, static_cast<double>(full))}));
  }

  std::vector<InstrId> init{Scalar(graph, 0.0)};
  for (const Type& t : acc_types) {
    init.push_back(graph.Add(BroadcastOp{t.shape(), {}},
                             {Scalar(graph, init_value, t.dtype())}));
  }
  init.insert(init.end(), carried.begin(), carried.end());
  InstrId tuple = graph.Add(TupleOp{}, init);
  BuiltLoop built;
  built.while_id = graph.Add(WhileOp{cond, body}, {tuple});
  std::vector<InstrId> accs;
  for (size_t i = 0; i < nacc; ++i) {
    accs.push_back(graph.Add(GetTupleElementOp{static_cast<int64_t>(1 + i)},
                             {built.while_id}));
  }

  const int64_t rem = plan.extent - full * s;
  if (rem > 0) {
    // Trailing partial chunk with static slices.
    const int64_t start = full * s;
    InstrId offset = Scalar(graph, static_cast<double>(start));
    InstrId zero = Scalar(graph, 0.0);
    std::map<InstrId, InstrId> values;
    for (InstrId prod : c.split_producers) {
      const ChunkAssignment& a = plan.assignment.at(prod);
      if (a.whole) {
        values[prod] = prod;
        continue;
      }
      const Shape& shape = graph.instr(prod).shape();
      SliceOp sl;
      for (int64_t dd = 0; dd < shape.rank(); ++dd) {
        const bool on = dd == a.dim;
        sl.starts.push_back(on ? start + a.shift : 0);
        sl.limits.push_back(on ? start + a.shift + rem : shape.dim(dd));
        sl.strides.push_back(1);
      }
      values[prod] = graph.Add(std::move(sl), {prod});
    }
    std::vector<InstrId> partials = EmitChunk(graph, graph, plan, rem, values);
    for (size_t i = 0; i < nacc; ++i) {
      accs[i] = combine(graph, accs[i], partials[i], offset, zero);
    }
  }
  built.result = root.type.IsTuple() ? graph.Add(TupleOp{}, accs) : accs[0];
  graph.ReplaceAllUsesWith(c.root, built.result);
  graph.RemoveDeadCode();
  return built;
}

std::vector<InstrId> PostOrder(const Graph& g) {
  std::vector<InstrId> out;
  std::set<InstrId> seen;
  std::vector<std::pair<InstrId, size_t>> stack;
  if (!g.Contains(g.root())) return out;
  stack.push_back({g.root(), 0});
  seen.insert(g.root());
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    const auto& ops = g.instr(id).operands;
    if (next < ops.size()) {
      const InstrId o = ops[next++];
      if (seen.insert(o).second) stack.push_back({o, 0});
      continue;
    }
    out.push_back(id);
    stack.pop_back();
  }
  return out;
}

SplitStats SplitOnce(Graph& graph, const PassConfig& config,
                     std::vector<InstrId>* loops) {
  SplitStats stats;
  int64_t loop_index = 0;
  for (InstrId id : graph.ids()) {
    if (Is<WhileOp>(graph.instr(id).op)) ++loop_index;
  }
  std::set<InstrId> tried;
  for (bool applied = true; applied;) {
    applied = false;
    for (InstrId id : PostOrder(graph)) {
      if (!IsRootKind(graph.instr(id)) || !tried.insert(id).second) continue;
      std::optional<SplitCandidate> cand = FindCandidate(graph, id, config);
      if (!cand) continue;
      SplitPlan plan;
      try {
        plan = PlanSplit(graph, *cand, config);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUnsplittableCandidate) throw;
        ++stats.unsplittable;
        continue;
      }
      BuiltLoop built = BuildLoop(graph, plan, loop_index++);
      if (loops != nullptr) loops->push_back(built.while_id);
      ++stats.applied;
      applied = true;
      break;
    }
  }
  return stats;
}

}  // namespace

std::vector<int64_t> SplittableDims(const Graph& graph, InstrId instr,
                                    int64_t operand_index) {
  const Instruction& in = graph.instr(instr);
  const auto a = static_cast<size_t>(operand_index);
  const Shape& operand = graph.instr(in.operands.at(a)).shape();
  std::set<int64_t> dims;
  if (const auto* top = std::get_if<TopKOp>(&in.op)) {
    for (int64_t d = 0; d < operand.rank(); ++d) {
      if (d != top->dim) dims.insert(d);
    }
  } else if (!in.type.IsTuple()) {
    for (int64_t j = 0; j < in.shape().rank(); ++j) {
      const DimMap m = MapDimToOperand(graph, in, j, a);
      if (m.kind == DimMap::kDim) dims.insert(m.dim);
    }
  }
  return {dims.begin(), dims.end()};
}

std::optional<SplitCandidate> FindCandidate(const Graph& graph, InstrId root,
                                            const PassConfig& config,
                                            std::string* why) {
  const int64_t t = config.tensor_size_threshold;
  const Instruction& r = graph.instr(root);
  if (!IsRootKind(r)) return Fail(why, "not a dot, reduce or topk");
  if (r.type.ByteSize() > t) {
    return Fail(why, "output of " + Id(root) + " is itself above the threshold");
  }
  SplitCandidate c;
  c.root = root;
  if (Is<DotOp>(r.op)) {
    const bool lhs = IsLarge(graph, r.operands[0], t);
    const bool rhs = IsLarge(graph, r.operands[1], t);
    if (!lhs && !rhs) return Fail(why, "no oversized operand");
    if (lhs && rhs && r.operands[0] != r.operands[1]) {
      return Fail(why, "both dot operands are oversized");
    }
    c.operand_to_split = lhs ? r.operands[0] : r.operands[1];
  } else {
    if (!IsLarge(graph, r.operands[0], t)) {
      return Fail(why, "no oversized operand");
    }
    c.operand_to_split = r.operands[0];
  }
  const InstrId o = c.operand_to_split;

  std::set<InstrId> path, inputs;
  if (InPath(graph, o, t)) {
    std::vector<InstrId> stack{o};
    while (!stack.empty()) {
      InstrId u = stack.back();
      stack.pop_back();
      if (!path.insert(u).second) continue;
      for (InstrId op : graph.instr(u).operands) {
        if (InPath(graph, op, t)) {
          stack.push_back(op);
        } else {
          inputs.insert(op);
        }
      }
    }
    const auto users = graph.Users();
    for (InstrId u : path) {
      for (InstrId w : users.at(u)) {
        if (u == o ? w != root : !path.contains(w)) {
          return Fail(why, Id(u) + " feeds " + Id(w) +
                               " outside the region; splitting would "
                               "duplicate work");
        }
      }
    }
  } else {
    inputs.insert(o);
  }
  for (InstrId op : r.operands) {
    if (op != o) inputs.insert(op);
  }
  for (InstrId in : inputs) {
    if (graph.type(in).IsTuple()) {
      return Fail(why, "region reads tuple " + Id(in));
    }
  }
  for (InstrId id : TopologicalOrderAll(graph)) {
    if (path.contains(id)) c.path.push_back(id);
  }
  c.split_producers.assign(inputs.begin(), inputs.end());

  const int64_t rank = graph.instr(o).shape().rank();
  for (int64_t d = 0; d < rank; ++d) {
    std::optional<RootUse> use = RootCompat(graph, r, o, d);
    if (!use) continue;
    std::optional<Assignment> a = Propagate(graph, c, d, *use);
    if (!a) continue;
    bool ok = true;
    for (InstrId in : inputs) {
      const ChunkAssignment& ca = a->at(in);
      if (ca.whole && IsLarge(graph, in, t)) ok = false;
    }
    if (ok) c.split_dims.push_back(d);
  }
  if (c.split_dims.empty()) {
    return Fail(why, "no dimension of " + Id(o) +
                         " is splittable along the whole path to " + Id(root));
  }
  return c;
}

SplitPlan PlanSplit(const Graph& graph, const SplitCandidate& candidate,
                    const PassConfig& config) {
  if (candidate.split_dims.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "candidate has no split dims");
  }
  const Shape& shape = graph.instr(candidate.operand_to_split).shape();
  SplitPlan plan;
  plan.candidate = candidate;
  plan.best_split_dim = candidate.split_dims[0];
  for (int64_t d : candidate.split_dims) {
    if (shape.dim(d) > shape.dim(plan.best_split_dim)) plan.best_split_dim = d;
  }
  plan.extent = shape.dim(plan.best_split_dim);
  const Instruction& root = graph.instr(candidate.root);
  auto use = RootCompat(graph, root, candidate.operand_to_split,
                        plan.best_split_dim);
  auto assign = use ? Propagate(graph, candidate, plan.best_split_dim, *use)
                    : std::nullopt;
  if (!assign) {
    throw Error(ErrorCode::kInvalidArgument,
                "candidate dim " + std::to_string(plan.best_split_dim) +
                    " does not propagate");
  }
  plan.assignment = std::move(*assign);

  int64_t unit = 0;
  std::vector<InstrId> sized = candidate.path;
  sized.push_back(candidate.operand_to_split);
  for (InstrId id : sized) {
    const Instruction& in = graph.instr(id);
    const int64_t extent = in.shape().dim(plan.assignment.at(id).dim);
    if (extent > 0) unit = std::max(unit, in.ByteSize() / extent);
  }
  const int64_t budget = config.split_size();
  const int64_t rows = unit > 0 ? budget / unit : plan.extent;
  if (rows < 1) {
    throw Error(ErrorCode::kUnsplittableCandidate,
                "UnsplittableCandidate: one slice of " +
                    Id(candidate.operand_to_split) + " along dim " +
                    std::to_string(plan.best_split_dim) + " needs " +
                    std::to_string(unit) + " bytes, above the split size " +
                    std::to_string(budget));
  }
  plan.split_size = std::min(plan.extent, rows);
  plan.trip_count = (plan.extent + plan.split_size - 1) / plan.split_size;
  plan.remainder = plan.extent % plan.split_size;
  plan.slice_bytes = unit * plan.split_size;
  return plan;
}

InstrId BuildWhile(Graph& graph, const SplitPlan& plan, int64_t loop_index) {
  return BuildLoop(graph, plan, loop_index).result;
}

SplitStats SplitPass(Graph& graph, const PassConfig& config) {
  std::vector<InstrId> loops;
  SplitStats stats = SplitOnce(graph, config, &loops);
  bool replaced = false;
  for (InstrId w : loops) {
    if (!graph.Contains(w)) continue;
    const Instruction& in = graph.instr(w);
    const auto& op = std::get<WhileOp>(in.op);
    Graph body = *op.body;
    SplitStats inner = SplitOnce(body, config, nullptr);
    stats.unsplittable += inner.unsplittable;
    if (inner.applied == 0) continue;
    stats.applied += inner.applied;
    InstrId fresh = graph.Add(
        WhileOp{op.condition, std::make_shared<const Graph>(std::move(body))},
        in.operands);
    graph.ReplaceAllUsesWith(w, fresh);
    replaced = true;
  }
  if (replaced) graph.RemoveDeadCode();
  return stats;
}

std::vector<Diagnostic> DiagnoseOversized(const Graph& graph,
                                          const PassConfig& config) {
  const int64_t t = config.tensor_size_threshold;
  std::vector<Diagnostic> out;
  const auto users = graph.Users();
  for (InstrId id : TopologicalOrder(graph)) {
    const Instruction& in = graph.instr(id);
    if (Is<WhileOp>(in.op) || Is<TupleOp>(in.op)) continue;
    int64_t bytes = 0;
    if (in.type.IsTuple()) {
      for (const Type& e : in.type.elements()) bytes = std::max(bytes, e.ByteSize());
    } else {
      bytes = in.type.ByteSize();
    }
    if (bytes <= t) continue;
    std::string reason = Id(id) + " holds " + std::to_string(bytes) +
                         " bytes, above the threshold " + std::to_string(t);
    if (Is<ParameterOp>(in.op)) {
      reason += "; parameters are never split";
    } else {
      // Nearest dot/reduce/topk downstream.
      std::deque<InstrId> queue{id};
      std::set<InstrId> seen{id};
      InstrId found = -1;
      while (!queue.empty() && found < 0) {
        InstrId u = queue.front();
        queue.pop_front();
        for (InstrId w : users.at(u)) {
          if (IsRootKind(graph.instr(w))) {
            found = w;
            break;
          }
          if (seen.insert(w).second) queue.push_back(w);
        }
      }
      if (found < 0) {
        reason += "; no dot, reduce or topk consumer";
      } else {
        std::string why;
        auto cand = FindCandidate(graph, found, config, &why);
        if (cand) {
          try {
            PlanSplit(graph, *cand, config);
            why = "split was not applied";
          } catch (const Error& e) {
            why = e.what();
          }
        }
        reason += "; " + why;
      }
    }
    out.push_back({graph.name(), id, std::move(reason)});
  }
  return out;
}

}  // namespace tb
