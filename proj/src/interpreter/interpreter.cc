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

#include "tensorbudget/interpreter.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>

#include "kernels.h"
#include "tensorbudget/status.h"

namespace tb {
namespace {

class Tracker {
 public:
  Tracker(int64_t budget, bool record) : budget_(budget), record_(record) {}

  int32_t ComputationIndex(const Graph* graph) {
    auto [it, inserted] = comp_index_.try_emplace(
        graph, static_cast<int32_t>(trace_.computations.size()));
    if (inserted) trace_.computations.push_back(graph->name());
    return it->second;
  }

  void Alloc(int32_t comp, InstrId id, int64_t bytes) {
    if (bytes > budget_ - live_) throw BudgetExceeded(id, bytes, live_, budget_);
    live_ += bytes;
    trace_.peak_live_bytes = std::max(trace_.peak_live_bytes, live_);
    Record(comp, id, MemoryEvent::Kind::kAlloc, bytes);
  }

  void Free(int32_t comp, InstrId id, int64_t bytes) noexcept {
    live_ -= bytes;
    Record(comp, id, MemoryEvent::Kind::kFree, bytes);
  }

  int64_t live() const { return live_; }
  MemoryTrace TakeTrace() { return std::move(trace_); }

 private:
  void Record(int32_t comp, InstrId id, MemoryEvent::Kind kind,
              int64_t bytes) noexcept {
    if (!record_) return;
    try {
      trace_.events.push_back({comp, id, kind, bytes, live_});
    } catch (...) {
      record_ = false;
    }
  }

  int64_t budget_;
  bool record_;
  int64_t live_ = 0;
  MemoryTrace trace_;
  std::unordered_map<const Graph*, int32_t> comp_index_;
};

// One allocation. The destructor records the matching free, so buffer
// lifetime in the trace is exactly shared_ptr lifetime.
struct Buffer {
  Buffer(Tracker* tracker, int32_t comp, InstrId id, int64_t bytes)
      : tracker(tracker), comp(comp), id(id), bytes(bytes) {}
  ~Buffer() { tracker->Free(comp, id, bytes); }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;

  Tracker* tracker;
  int32_t comp;
  InstrId id;
  int64_t bytes;
  TensorValue value;  // Empty when simulating.
};

using BufferRef = std::shared_ptr<Buffer>;

struct Value {
  std::vector<BufferRef> leaves;
  bool tuple = false;

  bool empty() const { return leaves.empty() && !tuple; }
};

struct Schedule {
  std::vector<InstrId> order;
  // release[p] lists instructions whose last use is order[p].
  std::vector<std::vector<InstrId>> release;
  std::unordered_map<InstrId, size_t> last_use;
};

class Engine {
 public:
  Engine(Tracker* tracker, bool simulate)
      : tracker_(tracker), simulate_(simulate) {}

  // Runs `graph` with `args` bound to its parameters. At top level the
  // parameters are materialized from `host_inputs` instead.
  Value Run(const Graph& graph, std::vector<Value> args,
            std::span<const TensorValue> host_inputs) {
    const Schedule& sched = ScheduleFor(graph);
    const int32_t comp = tracker_->ComputationIndex(&graph);
    std::unordered_map<InstrId, Value> slots;
    for (size_t pos = 0; pos < sched.order.size(); ++pos) {
      const InstrId id = sched.order[pos];
      const Instruction& in = graph.instr(id);
      Value result = Execute(graph, comp, in, pos, sched, slots, args,
                             host_inputs);
      slots[id] = std::move(result);
      for (InstrId dead : sched.release[pos]) slots.erase(dead);
    }
    args.clear();
    auto it = slots.find(graph.root());
    if (it == slots.end()) {
      throw Error(ErrorCode::kInternal, "root was not computed");
    }
    return std::move(it->second);
  }

 private:
  const Schedule& ScheduleFor(const Graph& graph) {
    auto it = schedules_.find(&graph);
    if (it != schedules_.end()) return it->second;
    Schedule s;
    s.order = TopologicalOrder(graph);
    s.release.resize(s.order.size());
    for (size_t pos = 0; pos < s.order.size(); ++pos) {
      for (InstrId op : graph.instr(s.order[pos]).operands) s.last_use[op] = pos;
    }
    for (const auto& [id, pos] : s.last_use) {
      if (id != graph.root()) s.release[pos].push_back(id);
    }
    for (auto& r : s.release) std::sort(r.begin(), r.end());
    return schedules_.emplace(&graph, std::move(s)).first->second;
  }

  BufferRef Allocate(int32_t comp, const Instruction& in, DType dtype,
                     const Shape& shape) {
    const int64_t bytes = Type(dtype, shape).ByteSize();
    tracker_->Alloc(comp, in.id, bytes);
    auto buf = std::make_shared<Buffer>(tracker_, comp, in.id, bytes);
    if (!simulate_) buf->value = TensorValue(dtype, shape);
    return buf;
  }

  static const Value& Slot(const std::unordered_map<InstrId, Value>& slots,
                           InstrId id) {
    auto it = slots.find(id);
    if (it == slots.end()) {
      throw Error(ErrorCode::kInternal,
                  "read of released or missing value %" + std::to_string(id));
    }
    return it->second;
  }

  static const TensorValue& Array(
      const std::unordered_map<InstrId, Value>& slots, InstrId id) {
    const Value& v = Slot(slots, id);
    if (v.tuple || v.leaves.size() != 1) {
      throw Error(ErrorCode::kInternal, "expected array value");
    }
    return v.leaves[0]->value;
  }

  static Value Single(BufferRef b) {
    Value v;
    v.leaves.push_back(std::move(b));
    return v;
  }

  // True when `in` is the last reader of operand `k` and reads it only once,
  // so the slot may be consumed.
  static bool CanConsume(const Instruction& in, size_t k, size_t pos,
                         const Schedule& sched, const Graph& graph) {
    const InstrId op = in.operands[k];
    if (op == graph.root()) return false;
    if (std::count(in.operands.begin(), in.operands.end(), op) != 1) {
      return false;
    }
    return sched.last_use.at(op) == pos;
  }

  std::vector<int64_t> StartIndices(
      const std::unordered_map<InstrId, Value>& slots, const Instruction& in,
      size_t first, const Shape& operand, const Shape& window) const {
    std::vector<int64_t> starts(static_cast<size_t>(operand.rank()), 0);
    if (simulate_) return starts;
    for (int64_t d = 0; d < operand.rank(); ++d) {
      const double raw =
          Array(slots, in.operands[first + static_cast<size_t>(d)]).at(0);
      const int64_t hi = operand.dim(d) - window.dim(d);
      int64_t s = std::isfinite(raw) ? static_cast<int64_t>(std::llround(
                                           std::clamp(raw, -1e18, 1e18)))
                                     : 0;
      starts[static_cast<size_t>(d)] = std::clamp<int64_t>(s, 0, hi);
    }
    return starts;
  }

  Value Execute(const Graph& graph, int32_t comp, const Instruction& in,
                size_t pos, const Schedule& sched,
                std::unordered_map<InstrId, Value>& slots,
                std::vector<Value>& args,
                std::span<const TensorValue> host_inputs) {
    const bool top_level = args.empty();
    auto arr = [&](size_t k) -> const TensorValue& {
      return Array(slots, in.operands[k]);
    };
    auto fresh = [&]() { return Allocate(comp, in, in.dtype(), in.shape()); };

    return std::visit(
        [&](const auto& op) -> Value {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, ParameterOp>) {
            if (!top_level) {
              auto idx = static_cast<size_t>(op.index);
              if (idx >= args.size()) {
                throw Error(ErrorCode::kInternal, "missing sub-graph argument");
              }
              return std::move(args[idx]);
            }
            BufferRef b = fresh();
            if (!simulate_) {
              b->value = host_inputs[static_cast<size_t>(op.index)];
            }
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, ConstantOp>) {
            BufferRef b = fresh();
            if (!simulate_) kernels::Constant(op, b->value);
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, IotaOp>) {
            BufferRef b = fresh();
            if (!simulate_) kernels::Iota(op, b->value);
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, UnaryOp>) {
            BufferRef b = fresh();
            if (!simulate_) kernels::Unary(op.kind, arr(0), b->value);
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, BinaryOp>) {
            BufferRef b = fresh();
            if (!simulate_) {
              if (op.kind == BinaryKind::kDiv) CheckDivision(in, arr(0), arr(1));
              kernels::Binary(op.kind, arr(0), arr(1), b->value);
            }
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, BroadcastOp>) {
            BufferRef b = fresh();
            if (!simulate_) kernels::Broadcast(op, arr(0), b->value);
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, ReduceOp>) {
            BufferRef b = fresh();
            if (!simulate_) kernels::Reduce(op, arr(0), b->value);
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, DotOp>) {
            BufferRef b = fresh();
            if (!simulate_) kernels::Dot(op, arr(0), arr(1), b->value);
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, TransposeOp>) {
            BufferRef b = fresh();
            if (!simulate_) kernels::Transpose(op, arr(0), b->value);
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, SliceOp>) {
            BufferRef b = fresh();
            if (!simulate_) kernels::Slice(op, arr(0), b->value);
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, DynamicSliceOp>) {
            const Shape& src = graph.instr(in.operands[0]).shape();
            auto starts = StartIndices(slots, in, 1, src, in.shape());
            BufferRef b = fresh();
            if (!simulate_) kernels::DynamicSlice(starts, arr(0), b->value);
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, DynamicUpdateSliceOp>) {
            const Shape& dst = in.shape();
            const Shape& upd = graph.instr(in.operands[1]).shape();
            auto starts = StartIndices(slots, in, 2, dst, upd);
            BufferRef target;
            if (CanConsume(in, 0, pos, sched, graph)) {
              Value& v = slots.at(in.operands[0]);
              if (v.leaves.size() == 1 && v.leaves[0].use_count() == 1) {
                target = std::move(v.leaves[0]);
                v.leaves.clear();
              }
            }
            if (!target) {
              target = fresh();
              if (!simulate_) kernels::Copy(arr(0), target->value);
            }
            if (!simulate_) {
              kernels::DynamicUpdateSlice(starts, arr(1), target->value);
            }
            return Single(std::move(target));
          } else if constexpr (std::is_same_v<T, ConcatOp>) {
            BufferRef b = fresh();
            if (!simulate_) {
              std::vector<const TensorValue*> xs;
              for (size_t k = 0; k < in.operands.size(); ++k) {
                xs.push_back(&arr(k));
              }
              kernels::Concat(op.dim, xs, b->value);
            }
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, TopKOp>) {
            const auto& elems = in.type.elements();
            BufferRef v = Allocate(comp, in, elems[0].dtype(), elems[0].shape());
            BufferRef i = Allocate(comp, in, elems[1].dtype(), elems[1].shape());
            if (!simulate_) kernels::TopK(op, arr(0), v->value, i->value);
            Value out;
            out.tuple = true;
            out.leaves = {std::move(v), std::move(i)};
            return out;
          } else if constexpr (std::is_same_v<T, TriangularSolveOp>) {
            BufferRef b = fresh();
            if (!simulate_) {
              kernels::TriangularSolve(op.lower, arr(0), arr(1), b->value);
            }
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, AddDiagonalOp>) {
            BufferRef b = fresh();
            if (!simulate_) kernels::AddDiagonal(arr(0), arr(1), b->value);
            return Single(std::move(b));
          } else if constexpr (std::is_same_v<T, TupleOp>) {
            Value out;
            out.tuple = true;
            for (InstrId o : in.operands) {
              const Value& v = Slot(slots, o);
              out.leaves.insert(out.leaves.end(), v.leaves.begin(),
                                v.leaves.end());
            }
            return out;
          } else if constexpr (std::is_same_v<T, GetTupleElementOp>) {
            const Value& v = Slot(slots, in.operands[0]);
            return Single(v.leaves.at(static_cast<size_t>(op.index)));
          } else if constexpr (std::is_same_v<T, WhileOp>) {
            return RunWhile(graph, op, in, pos, sched, slots);
          }
        },
        in.op);
  }

  Value RunWhile(const Graph& graph, const WhileOp& op, const Instruction& in,
                 size_t pos, const Schedule& sched,
                 std::unordered_map<InstrId, Value>& slots) {
    Value state;
    if (CanConsume(in, 0, pos, sched, graph)) {
      state = std::move(slots.at(in.operands[0]));
    } else {
      state = Slot(slots, in.operands[0]);
    }
    auto step = [&](Value s) {
      std::vector<Value> a;
      a.push_back(std::move(s));
      return Run(*op.body, std::move(a), {});
    };
    auto check = [&](const Value& s) {
      std::vector<Value> a;
      a.push_back(s);
      Value c = Run(*op.condition, std::move(a), {});
      if (simulate_) return false;
      return c.leaves.at(0)->value.at(0) != 0.0;
    };
    if (simulate_) {
      std::optional<int64_t> trips = StaticTripCount(graph, in.id);
      if (!trips) {
        throw Error(ErrorCode::kUnimplemented,
                    "peak estimate needs a static trip count for %" +
                        std::to_string(in.id));
      }
      for (int64_t t = 0; t < *trips; ++t) {
        check(state);
        state = step(std::move(state));
      }
      check(state);
      return state;
    }
    while (check(state)) state = step(std::move(state));
    return state;
  }

  static void CheckDivision(const Instruction& in, const TensorValue& a,
                            const TensorValue& b) {
    for (int64_t i = 0; i < a.size(); ++i) {
      if (a.at(i) == 0.0 && b.at(i) == 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "0/0 in div %" + std::to_string(in.id) +
                        " (zero-norm input?)");
      }
    }
  }

  Tracker* tracker_;
  bool simulate_;
  std::unordered_map<const Graph*, Schedule> schedules_;
};

void CheckInputs(const Graph& graph, std::span<const TensorValue> inputs) {
  const auto params = graph.parameters();
  if (params.size() != inputs.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "expected " + std::to_string(params.size()) + " inputs, got " +
                    std::to_string(inputs.size()));
  }
  for (const ParameterInfo& p : params) {
    const TensorValue& v = inputs[static_cast<size_t>(p.index)];
    if (p.type.IsTuple() || p.type.dtype() != v.dtype() ||
        p.type.shape() != v.shape()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "input " + std::to_string(p.index) + " is (" +
                      v.shape().ToString() + "," +
                      std::string(DTypeName(v.dtype())) + "), expected " +
                      p.type.ToString());
    }
  }
}

}  // namespace

EvaluationResult Evaluate(const Graph& graph,
                          std::span<const TensorValue> inputs,
                          int64_t budget) {
  CheckInputs(graph, inputs);
  Tracker tracker(budget, /*record=*/true);
  EvaluationResult result;
  {
    Engine engine(&tracker, /*simulate=*/false);
    Value root = engine.Run(graph, {}, inputs);
    for (const BufferRef& b : root.leaves) result.outputs.push_back(b->value);
  }
  result.trace = tracker.TakeTrace();
  return result;
}

int64_t EstimatePeakMemory(const Graph& graph) {
  Tracker tracker(kUnlimitedBudget, /*record=*/false);
  {
    Engine engine(&tracker, /*simulate=*/true);
    engine.Run(graph, {}, {});
  }
  return tracker.TakeTrace().peak_live_bytes;
}

}  // namespace tb
