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

#include "tensorbudget/match_replace.h"

#include <optional>

namespace tb {
namespace {

const Instruction* Operand(const Graph& g, const Instruction& in, size_t k) {
  return &g.instr(in.operands.at(k));
}

bool IsUnary(const Instruction& in, UnaryKind kind) {
  const auto* u = std::get_if<UnaryOp>(&in.op);
  return u != nullptr && u->kind == kind;
}

bool IsBinary(const Instruction& in, BinaryKind kind) {
  const auto* b = std::get_if<BinaryOp>(&in.op);
  return b != nullptr && b->kind == kind;
}

InstrId ScalarConstant(Graph& g, DType dtype, double v) {
  return g.Add(ConstantOp{dtype, Shape{}, {v}});
}

InstrId Splat(Graph& g, DType dtype, double v, const Shape& shape) {
  return g.Add(BroadcastOp{shape, {}}, {ScalarConstant(g, dtype, v)});
}

// One side of a matched squared distance: a rank-2 operand whose dim
// `contract` lands on the reduced dim and whose other dim lands on `out_dim`.
struct DistanceSide {
  InstrId operand;
  int64_t contract;
  int64_t out_dim;
};

struct DistanceMatch {
  DistanceSide lhs, rhs;  // lhs owns the lower result dim.
};

std::optional<DistanceMatch> MatchDistance(const Graph& g, InstrId id) {
  const Instruction& r = g.instr(id);
  const auto* red = std::get_if<ReduceOp>(&r.op);
  if (red == nullptr || red->kind != ReduceKind::kSum || red->dims.size() != 1) {
    return std::nullopt;
  }
  const int64_t k = red->dims[0];
  const Instruction* sq = Operand(g, r, 0);
  if (!IsUnary(*sq, UnaryKind::kSquare) || sq->shape().rank() != 3) {
    return std::nullopt;
  }
  const Instruction* sub = Operand(g, *sq, 0);
  if (!IsBinary(*sub, BinaryKind::kSub)) return std::nullopt;
  DistanceSide sides[2];
  for (size_t s = 0; s < 2; ++s) {
    const Instruction* bc = Operand(g, *sub, s);
    const auto* op = std::get_if<BroadcastOp>(&bc->op);
    if (op == nullptr || op->mapped_dims.size() != 2) return std::nullopt;
    const int64_t c = op->mapped_dims[0] == k ? 0 : op->mapped_dims[1] == k ? 1 : -1;
    if (c < 0) return std::nullopt;
    const int64_t other = op->mapped_dims[static_cast<size_t>(1 - c)];
    sides[s] = {bc->operands[0], c, other < k ? other : other - 1};
  }
  if (sides[0].out_dim == sides[1].out_dim) return std::nullopt;
  if (sides[0].out_dim > sides[1].out_dim) std::swap(sides[0], sides[1]);
  return DistanceMatch{sides[0], sides[1]};
}

InstrId BuildDistance(Graph& g, InstrId id) {
  const DistanceMatch m = *MatchDistance(g, id);
  const Shape out_shape = g.instr(id).shape();
  const DType dt = g.instr(id).dtype();
  auto sum_sq = [&](const DistanceSide& s) {
    InstrId sq = g.Add(UnaryOp{UnaryKind::kSquare}, {s.operand});
    return g.Add(ReduceOp{ReduceKind::kSum, {s.contract}}, {sq});
  };
  // Norm terms first so at most three result-sized buffers are ever live.
  InstrId ll = sum_sq(m.lhs);
  InstrId rr = sum_sq(m.rhs);
  InstrId bl = g.Add(BroadcastOp{out_shape, {0}}, {ll});
  InstrId br = g.Add(BroadcastOp{out_shape, {1}}, {rr});
  InstrId norms = g.Add(BinaryOp{BinaryKind::kAdd}, {bl, br});
  const Shape& rhs_shape = g.instr(m.rhs.operand).shape();
  InstrId scaled = g.Add(BinaryOp{BinaryKind::kMul},
                         {m.rhs.operand, Splat(g, dt, -2.0, rhs_shape)});
  InstrId cross = g.Add(DotOp{{m.lhs.contract}, {m.rhs.contract}, {}, {}},
                        {m.lhs.operand, scaled});
  InstrId out = g.Add(BinaryOp{BinaryKind::kAdd}, {norms, cross});

  const auto users = g.Users();
  const auto& us = users.at(id);
  bool all_sqrt = !us.empty();
  for (InstrId u : us) all_sqrt = all_sqrt && IsUnary(g.instr(u), UnaryKind::kSqrt);
  if (all_sqrt) {
    out = g.Add(BinaryOp{BinaryKind::kMax}, {out, Splat(g, dt, 0.0, out_shape)});
  }
  return out;
}

bool IsSquareIota(const Instruction& in, int64_t dim, int64_t n) {
  const auto* io = std::get_if<IotaOp>(&in.op);
  return io != nullptr && io->dim == dim && io->shape == Shape{n, n};
}

struct DiagonalMatch {
  InstrId matrix;
  InstrId scalar;
};

std::optional<DiagonalMatch> MatchDiagonal(const Graph& g, InstrId id) {
  const Instruction& add = g.instr(id);
  if (!IsBinary(add, BinaryKind::kAdd)) return std::nullopt;
  const Shape& s = add.shape();
  if (s.rank() != 2 || s.dim(0) != s.dim(1)) return std::nullopt;
  const int64_t n = s.dim(0);
  for (size_t mi = 0; mi < 2; ++mi) {
    const Instruction* mul = Operand(g, add, 1 - mi);
    if (!IsBinary(*mul, BinaryKind::kMul)) continue;
    for (size_t bi = 0; bi < 2; ++bi) {
      const Instruction* bc = Operand(g, *mul, bi);
      const Instruction* eq = Operand(g, *mul, 1 - bi);
      const auto* bop = std::get_if<BroadcastOp>(&bc->op);
      if (bop == nullptr || !Operand(g, *bc, 0)->shape().dims().empty()) continue;
      if (!IsBinary(*eq, BinaryKind::kEqual)) continue;
      const Instruction* a = Operand(g, *eq, 0);
      const Instruction* b = Operand(g, *eq, 1);
      if ((IsSquareIota(*a, 0, n) && IsSquareIota(*b, 1, n)) ||
          (IsSquareIota(*a, 1, n) && IsSquareIota(*b, 0, n))) {
        return DiagonalMatch{add.operands[mi], bc->operands[0]};
      }
    }
  }
  return std::nullopt;
}

}  // namespace

RewriteRule SquareRule() {
  return {"square",
          [](const Graph& g, InstrId id) {
            const Instruction& in = g.instr(id);
            return IsBinary(in, BinaryKind::kMul) &&
                   in.operands[0] == in.operands[1];
          },
          [](Graph& g, InstrId id) {
            return g.Add(UnaryOp{UnaryKind::kSquare}, {g.instr(id).operands[0]});
          }};
}

RewriteRule SubtractRule() {
  auto neg_side = [](const Graph& g, InstrId id) -> int {
    const Instruction& in = g.instr(id);
    if (!IsBinary(in, BinaryKind::kAdd)) return -1;
    if (IsUnary(g.instr(in.operands[1]), UnaryKind::kNeg)) return 1;
    if (IsUnary(g.instr(in.operands[0]), UnaryKind::kNeg)) return 0;
    return -1;
  };
  return {"subtract",
          [neg_side](const Graph& g, InstrId id) { return neg_side(g, id) >= 0; },
          [neg_side](Graph& g, InstrId id) {
            const int side = neg_side(g, id);
            const Instruction& in = g.instr(id);
            InstrId a = in.operands[static_cast<size_t>(1 - side)];
            InstrId b = g.instr(in.operands[static_cast<size_t>(side)]).operands[0];
            return g.Add(BinaryOp{BinaryKind::kSub}, {a, b});
          }};
}

RewriteRule EuclideanDistanceRule() {
  return {"euclidean_distance",
          [](const Graph& g, InstrId id) {
            return MatchDistance(g, id).has_value();
          },
          BuildDistance};
}

RewriteRule AddDiagonalRule() {
  return {"add_diagonal",
          [](const Graph& g, InstrId id) {
            return MatchDiagonal(g, id).has_value();
          },
          [](Graph& g, InstrId id) {
            const DiagonalMatch m = *MatchDiagonal(g, id);
            return g.Add(AddDiagonalOp{}, {m.matrix, m.scalar});
          }};
}

int ApplyRules(Graph& graph, const std::vector<RewriteRule>& rules) {
  int total = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (InstrId id : TopologicalOrder(graph)) {
      for (const RewriteRule& rule : rules) {
        if (!rule.matches(graph, id)) continue;
        InstrId replacement = rule.build(graph, id);
        graph.ReplaceAllUsesWith(id, replacement);
        ++total;
        changed = true;
        break;
      }
    }
    graph.RemoveDeadCode();
  }
  return total;
}

int Canonicalize(Graph& graph) {
  return ApplyRules(graph, {SquareRule(), SubtractRule()});
}

int RewriteEuclideanDistance(Graph& graph) {
  return ApplyRules(graph, {EuclideanDistanceRule()});
}

int RewriteAddDiagonal(Graph& graph) {
  return ApplyRules(graph, {AddDiagonalRule()});
}

int MatchReplacePass(Graph& graph) {
  int n = Canonicalize(graph);
  n += RewriteEuclideanDistance(graph);
  n += RewriteAddDiagonal(graph);
  return n;
}

}  // namespace tb
