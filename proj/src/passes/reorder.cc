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

#include "tensorbudget/reorder.h"

#include <algorithm>

namespace tb {

Parenthesization Parenthesization::Leaf(int64_t factor) {
  Parenthesization p;
  p.factor = factor;
  return p;
}

Parenthesization Parenthesization::Product(Parenthesization left,
                                           Parenthesization right) {
  Parenthesization p;
  p.left = std::make_shared<const Parenthesization>(std::move(left));
  p.right = std::make_shared<const Parenthesization>(std::move(right));
  return p;
}

Parenthesization Parenthesization::LeftToRight(int64_t factors) {
  Parenthesization p = Leaf(0);
  for (int64_t i = 1; i < factors; ++i) p = Product(std::move(p), Leaf(i));
  return p;
}

Parenthesization Parenthesization::RightToLeft(int64_t factors) {
  Parenthesization p = Leaf(factors - 1);
  for (int64_t i = factors - 2; i >= 0; --i) p = Product(Leaf(i), std::move(p));
  return p;
}

std::string Parenthesization::ToString() const {
  if (IsLeaf()) return std::to_string(factor);
  return "(" + left->ToString() + " " + right->ToString() + ")";
}

bool operator==(const Parenthesization& a, const Parenthesization& b) {
  if (a.IsLeaf() || b.IsLeaf()) return a.factor == b.factor;
  return *a.left == *b.left && *a.right == *b.right;
}

namespace {

bool IsMatmul(const Instruction& in) {
  const auto* d = std::get_if<DotOp>(&in.op);
  return d != nullptr && d->lhs_batch.empty() && d->rhs_batch.empty() &&
         d->lhs_contracting == std::vector<int64_t>{1} &&
         d->rhs_contracting == std::vector<int64_t>{0};
}

class ChainBuilder {
 public:
  ChainBuilder(const Graph& g, const std::map<InstrId, std::vector<InstrId>>& users)
      : g_(g), users_(users) {}

  bool Absorbable(InstrId child, InstrId parent) const {
    if (child == g_.root() || !IsMatmul(g_.instr(child)) ||
        !IsMatmul(g_.instr(parent))) {
      return false;
    }
    const auto& us = users_.at(child);
    return us.size() == 1 && us[0] == parent &&
           std::count(g_.instr(parent).operands.begin(),
                      g_.instr(parent).operands.end(), child) == 1;
  }

  Parenthesization Flatten(InstrId id, MatmulChain& chain) const {
    const Instruction& in = g_.instr(id);
    Parenthesization sides[2];
    for (size_t k = 0; k < 2; ++k) {
      const InstrId op = in.operands[k];
      if (Absorbable(op, id)) {
        sides[k] = Flatten(op, chain);
      } else {
        sides[k] = Parenthesization::Leaf(
            static_cast<int64_t>(chain.factors.size()));
        chain.factors.push_back(op);
        chain.shapes.push_back(g_.instr(op).shape());
      }
    }
    return Parenthesization::Product(std::move(sides[0]), std::move(sides[1]));
  }

 private:
  const Graph& g_;
  const std::map<InstrId, std::vector<InstrId>>& users_;
};

Shape ProductShape(const MatmulChain& c, int64_t first, int64_t last) {
  const bool vec = c.vector_tail && last + 1 == static_cast<int64_t>(c.factors.size());
  if (vec) return Shape{c.dims[static_cast<size_t>(first)]};
  return Shape{c.dims[static_cast<size_t>(first)],
               c.dims[static_cast<size_t>(last) + 1]};
}

// Returns the [first, last] factor span of `t` and folds the peak over its
// internal products into `peak`.
std::pair<int64_t, int64_t> Walk(const MatmulChain& c, const Parenthesization& t,
                                 bool is_root, int64_t& peak) {
  if (t.IsLeaf()) return {t.factor, t.factor};
  auto l = Walk(c, *t.left, false, peak);
  auto r = Walk(c, *t.right, false, peak);
  if (!is_root) {
    peak = std::max(peak, ProductShape(c, l.first, r.second).ByteSize(c.dtype));
  }
  return {l.first, r.second};
}

InstrId Emit(Graph& g, const MatmulChain& c, const Parenthesization& t,
             const std::map<InstrId, InstrId>& replaced) {
  if (t.IsLeaf()) {
    const InstrId f = c.factors[static_cast<size_t>(t.factor)];
    auto it = replaced.find(f);
    return it == replaced.end() ? f : it->second;
  }
  InstrId l = Emit(g, c, *t.left, replaced);
  InstrId r = Emit(g, c, *t.right, replaced);
  return g.Add(DotOp{{1}, {0}, {}, {}}, {l, r});
}

}  // namespace

std::vector<MatmulChain> DetectChains(const Graph& graph) {
  const auto users = graph.Users();
  ChainBuilder builder(graph, users);
  std::vector<MatmulChain> chains;
  for (InstrId id : TopologicalOrder(graph)) {
    const Instruction& in = graph.instr(id);
    if (!IsMatmul(in)) continue;
    bool absorbed = false;
    for (InstrId u : users.at(id)) absorbed = absorbed || builder.Absorbable(id, u);
    if (absorbed) continue;
    MatmulChain chain;
    chain.root = id;
    chain.dtype = in.dtype();
    chain.source = builder.Flatten(id, chain);
    bool ok = true;
    for (size_t i = 0; i < chain.shapes.size(); ++i) {
      const Shape& s = chain.shapes[i];
      const bool last = i + 1 == chain.shapes.size();
      if (s.rank() == 1 && last) {
        chain.vector_tail = true;
        if (chain.dims.empty()) chain.dims.push_back(s.dim(0));
        chain.dims.push_back(1);
      } else if (s.rank() == 2) {
        if (chain.dims.empty()) chain.dims.push_back(s.dim(0));
        chain.dims.push_back(s.dim(1));
      } else {
        ok = false;
      }
    }
    if (ok) chains.push_back(std::move(chain));
  }
  return chains;
}

int64_t PeakIntermediateBytes(const MatmulChain& chain,
                              const Parenthesization& tree) {
  int64_t peak = 0;
  Walk(chain, tree, true, peak);
  return peak;
}

Parenthesization ReorderChain(const MatmulChain& chain) {
  const auto k = static_cast<int64_t>(chain.factors.size());
  if (k < 3) return chain.source;
  const int64_t tail = chain.dims.back();
  for (int64_t i = 1; i < k; ++i) {
    if (chain.dims[static_cast<size_t>(i)] <= tail) return chain.source;
  }
  Parenthesization rtl = Parenthesization::RightToLeft(k);
  if (PeakIntermediateBytes(chain, rtl) <
      PeakIntermediateBytes(chain, chain.source)) {
    return rtl;
  }
  return chain.source;
}

int ReorderPass(Graph& graph) {
  int rewritten = 0;
  // Chains come in topological order, so a chain rooted at another chain's
  // factor is rewritten first.
  std::map<InstrId, InstrId> replaced;
  for (const MatmulChain& chain : DetectChains(graph)) {
    Parenthesization tree = ReorderChain(chain);
    if (tree == chain.source) continue;
    const InstrId root = Emit(graph, chain, tree, replaced);
    graph.ReplaceAllUsesWith(chain.root, root);
    replaced[chain.root] = root;
    ++rewritten;
  }
  if (rewritten > 0) graph.RemoveDeadCode();
  return rewritten;
}

}  // namespace tb
