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

#include "kernels.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tensorbudget/status.h"

namespace tb::kernels {
namespace {

template <typename F>
decltype(auto) WithType(DType dtype, F&& f) {
  if (dtype == DType::kF32) return f(float{});
  return f(double{});
}

std::vector<int64_t> RowMajorStrides(const Shape& shape) {
  std::vector<int64_t> strides(static_cast<size_t>(shape.rank()), 1);
  for (int64_t d = shape.rank() - 2; d >= 0; --d) {
    strides[static_cast<size_t>(d)] =
        strides[static_cast<size_t>(d) + 1] * shape.dim(d + 1);
  }
  return strides;
}

// dst[i] = src[base + sum_d idx_d * src_strides[d]] for every index of
// `shape`, visiting dst in row-major order.
template <typename T>
void Gather(const T* src, int64_t base, const std::vector<int64_t>& src_strides,
            const Shape& shape, T* dst) {
  const int64_t rank = shape.rank();
  if (shape.ElementCount() == 0) return;
  if (rank == 0) {
    dst[0] = src[base];
    return;
  }
  const int64_t inner = shape.dim(rank - 1);
  const int64_t inner_stride = src_strides.back();
  std::vector<int64_t> idx(static_cast<size_t>(rank), 0);
  int64_t offset = base;
  int64_t out = 0;
  while (true) {
    if (inner_stride == 1) {
      std::copy(src + offset, src + offset + inner, dst + out);
    } else {
      for (int64_t j = 0; j < inner; ++j) dst[out + j] = src[offset + j * inner_stride];
    }
    out += inner;
    int64_t d = rank - 2;
    for (; d >= 0; --d) {
      const auto ud = static_cast<size_t>(d);
      ++idx[ud];
      offset += src_strides[ud];
      if (idx[ud] < shape.dim(d)) break;
      offset -= src_strides[ud] * idx[ud];
      idx[ud] = 0;
    }
    if (d < 0) return;
  }
}

// dst[base + sum_d idx_d * dst_strides[d]] = src[i], the inverse of Gather.
template <typename T>
void Scatter(const T* src, const Shape& shape, T* dst, int64_t base,
             const std::vector<int64_t>& dst_strides) {
  const int64_t rank = shape.rank();
  if (shape.ElementCount() == 0) return;
  if (rank == 0) {
    dst[base] = src[0];
    return;
  }
  const int64_t inner = shape.dim(rank - 1);
  const int64_t inner_stride = dst_strides.back();
  std::vector<int64_t> idx(static_cast<size_t>(rank), 0);
  int64_t offset = base;
  int64_t in = 0;
  while (true) {
    for (int64_t j = 0; j < inner; ++j) dst[offset + j * inner_stride] = src[in + j];
    in += inner;
    int64_t d = rank - 2;
    for (; d >= 0; --d) {
      const auto ud = static_cast<size_t>(d);
      ++idx[ud];
      offset += dst_strides[ud];
      if (idx[ud] < shape.dim(d)) break;
      offset -= dst_strides[ud] * idx[ud];
      idx[ud] = 0;
    }
    if (d < 0) return;
  }
}

template <typename T>
T ApplyUnary(UnaryKind kind, T x) {
  switch (kind) {
    case UnaryKind::kNeg:
      return -x;
    case UnaryKind::kExp:
      return std::exp(x);
    case UnaryKind::kAbs:
      return std::abs(x);
    case UnaryKind::kSquare:
      return x * x;
    case UnaryKind::kSqrt:
      return std::sqrt(x);
    case UnaryKind::kReciprocal:
      return T(1) / x;
  }
  return x;
}

template <typename T, typename F>
void Zip(const std::vector<T>& a, const std::vector<T>& b, std::vector<T>& o,
         F f) {
  const size_t n = o.size();
  for (size_t i = 0; i < n; ++i) o[i] = f(a[i], b[i]);
}

}  // namespace

void Copy(const TensorValue& x, TensorValue& out) {
  WithType(x.dtype(), [&](auto t) {
    using T = decltype(t);
    out.data<T>() = x.data<T>();
  });
}

void Constant(const ConstantOp& op, TensorValue& out) {
  for (int64_t i = 0; i < out.size(); ++i) {
    out.set(i, op.values[static_cast<size_t>(i)]);
  }
}

void Iota(const IotaOp& op, TensorValue& out) {
  WithType(op.dtype, [&](auto t) {
    using T = decltype(t);
    auto& o = out.data<T>();
    const auto strides = RowMajorStrides(op.shape);
    const int64_t stride = strides[static_cast<size_t>(op.dim)];
    const int64_t extent = op.shape.dim(op.dim);
    for (size_t i = 0; i < o.size(); ++i) {
      o[i] = static_cast<T>((static_cast<int64_t>(i) / stride) % extent);
    }
  });
}

void Unary(UnaryKind kind, const TensorValue& x, TensorValue& out) {
  WithType(x.dtype(), [&](auto t) {
    using T = decltype(t);
    const auto& in = x.data<T>();
    auto& o = out.data<T>();
    switch (kind) {
      case UnaryKind::kExp:
        for (size_t i = 0; i < o.size(); ++i) o[i] = std::exp(in[i]);
        break;
      case UnaryKind::kSquare:
        for (size_t i = 0; i < o.size(); ++i) o[i] = in[i] * in[i];
        break;
      default:
        for (size_t i = 0; i < o.size(); ++i) o[i] = ApplyUnary(kind, in[i]);
    }
  });
}

void Binary(BinaryKind kind, const TensorValue& a, const TensorValue& b,
            TensorValue& out) {
  WithType(a.dtype(), [&](auto t) {
    using T = decltype(t);
    const auto& x = a.data<T>();
    const auto& y = b.data<T>();
    auto& o = out.data<T>();
    switch (kind) {
      case BinaryKind::kAdd:
        Zip(x, y, o, [](T p, T q) { return p + q; });
        break;
      case BinaryKind::kSub:
        Zip(x, y, o, [](T p, T q) { return p - q; });
        break;
      case BinaryKind::kMul:
        Zip(x, y, o, [](T p, T q) { return p * q; });
        break;
      case BinaryKind::kDiv:
        Zip(x, y, o, [](T p, T q) { return p / q; });
        break;
      case BinaryKind::kPow:
        Zip(x, y, o, [](T p, T q) { return static_cast<T>(std::pow(p, q)); });
        break;
      case BinaryKind::kMax:
        Zip(x, y, o, [](T p, T q) { return p < q ? q : p; });
        break;
      case BinaryKind::kMin:
        Zip(x, y, o, [](T p, T q) { return q < p ? q : p; });
        break;
      case BinaryKind::kLessThan:
        Zip(x, y, o, [](T p, T q) { return p < q ? T(1) : T(0); });
        break;
      case BinaryKind::kEqual:
        Zip(x, y, o, [](T p, T q) { return p == q ? T(1) : T(0); });
        break;
    }
  });
}

void Broadcast(const BroadcastOp& op, const TensorValue& x, TensorValue& out) {
  const auto src_strides = RowMajorStrides(x.shape());
  std::vector<int64_t> strides(static_cast<size_t>(op.shape.rank()), 0);
  for (size_t i = 0; i < op.mapped_dims.size(); ++i) {
    strides[static_cast<size_t>(op.mapped_dims[i])] = src_strides[i];
  }
  WithType(x.dtype(), [&](auto t) {
    using T = decltype(t);
    Gather(x.data<T>().data(), 0, strides, op.shape, out.data<T>().data());
  });
}

void Reduce(const ReduceOp& op, const TensorValue& x, TensorValue& out) {
  const Shape& in_shape = x.shape();
  const auto out_strides_dense = RowMajorStrides(out.shape());
  // Stride into `out` for each input dim; zero for reduced dims.
  std::vector<int64_t> strides(static_cast<size_t>(in_shape.rank()), 0);
  size_t k = 0;
  for (int64_t d = 0; d < in_shape.rank(); ++d) {
    if (std::find(op.dims.begin(), op.dims.end(), d) == op.dims.end()) {
      strides[static_cast<size_t>(d)] = out_strides_dense[k++];
    }
  }
  WithType(x.dtype(), [&](auto t) {
    using T = decltype(t);
    const T* in = x.data<T>().data();
    auto& o = out.data<T>();
    const bool is_sum = op.kind == ReduceKind::kSum;
    std::fill(o.begin(), o.end(),
              is_sum ? T(0) : -std::numeric_limits<T>::infinity());
    const int64_t rank = in_shape.rank();
    const int64_t total = in_shape.ElementCount();
    if (total == 0) return;
    if (rank == 0) {
      o[0] = is_sum ? o[0] + in[0] : std::max(o[0], in[0]);
      return;
    }
    const int64_t inner = in_shape.dim(rank - 1);
    const int64_t inner_stride = strides.back();
    std::vector<int64_t> idx(static_cast<size_t>(rank), 0);
    int64_t offset = 0;
    for (int64_t base = 0; base < total; base += inner) {
      if (inner_stride == 0) {
        T acc = o[static_cast<size_t>(offset)];
        if (is_sum) {
          for (int64_t j = 0; j < inner; ++j) acc += in[base + j];
        } else {
          for (int64_t j = 0; j < inner; ++j) acc = std::max(acc, in[base + j]);
        }
        o[static_cast<size_t>(offset)] = acc;
      } else {
        for (int64_t j = 0; j < inner; ++j) {
          T& slot = o[static_cast<size_t>(offset + j * inner_stride)];
          slot = is_sum ? slot + in[base + j] : std::max(slot, in[base + j]);
        }
      }
      for (int64_t d = rank - 2; d >= 0; --d) {
        const auto ud = static_cast<size_t>(d);
        ++idx[ud];
        offset += strides[ud];
        if (idx[ud] < in_shape.dim(d)) break;
        offset -= strides[ud] * idx[ud];
        idx[ud] = 0;
      }
    }
  });
}

namespace {

struct DotLayout {
  // Operand dims in canonical order and the extents of each group.
  std::vector<int64_t> perm;
  int64_t batch = 1;
  int64_t free = 1;
  int64_t contract = 1;
};

// Orders `operand` dims as batch, free, contracting (contract_last) or batch,
// contracting, free.
DotLayout MakeLayout(const Shape& shape, const std::vector<int64_t>& batch,
                     const std::vector<int64_t>& contracting,
                     bool contract_last) {
  DotLayout l;
  std::vector<int64_t> free;
  for (int64_t d = 0; d < shape.rank(); ++d) {
    if (std::find(batch.begin(), batch.end(), d) == batch.end() &&
        std::find(contracting.begin(), contracting.end(), d) ==
            contracting.end()) {
      free.push_back(d);
    }
  }
  l.perm = batch;
  const auto& first = contract_last ? free : contracting;
  const auto& second = contract_last ? contracting : free;
  l.perm.insert(l.perm.end(), first.begin(), first.end());
  l.perm.insert(l.perm.end(), second.begin(), second.end());
  for (int64_t d : batch) l.batch *= shape.dim(d);
  for (int64_t d : free) l.free *= shape.dim(d);
  for (int64_t d : contracting) l.contract *= shape.dim(d);
  return l;
}

bool IsIdentity(const std::vector<int64_t>& perm) {
  for (size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] != static_cast<int64_t>(i)) return false;
  }
  return true;
}

// Returns a pointer to `x` laid out per `perm`, materializing into `scratch`
// only when the permutation is not the identity.
template <typename T>
const T* Arrange(const TensorValue& x, const std::vector<int64_t>& perm,
                 std::vector<T>& scratch) {
  if (IsIdentity(perm)) return x.data<T>().data();
  const auto src = RowMajorStrides(x.shape());
  std::vector<int64_t> dims, strides;
  for (int64_t p : perm) {
    dims.push_back(x.shape().dim(p));
    strides.push_back(src[static_cast<size_t>(p)]);
  }
  scratch.resize(static_cast<size_t>(x.shape().ElementCount()));
  Gather(x.data<T>().data(), 0, strides, Shape(dims), scratch.data());
  return scratch.data();
}

}  // namespace

void Dot(const DotOp& op, const TensorValue& lhs, const TensorValue& rhs,
         TensorValue& out) {
  const DotLayout l =
      MakeLayout(lhs.shape(), op.lhs_batch, op.lhs_contracting, true);
  // Prefer rhs as [B, N, K] (row dot products); fall back to [B, K, N]
  // when that is its natural layout.
  DotLayout r_nk =
      MakeLayout(rhs.shape(), op.rhs_batch, op.rhs_contracting, true);
  DotLayout r_kn =
      MakeLayout(rhs.shape(), op.rhs_batch, op.rhs_contracting, false);
  const bool use_kn = !IsIdentity(r_nk.perm) && IsIdentity(r_kn.perm) &&
                      r_kn.free > 1;
  const int64_t B = l.batch, M = l.free, K = l.contract, N = r_nk.free;
  WithType(lhs.dtype(), [&](auto t) {
    using T = decltype(t);
    std::vector<T> lhs_scratch, rhs_scratch;
    const T* a = Arrange(lhs, l.perm, lhs_scratch);
    const T* b = use_kn ? rhs.data<T>().data()
                        : Arrange(rhs, r_nk.perm, rhs_scratch);
    T* o = out.data<T>().data();
    for (int64_t bi = 0; bi < B; ++bi) {
      const T* ab = a + bi * M * K;
      const T* bb = b + bi * K * N;
      T* ob = o + bi * M * N;
      if (use_kn) {
        for (int64_t i = 0; i < M; ++i) {
          T* row = ob + i * N;
          std::fill(row, row + N, T(0));
          for (int64_t k = 0; k < K; ++k) {
            const T av = ab[i * K + k];
            const T* brow = bb + k * N;
            for (int64_t j = 0; j < N; ++j) row[j] += av * brow[j];
          }
        }
      } else {
        for (int64_t i = 0; i < M; ++i) {
          const T* arow = ab + i * K;
          for (int64_t j = 0; j < N; ++j) {
            const T* brow = bb + j * K;
            T acc = 0;
            for (int64_t k = 0; k < K; ++k) acc += arow[k] * brow[k];
            ob[i * N + j] = acc;
          }
        }
      }
    }
  });
}

void Transpose(const TransposeOp& op, const TensorValue& x, TensorValue& out) {
  const auto src = RowMajorStrides(x.shape());
  std::vector<int64_t> strides;
  for (int64_t p : op.perm) strides.push_back(src[static_cast<size_t>(p)]);
  WithType(x.dtype(), [&](auto t) {
    using T = decltype(t);
    Gather(x.data<T>().data(), 0, strides, out.shape(), out.data<T>().data());
  });
}

void Slice(const SliceOp& op, const TensorValue& x, TensorValue& out) {
  const auto src = RowMajorStrides(x.shape());
  std::vector<int64_t> strides;
  int64_t base = 0;
  for (size_t d = 0; d < src.size(); ++d) {
    base += op.starts[d] * src[d];
    strides.push_back(op.strides[d] * src[d]);
  }
  WithType(x.dtype(), [&](auto t) {
    using T = decltype(t);
    Gather(x.data<T>().data(), base, strides, out.shape(),
           out.data<T>().data());
  });
}

void DynamicSlice(const std::vector<int64_t>& starts, const TensorValue& x,
                  TensorValue& out) {
  const auto src = RowMajorStrides(x.shape());
  int64_t base = 0;
  for (size_t d = 0; d < src.size(); ++d) base += starts[d] * src[d];
  WithType(x.dtype(), [&](auto t) {
    using T = decltype(t);
    Gather(x.data<T>().data(), base, src, out.shape(), out.data<T>().data());
  });
}

void DynamicUpdateSlice(const std::vector<int64_t>& starts,
                        const TensorValue& update, TensorValue& inout) {
  const auto dst = RowMajorStrides(inout.shape());
  int64_t base = 0;
  for (size_t d = 0; d < dst.size(); ++d) base += starts[d] * dst[d];
  WithType(update.dtype(), [&](auto t) {
    using T = decltype(t);
    Scatter(update.data<T>().data(), update.shape(), inout.data<T>().data(),
            base, dst);
  });
}

void Concat(int64_t dim, const std::vector<const TensorValue*>& xs,
            TensorValue& out) {
  const auto dst = RowMajorStrides(out.shape());
  int64_t offset = 0;
  for (const TensorValue* x : xs) {
    WithType(x->dtype(), [&](auto t) {
      using T = decltype(t);
      Scatter(x->data<T>().data(), x->shape(), out.data<T>().data(),
              offset * dst[static_cast<size_t>(dim)], dst);
    });
    offset += x->shape().dim(dim);
  }
}

void TopK(const TopKOp& op, const TensorValue& x, TensorValue& values,
          TensorValue& indices) {
  const Shape& shape = x.shape();
  const auto in_strides = RowMajorStrides(shape);
  const auto out_strides = RowMajorStrides(values.shape());
  const int64_t extent = shape.dim(op.dim);
  const int64_t in_step = in_strides[static_cast<size_t>(op.dim)];
  const int64_t out_step = out_strides[static_cast<size_t>(op.dim)];
  // Rows are enumerated by walking `shape` with the top-k dim collapsed.
  const Shape rows_shape = shape.WithDim(op.dim, 1);
  const int64_t rows = rows_shape.ElementCount();
  const auto row_strides = RowMajorStrides(rows_shape);
  WithType(x.dtype(), [&](auto t) {
    using T = decltype(t);
    const T* in = x.data<T>().data();
    T* vals = values.data<T>().data();
    double* idx = indices.data<double>().data();
    std::vector<int64_t> order(static_cast<size_t>(extent));
    for (int64_t r = 0; r < rows; ++r) {
      int64_t in_base = 0, out_base = 0, rem = r;
      for (int64_t d = 0; d < shape.rank(); ++d) {
        const int64_t i = rem / row_strides[static_cast<size_t>(d)];
        rem %= row_strides[static_cast<size_t>(d)];
        in_base += i * in_strides[static_cast<size_t>(d)];
        out_base += i * out_strides[static_cast<size_t>(d)];
      }
      std::iota(order.begin(), order.end(), 0);
      // Full sort of the row; ties keep the lower index first.
      std::sort(order.begin(), order.end(), [&](int64_t p, int64_t q) {
        const T vp = in[in_base + p * in_step];
        const T vq = in[in_base + q * in_step];
        if (vp != vq) return op.largest ? vp > vq : vp < vq;
        return p < q;
      });
      for (int64_t j = 0; j < op.k; ++j) {
        const int64_t src = order[static_cast<size_t>(j)];
        vals[out_base + j * out_step] = in[in_base + src * in_step];
        idx[out_base + j * out_step] = static_cast<double>(src);
      }
    }
  });
}

void TriangularSolve(bool lower, const TensorValue& a, const TensorValue& b,
                     TensorValue& out) {
  const int64_t rank = a.shape().rank();
  const int64_t n = a.shape().dim(rank - 1);
  const int64_t r = b.shape().dim(rank - 1);
  const int64_t batches = n == 0 ? 0 : a.shape().ElementCount() / (n * n);
  WithType(a.dtype(), [&](auto t) {
    using T = decltype(t);
    const T* A = a.data<T>().data();
    auto& X = out.data<T>();
    X = b.data<T>();
    for (int64_t bi = 0; bi < batches; ++bi) {
      const T* Ab = A + bi * n * n;
      T* Xb = X.data() + bi * n * r;
      for (int64_t c = 0; c < r; ++c) {
        for (int64_t s = 0; s < n; ++s) {
          const int64_t i = lower ? s : n - 1 - s;
          T acc = Xb[i * r + c];
          if (lower) {
            for (int64_t j = 0; j < i; ++j) acc -= Ab[i * n + j] * Xb[j * r + c];
          } else {
            for (int64_t j = i + 1; j < n; ++j) {
              acc -= Ab[i * n + j] * Xb[j * r + c];
            }
          }
          Xb[i * r + c] = acc / Ab[i * n + i];
        }
      }
    }
  });
}

void AddDiagonal(const TensorValue& m, const TensorValue& s, TensorValue& out) {
  const int64_t n = m.shape().dim(0);
  WithType(m.dtype(), [&](auto t) {
    using T = decltype(t);
    auto& o = out.data<T>();
    o = m.data<T>();
    const T v = s.data<T>()[0];
    for (int64_t i = 0; i < n; ++i) o[static_cast<size_t>(i * n + i)] += v;
  });
}

}  // namespace tb::kernels
