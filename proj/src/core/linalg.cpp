// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/linalg.hpp"

#include <algorithm>
#include <vector>

namespace trtvit {

namespace {

constexpr std::int64_t kColBlock = 512;
constexpr std::int64_t kDepthBlock = 256;

// C += A * B, all row-major, no transposes. Four rows of C share each B row
// load; the k loop is always ascending so each c[i][j] sees the same sequence
// of rounded multiply-adds regardless of blocking.
template <class T>
void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k, const T* a, std::int64_t lda, const T* b,
             std::int64_t ldb, T* c, std::int64_t ldc) {
  for (std::int64_t j0 = 0; j0 < n; j0 += kColBlock) {
    const std::int64_t nb = std::min(kColBlock, n - j0);
    for (std::int64_t p0 = 0; p0 < k; p0 += kDepthBlock) {
      const std::int64_t pe = std::min(k, p0 + kDepthBlock);
      std::int64_t i = 0;
      for (; i + 4 <= m; i += 4) {
        T* __restrict c0 = c + (i + 0) * ldc + j0;
        T* __restrict c1 = c + (i + 1) * ldc + j0;
        T* __restrict c2 = c + (i + 2) * ldc + j0;
        T* __restrict c3 = c + (i + 3) * ldc + j0;
        for (std::int64_t p = p0; p < pe; ++p) {
          const T a0 = a[(i + 0) * lda + p];
          const T a1 = a[(i + 1) * lda + p];
          const T a2 = a[(i + 2) * lda + p];
          const T a3 = a[(i + 3) * lda + p];
          const T* __restrict br = b + p * ldb + j0;
          for (std::int64_t j = 0; j < nb; ++j) {
            const T bv = br[j];
            c0[j] += a0 * bv;
            c1[j] += a1 * bv;
            c2[j] += a2 * bv;
            c3[j] += a3 * bv;
          }
        }
      }
      for (; i < m; ++i) {
        T* __restrict c0 = c + i * ldc + j0;
        for (std::int64_t p = p0; p < pe; ++p) {
          const T a0 = a[i * lda + p];
          const T* __restrict br = b + p * ldb + j0;
          for (std::int64_t j = 0; j < nb; ++j) c0[j] += a0 * br[j];
        }
      }
    }
  }
}

template <class T>
std::vector<T> transposed_copy(const T* src, std::int64_t rows, std::int64_t cols, std::int64_t ld) {
  std::vector<T> out(static_cast<std::size_t>(rows * cols));
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) out[static_cast<std::size_t>(c * rows + r)] = src[r * ld + c];
  }
  return out;
}

}  // namespace

template <class T>
void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n, std::int64_t k, const T* a,
          std::int64_t lda, const T* b, std::int64_t ldb, T* c, std::int64_t ldc, bool accumulate) {
  if (!accumulate) {
    for (std::int64_t i = 0; i < m; ++i) std::fill(c + i * ldc, c + i * ldc + n, T{0});
  }
  if (m == 0 || n == 0 || k == 0) return;
  std::vector<T> at;
  std::vector<T> bt;
  if (trans_a) {
    // stored as k x m
    at = transposed_copy(a, k, m, lda);
    a = at.data();
    lda = k;
  }
  if (trans_b) {
    // stored as n x k
    bt = transposed_copy(b, n, k, ldb);
    b = bt.data();
    ldb = n;
  }
  gemm_nn(m, n, k, a, lda, b, ldb, c, ldc);
}

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, MacCounter* counter) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  const auto m = a.dim(0);
  const auto k = a.dim(1);
  const auto n = b.dim(1);
  Tensor<T> c({m, n});
  gemm<T>(false, false, m, n, k, a.ptr(), k, b.ptr(), n, c.ptr(), n, false);
  if (counter) counter->add(static_cast<std::uint64_t>(m * k * n));
  return c;
}

template <class T>
Tensor<T> elementwise(ElementwiseOp op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("elementwise: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  Tensor<T> out(a.shape());
  const T* pa = a.ptr();
  const T* pb = b.ptr();
  T* po = out.ptr();
  const auto n = a.size();
  switch (op) {
    case ElementwiseOp::kAdd:
      for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
      break;
    case ElementwiseOp::kSub:
      for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
      break;
    case ElementwiseOp::kMul:
    case ElementwiseOp::kScale:
      for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
      break;
    case ElementwiseOp::kMax:
      for (std::int64_t i = 0; i < n; ++i) po[i] = std::max(pa[i], pb[i]);
      break;
  }
  return out;
}

template <class T>
Tensor<T> elementwise(ElementwiseOp op, const Tensor<T>& a, T scalar) {
  Tensor<T> out(a.shape());
  const T* pa = a.ptr();
  T* po = out.ptr();
  const auto n = a.size();
  switch (op) {
    case ElementwiseOp::kAdd:
      for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] + scalar;
      break;
    case ElementwiseOp::kSub:
      for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] - scalar;
      break;
    case ElementwiseOp::kMul:
    case ElementwiseOp::kScale:
      for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] * scalar;
      break;
    case ElementwiseOp::kMax:
      for (std::int64_t i = 0; i < n; ++i) po[i] = std::max(pa[i], scalar);
      break;
  }
  return out;
}

template <class T>
Tensor<T> transpose2d(const Tensor<T>& a) {
  if (a.rank() != 2) throw DimensionError("transpose2d: expected rank 2, got " + shape_str(a.shape()));
  return Tensor<T>({a.dim(1), a.dim(0)}, transposed_copy(a.ptr(), a.dim(0), a.dim(1), a.dim(1)));
}

#define TRTVIT_INSTANTIATE(T)                                                                                    \
  template void gemm<T>(bool, bool, std::int64_t, std::int64_t, std::int64_t, const T*, std::int64_t, const T*, \
                        std::int64_t, T*, std::int64_t, bool);                                                   \
  template Tensor<T> matmul<T>(const Tensor<T>&, const Tensor<T>&, MacCounter*);                                 \
  template Tensor<T> elementwise<T>(ElementwiseOp, const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> elementwise<T>(ElementwiseOp, const Tensor<T>&, T);                                         \
  template Tensor<T> transpose2d<T>(const Tensor<T>&);

TRTVIT_INSTANTIATE(float)
TRTVIT_INSTANTIATE(double)

#undef TRTVIT_INSTANTIATE

}  // namespace trtvit
