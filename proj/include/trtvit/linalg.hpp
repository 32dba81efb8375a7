// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "trtvit/tensor.hpp"

namespace trtvit {

/// C (m x n) = op(A) * op(B) (+ C when accumulate). Row-major with leading
/// dimensions; op transposes when the flag is set. Every output element is
/// summed over k in ascending order, independent of m and n, so results do
/// not depend on how many rows are processed together.
template <class T>
void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n, std::int64_t k, const T* a,
          std::int64_t lda, const T* b, std::int64_t ldb, T* c, std::int64_t ldc, bool accumulate);

/// a (M x K) times b (K x N). Adds M*K*N to the counter when given.
template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, MacCounter* counter = nullptr);

enum class ElementwiseOp { kAdd, kMul, kSub, kScale, kMax };

template <class T>
Tensor<T> elementwise(ElementwiseOp op, const Tensor<T>& a, const Tensor<T>& b);

template <class T>
Tensor<T> elementwise(ElementwiseOp op, const Tensor<T>& a, T scalar);

template <class T>
Tensor<T> transpose2d(const Tensor<T>& a);

}  // namespace trtvit
