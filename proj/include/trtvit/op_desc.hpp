// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trtvit {

enum class OpKind {
  kConv2d,
  kLinear,
  kBatchNorm,
  kLayerNorm,
  kReLU,
  kGeLU,
  kSoftmax,
  kAttention,
  kMatMul,
  kAvgPool,
  kMaxPool,
  kGlobalAvgPool,
  kSplit,
  kConcat,
  kAdd,
};

const char* op_kind_name(OpKind kind);

/// Structural description of one primitive, per image (batch excluded).
/// Fields that do not apply to a kind stay zero.
struct OpDesc {
  OpKind kind = OpKind::kAdd;
  std::int64_t c_in = 0;
  std::int64_t c_out = 0;
  std::int64_t kernel = 0;
  std::int64_t stride = 1;
  std::int64_t padding = 0;
  std::int64_t in_h = 0;
  std::int64_t in_w = 0;
  std::int64_t out_h = 0;
  std::int64_t out_w = 0;
  // Rows per image for token-shaped ops; query tokens for attention;
  // number of products for matmul (then in_h = m, c_in = k, c_out = n).
  std::int64_t tokens = 0;
  std::int64_t sr_ratio = 1;
  bool bias = false;

  bool operator==(const OpDesc&) const = default;
};

using Trace = std::vector<OpDesc>;

std::string describe(const OpDesc& op);

// Builders shared by the runtime ops and the static block traces, so both
// produce identical descriptors.
OpDesc conv_desc(std::int64_t c_in, std::int64_t c_out, std::int64_t kernel, std::int64_t stride,
                 std::int64_t padding, std::int64_t h, std::int64_t w, bool bias);
OpDesc linear_desc(std::int64_t tokens, std::int64_t c_in, std::int64_t c_out, bool bias);
/// Op on a C x H x W map that keeps its shape (batch norm, relu, add).
OpDesc map_desc(OpKind kind, std::int64_t c, std::int64_t h, std::int64_t w);
/// Op on tokens x C that keeps its shape (layer norm, gelu, softmax, add).
OpDesc token_desc(OpKind kind, std::int64_t tokens, std::int64_t c);
OpDesc pool_desc(OpKind kind, std::int64_t c, std::int64_t kernel, std::int64_t stride, std::int64_t padding,
                 std::int64_t h, std::int64_t w);
OpDesc global_pool_desc(std::int64_t c, std::int64_t h, std::int64_t w);
OpDesc attention_desc(std::int64_t c, std::int64_t h, std::int64_t w, std::int64_t sr_ratio);
OpDesc split_desc(OpKind kind, std::int64_t c1, std::int64_t c2, std::int64_t h, std::int64_t w);
OpDesc matmul_desc(std::int64_t groups, std::int64_t m, std::int64_t k, std::int64_t n);

inline std::int64_t conv_out_extent(std::int64_t in, std::int64_t kernel, std::int64_t stride, std::int64_t padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

}  // namespace trtvit
