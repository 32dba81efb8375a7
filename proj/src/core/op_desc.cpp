// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/op_desc.hpp"

namespace trtvit {

const char* op_kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConv2d: return "conv2d";
    case OpKind::kLinear: return "linear";
    case OpKind::kBatchNorm: return "batchnorm";
    case OpKind::kLayerNorm: return "layernorm";
    case OpKind::kReLU: return "relu";
    case OpKind::kGeLU: return "gelu";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kAttention: return "attention";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAvgPool: return "avgpool";
    case OpKind::kMaxPool: return "maxpool";
    case OpKind::kGlobalAvgPool: return "global_avgpool";
    case OpKind::kSplit: return "split";
    case OpKind::kConcat: return "concat";
    case OpKind::kAdd: return "add";
  }
  return "unknown";
}

std::string describe(const OpDesc& op) {
  std::string s = op_kind_name(op.kind);
  switch (op.kind) {
    case OpKind::kConv2d:
      s += std::to_string(op.kernel) + "x" + std::to_string(op.kernel) + " " + std::to_string(op.c_in) + "->" +
           std::to_string(op.c_out);
      if (op.stride != 1) s += " s" + std::to_string(op.stride);
      break;
    case OpKind::kLinear:
      s += " " + std::to_string(op.c_in) + "->" + std::to_string(op.c_out);
      break;
    case OpKind::kAttention:
      s += " c=" + std::to_string(op.c_in) + " sr=" + std::to_string(op.sr_ratio);
      break;
    case OpKind::kSplit:
    case OpKind::kConcat:
      s += " " + std::to_string(op.c_in) + "|" + std::to_string(op.c_out);
      break;
    default:
      if (op.c_in) s += " c=" + std::to_string(op.c_in);
      break;
  }
  if (op.out_h) {
    s += " @" + std::to_string(op.out_h) + "x" + std::to_string(op.out_w);
  } else if (op.tokens) {
    s += " n=" + std::to_string(op.tokens);
  }
  return s;
}

OpDesc conv_desc(std::int64_t c_in, std::int64_t c_out, std::int64_t kernel, std::int64_t stride,
                 std::int64_t padding, std::int64_t h, std::int64_t w, bool bias) {
  OpDesc d;
  d.kind = OpKind::kConv2d;
  d.c_in = c_in;
  d.c_out = c_out;
  d.kernel = kernel;
  d.stride = stride;
  d.padding = padding;
  d.in_h = h;
  d.in_w = w;
  d.out_h = conv_out_extent(h, kernel, stride, padding);
  d.out_w = conv_out_extent(w, kernel, stride, padding);
  d.bias = bias;
  return d;
}

OpDesc linear_desc(std::int64_t tokens, std::int64_t c_in, std::int64_t c_out, bool bias) {
  OpDesc d;
  d.kind = OpKind::kLinear;
  d.tokens = tokens;
  d.c_in = c_in;
  d.c_out = c_out;
  d.bias = bias;
  return d;
}

OpDesc map_desc(OpKind kind, std::int64_t c, std::int64_t h, std::int64_t w) {
  OpDesc d;
  d.kind = kind;
  d.c_in = d.c_out = c;
  d.in_h = d.out_h = h;
  d.in_w = d.out_w = w;
  return d;
}

OpDesc token_desc(OpKind kind, std::int64_t tokens, std::int64_t c) {
  OpDesc d;
  d.kind = kind;
  d.c_in = d.c_out = c;
  d.tokens = tokens;
  return d;
}

OpDesc pool_desc(OpKind kind, std::int64_t c, std::int64_t kernel, std::int64_t stride, std::int64_t padding,
                 std::int64_t h, std::int64_t w) {
  OpDesc d = conv_desc(c, c, kernel, stride, padding, h, w, false);
  d.kind = kind;
  return d;
}

OpDesc global_pool_desc(std::int64_t c, std::int64_t h, std::int64_t w) {
  OpDesc d;
  d.kind = OpKind::kGlobalAvgPool;
  d.c_in = d.c_out = c;
  d.in_h = h;
  d.in_w = w;
  d.out_h = d.out_w = 1;
  return d;
}

OpDesc attention_desc(std::int64_t c, std::int64_t h, std::int64_t w, std::int64_t sr_ratio) {
  OpDesc d;
  d.kind = OpKind::kAttention;
  d.c_in = d.c_out = c;
  d.in_h = d.out_h = h;
  d.in_w = d.out_w = w;
  d.tokens = h * w;
  d.sr_ratio = sr_ratio;
  d.bias = true;
  return d;
}

OpDesc split_desc(OpKind kind, std::int64_t c1, std::int64_t c2, std::int64_t h, std::int64_t w) {
  OpDesc d;
  d.kind = kind;
  d.c_in = c1;
  d.c_out = c2;
  d.in_h = d.out_h = h;
  d.in_w = d.out_w = w;
  return d;
}

OpDesc matmul_desc(std::int64_t groups, std::int64_t m, std::int64_t k, std::int64_t n) {
  OpDesc d;
  d.kind = OpKind::kMatMul;
  d.tokens = groups;
  d.in_h = m;
  d.c_in = k;
  d.c_out = n;
  return d;
}

}  // namespace trtvit
