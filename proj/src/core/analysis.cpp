// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/analysis.hpp"

#include <cmath>

namespace trtvit {

OpCost count_op(const OpDesc& op) {
  OpCost c;
  switch (op.kind) {
    case OpKind::kConv2d:
      c.params = op.c_in * op.c_out * op.kernel * op.kernel + (op.bias ? op.c_out : 0);
      c.flops = op.out_h * op.out_w * op.c_out * op.c_in * op.kernel * op.kernel;
      break;
    case OpKind::kLinear:
      c.params = op.c_in * op.c_out + (op.bias ? op.c_out : 0);
      c.flops = op.tokens * op.c_in * op.c_out;
      break;
    case OpKind::kBatchNorm:
    case OpKind::kLayerNorm:
      c.params = 2 * op.c_in;
      break;
    case OpKind::kAttention: {
      const std::int64_t ch = op.c_in;
      const std::int64_t n = op.tokens;
      const std::int64_t s = op.sr_ratio;
      const std::int64_t m = (op.in_h / s) * (op.in_w / s);
      c.params = 4 * (ch * ch + ch);
      // q and output projections on all tokens, k and v on the reduced set,
      // then the two token-by-token products.
      c.flops = 2 * n * ch * ch + 2 * m * ch * ch + 2 * n * m * ch;
      if (s > 1) {
        c.params += ch * ch * s * s + ch + 2 * ch;
        c.flops += m * ch * ch * s * s;
      }
      break;
    }
    case OpKind::kMatMul:
      c.flops = op.tokens * op.in_h * op.c_in * op.c_out;
      break;
    case OpKind::kReLU:
    case OpKind::kGeLU:
    case OpKind::kSoftmax:
    case OpKind::kAvgPool:
    case OpKind::kMaxPool:
    case OpKind::kGlobalAvgPool:
    case OpKind::kSplit:
    case OpKind::kConcat:
    case OpKind::kAdd:
      break;
    default:
      throw InvalidArgument("count_op: unknown op kind");
  }
  return c;
}

namespace {

Shape op_in_shape(const OpDesc& op) {
  if (op.in_h) return {op.c_in, op.in_h, op.in_w};
  return {op.c_in, op.tokens, 0};
}

Shape op_out_shape(const OpDesc& op) {
  if (op.out_h) return {op.c_out, op.out_h, op.out_w};
  return {op.c_out, op.tokens, 0};
}

}  // namespace

CostNode count_block(const BlockSpec& spec, std::int64_t c_in, std::int64_t h, std::int64_t w,
                     const std::string& path) {
  CostNode node;
  node.path = path.empty() ? block_kind_name(spec.kind) : path;
  node.kind = block_kind_name(spec.kind);
  node.in_shape = {c_in, h, w};
  node.out_shape = {spec.out_channels, block_out_extent(spec, h), block_out_extent(spec, w)};
  const Trace t = block_trace(spec, c_in, h, w);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const OpCost oc = count_op(t[i]);
    CostNode leaf;
    leaf.path = node.path + "/" + std::to_string(i);
    leaf.kind = describe(t[i]);
    leaf.in_shape = op_in_shape(t[i]);
    leaf.out_shape = op_out_shape(t[i]);
    leaf.params = oc.params;
    leaf.flops = oc.flops;
    node.params += oc.params;
    node.flops += oc.flops;
    node.children.push_back(std::move(leaf));
  }
  return node;
}

CostNode count_model(const ArchSpec& spec, std::int64_t resolution) {
  const auto v = validate(spec, resolution);
  if (!v.empty()) throw InvalidArgument("invalid arch '" + spec.name + "': " + v.front());
  CostNode root;
  root.path = spec.name;
  root.kind = "model";
  root.in_shape = {spec.in_channels, resolution, resolution};
  std::int64_t c = spec.in_channels;
  std::int64_t h = resolution;
  for (const auto& st : spec.stages) {
    CostNode sn;
    sn.path = st.name;
    sn.kind = "stage";
    sn.in_shape = {c, h, h};
    for (std::size_t bi = 0; bi < st.blocks.size(); ++bi) {
      const auto& b = st.blocks[bi];
      CostNode bn = count_block(b, c, h, h, st.name + "." + std::to_string(bi));
      sn.params += bn.params;
      sn.flops += bn.flops;
      c = b.out_channels;
      h = block_out_extent(b, h);
      sn.children.push_back(std::move(bn));
    }
    sn.out_shape = {c, h, h};
    root.params += sn.params;
    root.flops += sn.flops;
    root.children.push_back(std::move(sn));
  }
  CostNode head;
  head.path = "head";
  head.kind = "head";
  head.in_shape = {c, h, h};
  head.out_shape = {spec.num_classes, 1, 1};
  for (const OpDesc& op : {global_pool_desc(c, h, h), linear_desc(1, c, spec.num_classes, true)}) {
    const OpCost oc = count_op(op);
    CostNode leaf;
    leaf.path = "head/" + std::to_string(head.children.size());
    leaf.kind = describe(op);
    leaf.in_shape = op_in_shape(op);
    leaf.out_shape = op_out_shape(op);
    leaf.params = oc.params;
    leaf.flops = oc.flops;
    head.params += oc.params;
    head.flops += oc.flops;
    head.children.push_back(std::move(leaf));
  }
  root.params += head.params;
  root.flops += head.flops;
  root.children.push_back(std::move(head));
  root.out_shape = {spec.num_classes, 1, 1};
  return root;
}

double teraflops(double flops_m, double latency_ms) {
  if (!(latency_ms > 0) || !std::isfinite(latency_ms)) throw InvalidArgument("teraflops: latency must be positive");
  return flops_m / latency_ms;
}

double teraparams(double params_k, double latency_ms) {
  if (!(latency_ms > 0) || !std::isfinite(latency_ms)) throw InvalidArgument("teraparams: latency must be positive");
  return params_k / latency_ms;
}

std::vector<GridEntry> efficiency_grid(BlockKind mix_bc) {
  std::vector<GridEntry> g;
  const std::int64_t sizes[4][2] = {{256, 56}, {512, 28}, {1024, 14}, {2048, 7}};
  const BlockKind kinds[4] = {BlockKind::kTransformer, BlockKind::kBottleNeck, BlockKind::kMixA, mix_bc};
  for (BlockKind k : kinds) {
    for (const auto& s : sizes) {
      GridEntry e;
      e.c_in = s[0];
      e.h = e.w = s[1];
      switch (k) {
        case BlockKind::kTransformer: e.spec = transformer_block(s[0]); break;
        case BlockKind::kBottleNeck: e.spec = bottleneck_block(s[0], 1); break;
        default: e.spec = mix_block(k, s[0], 0.5, 1, 3); break;
      }
      e.target = std::string(block_kind_name(k)) + "-" + std::to_string(s[0]) + "x" + std::to_string(s[1]);
      g.push_back(e);
    }
  }
  return g;
}

}  // namespace trtvit
