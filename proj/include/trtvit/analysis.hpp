// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

// Closed-form cost accounting. One FLOP is one multiply-accumulate; biases,
// norms, activations, softmax, pooling and residual adds cost nothing.
// Norm layers contribute their scale and shift to the parameter count;
// batch-norm running statistics are buffers and do not.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trtvit/arch.hpp"
#include "trtvit/op_desc.hpp"

namespace trtvit {

struct OpCost {
  std::int64_t params = 0;
  std::int64_t flops = 0;
};

OpCost count_op(const OpDesc& op);

struct CostNode {
  std::string path;
  std::string kind;
  // C, H, W of one image (batch excluded); H = W = 0 for token-only ops.
  Shape in_shape;
  Shape out_shape;
  std::int64_t params = 0;
  std::int64_t flops = 0;
  std::vector<CostNode> children;
};

/// Block subtree whose children are the ops of block_trace.
CostNode count_block(const BlockSpec& spec, std::int64_t c_in, std::int64_t h, std::int64_t w,
                     const std::string& path = "");

/// Model tree: stages, blocks, ops, and the classifier head as the last child.
/// Throws InvalidArgument when the spec does not validate at this resolution.
CostNode count_model(const ArchSpec& spec, std::int64_t resolution = 224);

/// FLOPs[M] / latency[ms]; throws InvalidArgument for latency <= 0.
double teraflops(double flops_m, double latency_ms);
/// Params[K] / latency[ms]; throws InvalidArgument for latency <= 0.
double teraparams(double params_k, double latency_ms);

/// The block configurations of the per-block efficiency grid: Transformer,
/// BottleNeck, MixBlockA and MixBlockB/C at 256x56, 512x28, 1024x14, 2048x7.
struct GridEntry {
  std::string target;  // e.g. "bottleneck-256x56"
  BlockSpec spec;
  std::int64_t c_in = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;
};
std::vector<GridEntry> efficiency_grid(BlockKind mix_bc = BlockKind::kMixC);

}  // namespace trtvit
