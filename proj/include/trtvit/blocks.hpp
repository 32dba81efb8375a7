// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

// Block zoo: plain conv, max pool, BottleNeck, Transformer and the three
// mixed blocks. Each kind has a static trace (what ops a block of that shape
// runs) and a runtime implementation whose recorded trace must match it.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "trtvit/autograd.hpp"
#include "trtvit/ops.hpp"
#include "trtvit/rng.hpp"

namespace trtvit {

enum class BlockKind { kConv, kMaxPool, kBottleNeck, kTransformer, kMixA, kMixB, kMixC };

const char* block_kind_name(BlockKind kind);
/// Accepts the names produced by block_kind_name; throws InvalidArgument.
BlockKind parse_block_kind(const std::string& name);
/// Transformer or any mixed block.
bool has_attention(BlockKind kind);
bool is_mix(BlockKind kind);

struct BlockSpec {
  BlockKind kind = BlockKind::kBottleNeck;
  std::int64_t out_channels = 0;
  std::int64_t stride = 1;
  double ratio = 0.0;          // R; mixed blocks only
  std::int64_t sr_ratio = 1;   // S; attention-bearing blocks only
  std::int64_t kernel = 3;     // conv kernel, or the BottleNeck spatial kernel
  // Declared input width; 0 means "whatever the previous block emits".
  std::int64_t in_channels = 0;

  bool operator==(const BlockSpec&) const = default;
};

BlockSpec conv_block(std::int64_t c, std::int64_t kernel, std::int64_t stride);
BlockSpec maxpool_block(std::int64_t c);
BlockSpec bottleneck_block(std::int64_t c, std::int64_t stride, std::int64_t kernel = 3);
BlockSpec transformer_block(std::int64_t c, std::int64_t stride = 1, std::int64_t sr_ratio = 1);
BlockSpec mix_block(BlockKind kind, std::int64_t c, double ratio, std::int64_t sr_ratio, std::int64_t kernel,
                    std::int64_t stride = 1);

/// Channel widths of the Transformer part and the BottleNeck part.
struct MixWidths {
  std::int64_t transformer = 0;
  std::int64_t conv = 0;
};
MixWidths mix_widths(const BlockSpec& spec);

/// Channel-level problems with a block fed c_in channels; empty when valid.
std::vector<std::string> block_violations(const BlockSpec& spec, std::int64_t c_in);
/// Problems that depend on the input resolution (stride, spatial reduction).
std::vector<std::string> block_resolution_violations(const BlockSpec& spec, std::int64_t h, std::int64_t w);

std::int64_t block_out_extent(const BlockSpec& spec, std::int64_t in);

/// Ordered primitive descriptors a block runs on one c_in x h x w image.
Trace block_trace(const BlockSpec& spec, std::int64_t c_in, std::int64_t h, std::int64_t w);

/// A named tensor of a module. Trainable parameters carry their Var;
/// buffers (batch-norm running statistics) do not.
template <class T>
struct ParamRef {
  std::string path;
  Tensor<T>* tensor = nullptr;
  Var<T> var;
  bool buffer = false;
};

template <class T>
class Block {
 public:
  virtual ~Block() = default;
  const BlockSpec& spec() const { return spec_; }
  std::int64_t in_channels() const { return c_in_; }

  /// x [B, c_in, H, W] -> [B, out_channels, H/stride, W/stride]
  virtual Var<T> forward(const Context<T>& ctx, const Var<T>& x) const = 0;
  virtual void collect(const std::string& prefix, std::vector<ParamRef<T>>& out) = 0;

 protected:
  Block(const BlockSpec& spec, std::int64_t c_in) : spec_(spec), c_in_(c_in) {}

 private:
  BlockSpec spec_;
  std::int64_t c_in_;
};

/// Validates then builds with freshly initialized weights. Throws
/// InvalidArgument listing the violations.
template <class T>
std::unique_ptr<Block<T>> make_block(const BlockSpec& spec, std::int64_t c_in, Rng& rng);

template <class T>
std::vector<ParamRef<T>> block_parameters(Block<T>& block, const std::string& prefix = "");

/// Number of trainable scalars (buffers excluded).
template <class T>
std::int64_t trainable_count(const std::vector<ParamRef<T>>& params);

}  // namespace trtvit
