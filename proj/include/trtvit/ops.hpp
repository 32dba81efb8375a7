// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

// Differentiable primitives. Each op computes its value eagerly, charges its
// multiply-accumulates to ctx.counter, appends a descriptor to ctx.trace, and
// when ctx.record_grad is set registers a backward closure.

#pragma once

#include <cstdint>
#include <utility>

#include "trtvit/autograd.hpp"
#include "trtvit/tensor.hpp"

namespace trtvit::nn {

inline constexpr std::int64_t kHeadDim = 32;
inline constexpr double kNormEps = 1e-5;

template <class T>
struct ConvParams {
  std::int64_t in_channels = 0;
  std::int64_t out_channels = 0;
  std::int64_t kernel = 1;
  std::int64_t stride = 1;
  std::int64_t padding = 0;
  Var<T> weight;  // [out, in, k, k]
  Var<T> bias;    // [out], may be empty
};

template <class T>
struct LinearParams {
  Var<T> weight;  // [in, out]
  Var<T> bias;    // [out], may be empty
};

enum class NormKind { kBatchNormInference, kLayerNorm };

template <class T>
struct NormParams {
  NormKind kind = NormKind::kLayerNorm;
  Var<T> gamma;
  Var<T> beta;
  // Batch norm only.
  Tensor<T> running_mean;
  Tensor<T> running_var;
  double eps = kNormEps;
};

/// Spatial-reduction multi-head attention with a fixed head width of 32.
template <class T>
struct AttentionParams {
  std::int64_t channels = 0;
  std::int64_t sr_ratio = 1;
  LinearParams<T> q;
  LinearParams<T> k;
  LinearParams<T> v;
  LinearParams<T> out;
  // Used only when sr_ratio > 1: conv with kernel = stride = sr_ratio, then LayerNorm.
  ConvParams<T> reduction;
  NormParams<T> reduction_norm;

  std::int64_t heads() const { return channels / kHeadDim; }
};

enum class ActivationKind { kReLU, kGeLU };

/// tanh-form GeLU: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
double gelu_tanh(double x);

template <class T>
Var<T> conv2d(const Context<T>& ctx, const Var<T>& x, const Var<T>& weight, const Var<T>& bias,
              std::int64_t stride, std::int64_t padding);

template <class T>
Var<T> conv2d_forward(const Context<T>& ctx, const Var<T>& x, const ConvParams<T>& p);

/// x [..., C] times weight [C, C'] plus bias.
template <class T>
Var<T> linear(const Context<T>& ctx, const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

template <class T>
Var<T> linear_forward(const Context<T>& ctx, const Var<T>& x, const LinearParams<T>& p) {
  return linear(ctx, x, p.weight, p.bias);
}

/// Inference batch norm over dim 1 of [B, C, H, W].
template <class T>
Var<T> batch_norm(const Context<T>& ctx, const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                  const Tensor<T>& running_mean, const Tensor<T>& running_var, double eps);

/// Normalizes the last dimension.
template <class T>
Var<T> layer_norm(const Context<T>& ctx, const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, double eps);

template <class T>
Var<T> norm_forward(const Context<T>& ctx, const Var<T>& x, const NormParams<T>& p);

template <class T>
Var<T> relu(const Context<T>& ctx, const Var<T>& x);

template <class T>
Var<T> gelu(const Context<T>& ctx, const Var<T>& x);

template <class T>
Var<T> activation(const Context<T>& ctx, const Var<T>& x, ActivationKind kind) {
  return kind == ActivationKind::kReLU ? relu(ctx, x) : gelu(ctx, x);
}

/// Max-stabilized softmax over the last dimension.
template <class T>
Var<T> softmax(const Context<T>& ctx, const Var<T>& x);

template <class T>
Var<T> avg_pool2d(const Context<T>& ctx, const Var<T>& x, std::int64_t kernel, std::int64_t stride);

template <class T>
Var<T> max_pool2d(const Context<T>& ctx, const Var<T>& x, std::int64_t kernel, std::int64_t stride,
                  std::int64_t padding);

/// [B, C, H, W] -> [B, C]
template <class T>
Var<T> global_avg_pool(const Context<T>& ctx, const Var<T>& x);

/// Splits dim 1 into [0, c1) and [c1, C).
template <class T>
std::pair<Var<T>, Var<T>> channel_split(const Context<T>& ctx, const Var<T>& x, std::int64_t c1);

template <class T>
Var<T> channel_concat(const Context<T>& ctx, const Var<T>& a, const Var<T>& b);

template <class T>
Var<T> add(const Context<T>& ctx, const Var<T>& a, const Var<T>& b);

template <class T>
Var<T> scale(const Context<T>& ctx, const Var<T>& x, T factor);

/// [B, C, H, W] -> [B, H*W, C]
template <class T>
Var<T> to_tokens(const Context<T>& ctx, const Var<T>& x);

/// [B, H*W, C] -> [B, C, H, W]
template <class T>
Var<T> to_map(const Context<T>& ctx, const Var<T>& x, std::int64_t h, std::int64_t w);

/// [B, N, C] -> [B*heads, N, C/heads]
template <class T>
Var<T> split_heads(const Context<T>& ctx, const Var<T>& x, std::int64_t heads);

/// [B*heads, N, d] -> [B, N, heads*d]
template <class T>
Var<T> merge_heads(const Context<T>& ctx, const Var<T>& x, std::int64_t heads);

/// a [G, M, K] times b [G, K, N] (or b [G, N, K] transposed).
template <class T>
Var<T> batched_matmul(const Context<T>& ctx, const Var<T>& a, const Var<T>& b, bool trans_b);

/// x [B, N, C] with N == h*w. Recorded as one attention descriptor.
template <class T>
Var<T> sra_attention_forward(const Context<T>& ctx, const Var<T>& x, const AttentionParams<T>& p, std::int64_t h,
                             std::int64_t w);

}  // namespace trtvit::nn
