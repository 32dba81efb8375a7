// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/blocks.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace trtvit {

namespace {

constexpr std::int64_t kMlpRatio = 3;

std::string fmt_ratio(double r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

// ---------------------------------------------------------------------------
// static traces
// ---------------------------------------------------------------------------

void trace_conv_bn(Trace& t, std::int64_t c_in, std::int64_t c_out, std::int64_t k, std::int64_t stride,
                   std::int64_t h, std::int64_t w, bool relu) {
  const OpDesc conv = conv_desc(c_in, c_out, k, stride, k / 2, h, w, false);
  t.push_back(conv);
  t.push_back(map_desc(OpKind::kBatchNorm, c_out, conv.out_h, conv.out_w));
  if (relu) t.push_back(map_desc(OpKind::kReLU, c_out, conv.out_h, conv.out_w));
}

void trace_bottleneck(Trace& t, std::int64_t c_in, std::int64_t c_out, std::int64_t k, std::int64_t stride,
                      std::int64_t h, std::int64_t w) {
  const std::int64_t mid = c_out / 4;
  const std::int64_t oh = conv_out_extent(h, k, stride, k / 2);
  const std::int64_t ow = conv_out_extent(w, k, stride, k / 2);
  trace_conv_bn(t, c_in, mid, 1, 1, h, w, true);
  trace_conv_bn(t, mid, mid, k, stride, h, w, true);
  trace_conv_bn(t, mid, c_out, 1, 1, oh, ow, false);
  if (stride != 1 || c_in != c_out) trace_conv_bn(t, c_in, c_out, 1, stride, h, w, false);
  t.push_back(map_desc(OpKind::kAdd, c_out, oh, ow));
  t.push_back(map_desc(OpKind::kReLU, c_out, oh, ow));
}

void trace_transformer_unit(Trace& t, std::int64_t c, std::int64_t h, std::int64_t w, std::int64_t s) {
  const std::int64_t n = h * w;
  t.push_back(token_desc(OpKind::kLayerNorm, n, c));
  t.push_back(attention_desc(c, h, w, s));
  t.push_back(token_desc(OpKind::kAdd, n, c));
  t.push_back(token_desc(OpKind::kLayerNorm, n, c));
  t.push_back(linear_desc(n, c, kMlpRatio * c, true));
  t.push_back(token_desc(OpKind::kGeLU, n, kMlpRatio * c));
  t.push_back(linear_desc(n, kMlpRatio * c, c, true));
  t.push_back(token_desc(OpKind::kAdd, n, c));
}

// Avg-pool entry for stride-2 attention-bearing blocks; returns the new extents.
std::pair<std::int64_t, std::int64_t> trace_entry_pool(Trace& t, const BlockSpec& spec, std::int64_t c_in,
                                                       std::int64_t h, std::int64_t w) {
  if (spec.stride == 1) return {h, w};
  t.push_back(pool_desc(OpKind::kAvgPool, c_in, spec.stride, spec.stride, 0, h, w));
  return {h / spec.stride, w / spec.stride};
}

// ---------------------------------------------------------------------------
// runtime modules
// ---------------------------------------------------------------------------

template <class T>
Var<T> param(Tensor<T> t) {
  return Var<T>::leaf(std::move(t), false);
}

template <class T>
struct ConvBn {
  nn::ConvParams<T> conv;
  nn::NormParams<T> bn;
  bool relu = true;

  static ConvBn make(std::int64_t c_in, std::int64_t c_out, std::int64_t k, std::int64_t stride, bool relu,
                     Rng& rng) {
    ConvBn m;
    m.conv.in_channels = c_in;
    m.conv.out_channels = c_out;
    m.conv.kernel = k;
    m.conv.stride = stride;
    m.conv.padding = k / 2;
    // Kaiming normal, fan-out mode.
    const double std = std::sqrt(2.0 / static_cast<double>(c_out * k * k));
    m.conv.weight = param(rand_normal<T>(rng, {c_out, c_in, k, k}, std));
    m.bn.kind = nn::NormKind::kBatchNormInference;
    m.bn.gamma = param(Tensor<T>::ones({c_out}));
    m.bn.beta = param(Tensor<T>::zeros({c_out}));
    m.bn.running_mean = Tensor<T>::zeros({c_out});
    m.bn.running_var = Tensor<T>::ones({c_out});
    m.relu = relu;
    return m;
  }

  Var<T> forward(const Context<T>& ctx, const Var<T>& x) const {
    Var<T> y = nn::norm_forward(ctx, nn::conv2d_forward(ctx, x, conv), bn);
    return relu ? nn::relu(ctx, y) : y;
  }

  void collect(const std::string& p, std::vector<ParamRef<T>>& out) {
    out.push_back({p + ".conv.weight", &conv.weight.mutable_value(), conv.weight, false});
    out.push_back({p + ".bn.weight", &bn.gamma.mutable_value(), bn.gamma, false});
    out.push_back({p + ".bn.bias", &bn.beta.mutable_value(), bn.beta, false});
    out.push_back({p + ".bn.running_mean", &bn.running_mean, Var<T>(), true});
    out.push_back({p + ".bn.running_var", &bn.running_var, Var<T>(), true});
  }
};

template <class T>
nn::LinearParams<T> make_linear(std::int64_t c_in, std::int64_t c_out, Rng& rng) {
  nn::LinearParams<T> l;
  l.weight = param(trunc_normal<T>(rng, {c_in, c_out}, 0.02));
  l.bias = param(Tensor<T>::zeros({c_out}));
  return l;
}

template <class T>
nn::NormParams<T> make_layer_norm(std::int64_t c) {
  nn::NormParams<T> n;
  n.kind = nn::NormKind::kLayerNorm;
  n.gamma = param(Tensor<T>::ones({c}));
  n.beta = param(Tensor<T>::zeros({c}));
  return n;
}

template <class T>
void collect_linear(const std::string& p, nn::LinearParams<T>& l, std::vector<ParamRef<T>>& out) {
  out.push_back({p + ".weight", &l.weight.mutable_value(), l.weight, false});
  if (l.bias) out.push_back({p + ".bias", &l.bias.mutable_value(), l.bias, false});
}

template <class T>
void collect_norm(const std::string& p, nn::NormParams<T>& n, std::vector<ParamRef<T>>& out) {
  out.push_back({p + ".weight", &n.gamma.mutable_value(), n.gamma, false});
  out.push_back({p + ".bias", &n.beta.mutable_value(), n.beta, false});
}

template <class T>
struct BottleNeckUnit {
  ConvBn<T> reduce;
  ConvBn<T> spatial;
  ConvBn<T> expand;
  std::optional<ConvBn<T>> shortcut;

  static BottleNeckUnit make(std::int64_t c_in, std::int64_t c_out, std::int64_t k, std::int64_t stride, Rng& rng) {
    const std::int64_t mid = c_out / 4;
    BottleNeckUnit u;
    u.reduce = ConvBn<T>::make(c_in, mid, 1, 1, true, rng);
    u.spatial = ConvBn<T>::make(mid, mid, k, stride, true, rng);
    u.expand = ConvBn<T>::make(mid, c_out, 1, 1, false, rng);
    if (stride != 1 || c_in != c_out) u.shortcut = ConvBn<T>::make(c_in, c_out, 1, stride, false, rng);
    return u;
  }

  Var<T> forward(const Context<T>& ctx, const Var<T>& x) const {
    Var<T> y = expand.forward(ctx, spatial.forward(ctx, reduce.forward(ctx, x)));
    Var<T> s = shortcut ? shortcut->forward(ctx, x) : x;
    return nn::relu(ctx, nn::add(ctx, y, s));
  }

  void collect(const std::string& p, std::vector<ParamRef<T>>& out) {
    reduce.collect(p + ".reduce", out);
    spatial.collect(p + ".spatial", out);
    expand.collect(p + ".expand", out);
    if (shortcut) shortcut->collect(p + ".shortcut", out);
  }
};

template <class T>
struct TransformerUnit {
  std::int64_t channels = 0;
  nn::NormParams<T> norm1;
  nn::AttentionParams<T> attn;
  nn::NormParams<T> norm2;
  nn::LinearParams<T> fc1;
  nn::LinearParams<T> fc2;

  static TransformerUnit make(std::int64_t c, std::int64_t s, Rng& rng) {
    TransformerUnit u;
    u.channels = c;
    u.norm1 = make_layer_norm<T>(c);
    u.attn.channels = c;
    u.attn.sr_ratio = s;
    u.attn.q = make_linear<T>(c, c, rng);
    u.attn.k = make_linear<T>(c, c, rng);
    u.attn.v = make_linear<T>(c, c, rng);
    u.attn.out = make_linear<T>(c, c, rng);
    if (s > 1) {
      auto& r = u.attn.reduction;
      r.in_channels = r.out_channels = c;
      r.kernel = r.stride = s;
      r.padding = 0;
      r.weight = param(rand_normal<T>(rng, {c, c, s, s}, std::sqrt(2.0 / static_cast<double>(c * s * s))));
      r.bias = param(Tensor<T>::zeros({c}));
      u.attn.reduction_norm = make_layer_norm<T>(c);
    }
    u.norm2 = make_layer_norm<T>(c);
    u.fc1 = make_linear<T>(c, kMlpRatio * c, rng);
    u.fc2 = make_linear<T>(kMlpRatio * c, c, rng);
    return u;
  }

  // x: tokens [B, h*w, C]
  Var<T> forward(const Context<T>& ctx, const Var<T>& x, std::int64_t h, std::int64_t w) const {
    Var<T> y = nn::add(ctx, x, nn::sra_attention_forward(ctx, nn::norm_forward(ctx, x, norm1), attn, h, w));
    Var<T> m = nn::linear_forward(ctx, nn::norm_forward(ctx, y, norm2), fc1);
    m = nn::linear_forward(ctx, nn::gelu(ctx, m), fc2);
    return nn::add(ctx, y, m);
  }

  // Map in, map out.
  Var<T> forward_map(const Context<T>& ctx, const Var<T>& x) const {
    const std::int64_t h = x.shape()[2];
    const std::int64_t w = x.shape()[3];
    return nn::to_map(ctx, forward(ctx, nn::to_tokens(ctx, x), h, w), h, w);
  }

  void collect(const std::string& p, std::vector<ParamRef<T>>& out) {
    collect_norm(p + ".norm1", norm1, out);
    collect_linear(p + ".attn.q", attn.q, out);
    collect_linear(p + ".attn.k", attn.k, out);
    collect_linear(p + ".attn.v", attn.v, out);
    collect_linear(p + ".attn.proj", attn.out, out);
    if (attn.sr_ratio > 1) {
      out.push_back({p + ".attn.sr.weight", &attn.reduction.weight.mutable_value(), attn.reduction.weight, false});
      out.push_back({p + ".attn.sr.bias", &attn.reduction.bias.mutable_value(), attn.reduction.bias, false});
      collect_norm(p + ".attn.sr_norm", attn.reduction_norm, out);
    }
    collect_norm(p + ".norm2", norm2, out);
    collect_linear(p + ".mlp.fc1", fc1, out);
    collect_linear(p + ".mlp.fc2", fc2, out);
  }
};

// ---------------------------------------------------------------------------
// blocks
// ---------------------------------------------------------------------------

template <class T>
class ConvBlock final : public Block<T> {
 public:
  ConvBlock(const BlockSpec& s, std::int64_t c_in, Rng& rng)
      : Block<T>(s, c_in), m_(ConvBn<T>::make(c_in, s.out_channels, s.kernel, s.stride, true, rng)) {}
  Var<T> forward(const Context<T>& ctx, const Var<T>& x) const override { return m_.forward(ctx, x); }
  void collect(const std::string& p, std::vector<ParamRef<T>>& out) override { m_.collect(p, out); }

 private:
  ConvBn<T> m_;
};

template <class T>
class MaxPoolBlock final : public Block<T> {
 public:
  MaxPoolBlock(const BlockSpec& s, std::int64_t c_in) : Block<T>(s, c_in) {}
  Var<T> forward(const Context<T>& ctx, const Var<T>& x) const override {
    const auto& s = this->spec();
    return nn::max_pool2d(ctx, x, s.kernel, s.stride, s.kernel / 2);
  }
  void collect(const std::string&, std::vector<ParamRef<T>>&) override {}
};

template <class T>
class BottleNeckBlock final : public Block<T> {
 public:
  BottleNeckBlock(const BlockSpec& s, std::int64_t c_in, Rng& rng)
      : Block<T>(s, c_in), u_(BottleNeckUnit<T>::make(c_in, s.out_channels, s.kernel, s.stride, rng)) {}
  Var<T> forward(const Context<T>& ctx, const Var<T>& x) const override { return u_.forward(ctx, x); }
  void collect(const std::string& p, std::vector<ParamRef<T>>& out) override { u_.collect(p, out); }

 private:
  BottleNeckUnit<T> u_;
};

// Optional avg-pool downsampling, then a 1x1 projection when widths differ.
template <class T>
class TransformerBlock final : public Block<T> {
 public:
  TransformerBlock(const BlockSpec& s, std::int64_t c_in, Rng& rng) : Block<T>(s, c_in) {
    if (c_in != s.out_channels) proj_ = ConvBn<T>::make(c_in, s.out_channels, 1, 1, true, rng);
    u_ = TransformerUnit<T>::make(s.out_channels, s.sr_ratio, rng);
  }
  Var<T> forward(const Context<T>& ctx, const Var<T>& x) const override {
    const auto st = this->spec().stride;
    Var<T> y = st == 1 ? x : nn::avg_pool2d(ctx, x, st, st);
    if (proj_) y = proj_->forward(ctx, y);
    return u_.forward_map(ctx, y);
  }
  void collect(const std::string& p, std::vector<ParamRef<T>>& out) override {
    if (proj_) proj_->collect(p + ".proj", out);
    u_.collect(p + ".transformer", out);
  }

 private:
  std::optional<ConvBn<T>> proj_;
  TransformerUnit<T> u_;
};

template <class T>
class MixBlock final : public Block<T> {
 public:
  MixBlock(const BlockSpec& s, std::int64_t c_in, Rng& rng) : Block<T>(s, c_in) {
    const MixWidths mw = mix_widths(s);
    const std::int64_t c = s.out_channels;
    switch (s.kind) {
      case BlockKind::kMixA:
        proj_ = ConvBn<T>::make(c_in, c, 1, 1, true, rng);
        transformer_ = TransformerUnit<T>::make(mw.transformer, s.sr_ratio, rng);
        bottleneck_ = BottleNeckUnit<T>::make(mw.conv, mw.conv, s.kernel, 1, rng);
        break;
      case BlockKind::kMixB:
        proj_ = ConvBn<T>::make(c_in, mw.conv, 1, 1, true, rng);
        bottleneck_ = BottleNeckUnit<T>::make(mw.conv, mw.conv, s.kernel, 1, rng);
        transformer_ = TransformerUnit<T>::make(mw.transformer, s.sr_ratio, rng);
        break;
      default:
        proj_ = ConvBn<T>::make(c_in, mw.transformer, 1, 1, true, rng);
        transformer_ = TransformerUnit<T>::make(mw.transformer, s.sr_ratio, rng);
        bottleneck_ = BottleNeckUnit<T>::make(mw.transformer, mw.conv, s.kernel, 1, rng);
        break;
    }
  }

  Var<T> forward(const Context<T>& ctx, const Var<T>& x) const override {
    const auto& s = this->spec();
    Var<T> y = s.stride == 1 ? x : nn::avg_pool2d(ctx, x, s.stride, s.stride);
    y = proj_.forward(ctx, y);
    Var<T> out;
    switch (s.kind) {
      case BlockKind::kMixA: {
        auto [a, b] = nn::channel_split(ctx, y, mix_widths(s).transformer);
        Var<T> ta = transformer_.forward_map(ctx, a);
        Var<T> tb = bottleneck_.forward(ctx, b);
        out = nn::channel_concat(ctx, ta, tb);
        break;
      }
      case BlockKind::kMixB: {
        Var<T> local = bottleneck_.forward(ctx, y);
        Var<T> global = transformer_.forward_map(ctx, local);
        out = nn::channel_concat(ctx, local, global);
        break;
      }
      default: {
        Var<T> global = transformer_.forward_map(ctx, y);
        Var<T> local = bottleneck_.forward(ctx, global);
        out = nn::channel_concat(ctx, global, local);
        break;
      }
    }
    if (s.stride == 1 && this->in_channels() == s.out_channels) out = nn::add(ctx, out, x);
    return out;
  }

  void collect(const std::string& p, std::vector<ParamRef<T>>& out) override {
    proj_.collect(p + ".proj", out);
    if (this->spec().kind == BlockKind::kMixB) {
      bottleneck_.collect(p + ".bottleneck", out);
      transformer_.collect(p + ".transformer", out);
    } else {
      transformer_.collect(p + ".transformer", out);
      bottleneck_.collect(p + ".bottleneck", out);
    }
  }

 private:
  ConvBn<T> proj_;
  TransformerUnit<T> transformer_;
  BottleNeckUnit<T> bottleneck_;
};

}  // namespace

const char* block_kind_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::kConv: return "conv";
    case BlockKind::kMaxPool: return "maxpool";
    case BlockKind::kBottleNeck: return "bottleneck";
    case BlockKind::kTransformer: return "transformer";
    case BlockKind::kMixA: return "mixa";
    case BlockKind::kMixB: return "mixb";
    case BlockKind::kMixC: return "mixc";
  }
  return "unknown";
}

BlockKind parse_block_kind(const std::string& name) {
  for (BlockKind k : {BlockKind::kConv, BlockKind::kMaxPool, BlockKind::kBottleNeck, BlockKind::kTransformer,
                      BlockKind::kMixA, BlockKind::kMixB, BlockKind::kMixC}) {
    if (name == block_kind_name(k)) return k;
  }
  throw InvalidArgument("unknown block kind '" + name + "'");
}

bool has_attention(BlockKind kind) { return kind == BlockKind::kTransformer || is_mix(kind); }

bool is_mix(BlockKind kind) {
  return kind == BlockKind::kMixA || kind == BlockKind::kMixB || kind == BlockKind::kMixC;
}

BlockSpec conv_block(std::int64_t c, std::int64_t kernel, std::int64_t stride) {
  return {BlockKind::kConv, c, stride, 0.0, 1, kernel};
}

BlockSpec maxpool_block(std::int64_t c) { return {BlockKind::kMaxPool, c, 2, 0.0, 1, 3}; }

BlockSpec bottleneck_block(std::int64_t c, std::int64_t stride, std::int64_t kernel) {
  return {BlockKind::kBottleNeck, c, stride, 0.0, 1, kernel};
}

BlockSpec transformer_block(std::int64_t c, std::int64_t stride, std::int64_t sr_ratio) {
  return {BlockKind::kTransformer, c, stride, 0.0, sr_ratio, 3};
}

BlockSpec mix_block(BlockKind kind, std::int64_t c, double ratio, std::int64_t sr_ratio, std::int64_t kernel,
                    std::int64_t stride) {
  return {kind, c, stride, ratio, sr_ratio, kernel};
}

MixWidths mix_widths(const BlockSpec& spec) {
  MixWidths mw;
  if (!is_mix(spec.kind)) {
    if (spec.kind == BlockKind::kTransformer) mw.transformer = spec.out_channels;
    return mw;
  }
  mw.transformer = static_cast<std::int64_t>(std::llround(spec.ratio * static_cast<double>(spec.out_channels)));
  mw.conv = spec.out_channels - mw.transformer;
  return mw;
}

std::vector<std::string> block_violations(const BlockSpec& s, std::int64_t c_in) {
  std::vector<std::string> v;
  const std::string name = block_kind_name(s.kind);
  if (c_in <= 0) v.push_back(name + ": input channels must be positive");
  if (s.out_channels <= 0) v.push_back(name + ": output channels must be positive");
  if (s.stride < 1) v.push_back(name + ": stride must be >= 1");
  if (s.kernel < 1 || s.kernel % 2 == 0) v.push_back(name + ": kernel must be odd and positive");
  if (s.sr_ratio < 1) v.push_back(name + ": spatial reduction must be >= 1");
  if (!is_mix(s.kind) && s.ratio != 0.0) v.push_back(name + ": shrinking ratio only applies to mixed blocks");
  if (!has_attention(s.kind) && s.sr_ratio != 1) v.push_back(name + ": spatial reduction only applies to attention");
  if (!v.empty()) return v;

  switch (s.kind) {
    case BlockKind::kConv:
      break;
    case BlockKind::kMaxPool:
      if (c_in != s.out_channels) v.push_back("maxpool: cannot change channels (" + std::to_string(c_in) + " -> " +
                                              std::to_string(s.out_channels) + ")");
      break;
    case BlockKind::kBottleNeck:
      if (s.out_channels % 4 != 0) {
        v.push_back("bottleneck: width " + std::to_string(s.out_channels) + " not divisible by 4");
      }
      break;
    case BlockKind::kTransformer:
      if (s.out_channels % nn::kHeadDim != 0) {
        v.push_back("transformer: width " + std::to_string(s.out_channels) + " not divisible by 32");
      }
      if (s.stride > 2) v.push_back("transformer: stride must be 1 or 2");
      break;
    default: {
      if (!(s.ratio > 0.0 && s.ratio < 1.0)) {
        v.push_back(name + ": shrinking ratio R=" + fmt_ratio(s.ratio) + " outside (0, 1)");
        break;
      }
      if (s.kind == BlockKind::kMixB && s.ratio != 0.5) {
        v.push_back("mixb: shrinking ratio must be 0.5 (got R=" + fmt_ratio(s.ratio) + ")");
      }
      if (s.stride > 2) v.push_back(name + ": stride must be 1 or 2");
      const double exact = s.ratio * static_cast<double>(s.out_channels);
      const MixWidths mw = mix_widths(s);
      if (std::abs(exact - static_cast<double>(mw.transformer)) > 1e-9) {
        v.push_back(name + ": R*C = " + fmt_ratio(exact) + " is not an integer width");
      } else if (mw.transformer % nn::kHeadDim != 0) {
        v.push_back(name + ": transformer branch width " + std::to_string(mw.transformer) + " not divisible by 32");
      }
      if (mw.conv % 4 != 0) {
        v.push_back(name + ": bottleneck branch width " + std::to_string(mw.conv) + " not divisible by 4");
      }
      break;
    }
  }
  return v;
}

std::vector<std::string> block_resolution_violations(const BlockSpec& s, std::int64_t h, std::int64_t w) {
  std::vector<std::string> v;
  const std::string name = block_kind_name(s.kind);
  if (h <= 0 || w <= 0) {
    v.push_back(name + ": empty input map");
    return v;
  }
  if (s.kind == BlockKind::kMaxPool) return v;
  if (s.kind == BlockKind::kConv) {
    if (conv_out_extent(h, s.kernel, s.stride, s.kernel / 2) <= 0) v.push_back("conv: map smaller than kernel");
    return v;
  }
  if (h % s.stride != 0 || w % s.stride != 0) {
    v.push_back(name + ": " + std::to_string(h) + "x" + std::to_string(w) + " map not divisible by stride " +
                std::to_string(s.stride));
    return v;
  }
  if (has_attention(s.kind)) {
    const std::int64_t oh = h / s.stride, ow = w / s.stride;
    if (oh % s.sr_ratio != 0 || ow % s.sr_ratio != 0) {
      v.push_back(name + ": spatial reduction " + std::to_string(s.sr_ratio) + " does not divide " +
                  std::to_string(oh) + "x" + std::to_string(ow));
    }
  }
  return v;
}

std::int64_t block_out_extent(const BlockSpec& s, std::int64_t in) {
  switch (s.kind) {
    case BlockKind::kConv:
    case BlockKind::kMaxPool:
      return conv_out_extent(in, s.kernel, s.stride, s.kernel / 2);
    case BlockKind::kBottleNeck:
      return conv_out_extent(in, s.kernel, s.stride, s.kernel / 2);
    default:
      return in / s.stride;
  }
}

Trace block_trace(const BlockSpec& s, std::int64_t c_in, std::int64_t h, std::int64_t w) {
  Trace t;
  const std::int64_t c = s.out_channels;
  switch (s.kind) {
    case BlockKind::kConv:
      trace_conv_bn(t, c_in, c, s.kernel, s.stride, h, w, true);
      break;
    case BlockKind::kMaxPool:
      t.push_back(pool_desc(OpKind::kMaxPool, c_in, s.kernel, s.stride, s.kernel / 2, h, w));
      break;
    case BlockKind::kBottleNeck:
      trace_bottleneck(t, c_in, c, s.kernel, s.stride, h, w);
      break;
    case BlockKind::kTransformer: {
      auto [ph, pw] = trace_entry_pool(t, s, c_in, h, w);
      if (c_in != c) trace_conv_bn(t, c_in, c, 1, 1, ph, pw, true);
      trace_transformer_unit(t, c, ph, pw, s.sr_ratio);
      break;
    }
    default: {
      const MixWidths mw = mix_widths(s);
      auto [ph, pw] = trace_entry_pool(t, s, c_in, h, w);
      if (s.kind == BlockKind::kMixA) {
        trace_conv_bn(t, c_in, c, 1, 1, ph, pw, true);
        t.push_back(split_desc(OpKind::kSplit, mw.transformer, mw.conv, ph, pw));
        trace_transformer_unit(t, mw.transformer, ph, pw, s.sr_ratio);
        trace_bottleneck(t, mw.conv, mw.conv, s.kernel, 1, ph, pw);
        t.push_back(split_desc(OpKind::kConcat, mw.transformer, mw.conv, ph, pw));
      } else if (s.kind == BlockKind::kMixB) {
        trace_conv_bn(t, c_in, mw.conv, 1, 1, ph, pw, true);
        trace_bottleneck(t, mw.conv, mw.conv, s.kernel, 1, ph, pw);
        trace_transformer_unit(t, mw.transformer, ph, pw, s.sr_ratio);
        t.push_back(split_desc(OpKind::kConcat, mw.conv, mw.transformer, ph, pw));
      } else {
        trace_conv_bn(t, c_in, mw.transformer, 1, 1, ph, pw, true);
        trace_transformer_unit(t, mw.transformer, ph, pw, s.sr_ratio);
        trace_bottleneck(t, mw.transformer, mw.conv, s.kernel, 1, ph, pw);
        t.push_back(split_desc(OpKind::kConcat, mw.transformer, mw.conv, ph, pw));
      }
      if (s.stride == 1 && c_in == c) t.push_back(map_desc(OpKind::kAdd, c, ph, pw));
      break;
    }
  }
  return t;
}

template <class T>
std::unique_ptr<Block<T>> make_block(const BlockSpec& spec, std::int64_t c_in, Rng& rng) {
  const auto v = block_violations(spec, c_in);
  if (!v.empty()) {
    std::string msg = v.front();
    for (std::size_t i = 1; i < v.size(); ++i) msg += "; " + v[i];
    throw InvalidArgument(msg);
  }
  switch (spec.kind) {
    case BlockKind::kConv: return std::make_unique<ConvBlock<T>>(spec, c_in, rng);
    case BlockKind::kMaxPool: return std::make_unique<MaxPoolBlock<T>>(spec, c_in);
    case BlockKind::kBottleNeck: return std::make_unique<BottleNeckBlock<T>>(spec, c_in, rng);
    case BlockKind::kTransformer: return std::make_unique<TransformerBlock<T>>(spec, c_in, rng);
    default: return std::make_unique<MixBlock<T>>(spec, c_in, rng);
  }
}

template <class T>
std::vector<ParamRef<T>> block_parameters(Block<T>& block, const std::string& prefix) {
  std::vector<ParamRef<T>> out;
  block.collect(prefix.empty() ? std::string(block_kind_name(block.spec().kind)) : prefix, out);
  return out;
}

template <class T>
std::int64_t trainable_count(const std::vector<ParamRef<T>>& params) {
  std::int64_t n = 0;
  for (const auto& p : params) {
    if (!p.buffer) n += p.tensor->size();
  }
  return n;
}

template std::unique_ptr<Block<float>> make_block<float>(const BlockSpec&, std::int64_t, Rng&);
template std::unique_ptr<Block<double>> make_block<double>(const BlockSpec&, std::int64_t, Rng&);
template std::vector<ParamRef<float>> block_parameters<float>(Block<float>&, const std::string&);
template std::vector<ParamRef<double>> block_parameters<double>(Block<double>&, const std::string&);
template std::int64_t trainable_count<float>(const std::vector<ParamRef<float>>&);
template std::int64_t trainable_count<double>(const std::vector<ParamRef<double>>&);

}  // namespace trtvit
