// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/gradcheck_suite.hpp"

#include <cmath>

#include "trtvit/ops.hpp"

namespace trtvit {

namespace {

using V = Var<double>;
using Ctx = Context<double>;

struct OpCase {
  std::vector<GradLeaf> leaves;
  GradForward forward;
};

class Maker {
 public:
  explicit Maker(std::uint64_t seed) : rng_(seed, 0x3c6ef372fe94f82bULL) {}

  V leaf(std::vector<GradLeaf>& leaves, const std::string& name, Shape shape, double std = 1.0, double mean = 0.0) {
    Tensor<double> t = rand_normal<double>(rng_, std::move(shape), std);
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] += mean;
    V v = V::leaf(std::move(t), true);
    leaves.push_back({name, v});
    return v;
  }

  Tensor<double> tensor(Shape shape, double std) { return rand_normal<double>(rng_, std::move(shape), std); }
  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

OpCase make_op_case(const std::string& name, std::int64_t c, std::int64_t hw, std::uint64_t seed) {
  Maker mk(seed);
  OpCase oc;
  auto& L = oc.leaves;
  const std::int64_t n = hw * hw;
  const double wstd = 1.0 / std::sqrt(static_cast<double>(c));
  auto map = [&] { return mk.leaf(L, "x", {2, c, hw, hw}); };
  auto tokens = [&] { return mk.leaf(L, "x", {2, n, c}); };

  if (name == "conv2d" || name == "conv2d_strided" || name == "conv2d_1x1") {
    const std::int64_t k = name == "conv2d_1x1" ? 1 : 3;
    const std::int64_t s = name == "conv2d_strided" ? 2 : 1;
    V x = map();
    V w = mk.leaf(L, "weight", {c, c, k, k}, wstd / static_cast<double>(k));
    V b = mk.leaf(L, "bias", {c}, 0.1);
    oc.forward = [=](const Ctx& ctx) { return nn::conv2d(ctx, x, w, b, s, k / 2); };
  } else if (name == "linear") {
    V x = tokens();
    V w = mk.leaf(L, "weight", {c, c}, wstd);
    V b = mk.leaf(L, "bias", {c}, 0.1);
    oc.forward = [=](const Ctx& ctx) { return nn::linear(ctx, x, w, b); };
  } else if (name == "batch_norm") {
    V x = map();
    V g = mk.leaf(L, "gamma", {c}, 0.1, 1.0);
    V b = mk.leaf(L, "beta", {c}, 0.1);
    Tensor<double> rm = mk.tensor({c}, 0.1);
    Tensor<double> rv = mk.tensor({c}, 0.5);
    for (std::int64_t i = 0; i < c; ++i) rv[i] = 1.0 + std::abs(rv[i]);
    oc.forward = [=](const Ctx& ctx) { return nn::batch_norm(ctx, x, g, b, rm, rv, nn::kNormEps); };
  } else if (name == "layer_norm") {
    V x = tokens();
    V g = mk.leaf(L, "gamma", {c}, 0.1, 1.0);
    V b = mk.leaf(L, "beta", {c}, 0.1);
    oc.forward = [=](const Ctx& ctx) { return nn::layer_norm(ctx, x, g, b, nn::kNormEps); };
  } else if (name == "relu") {
    V x = map();
    oc.forward = [=](const Ctx& ctx) { return nn::relu(ctx, x); };
  } else if (name == "gelu") {
    V x = tokens();
    oc.forward = [=](const Ctx& ctx) { return nn::gelu(ctx, x); };
  } else if (name == "softmax") {
    V x = tokens();
    oc.forward = [=](const Ctx& ctx) { return nn::softmax(ctx, x); };
  } else if (name == "avg_pool2d") {
    V x = map();
    oc.forward = [=](const Ctx& ctx) { return nn::avg_pool2d(ctx, x, 2, 2); };
  } else if (name == "max_pool2d") {
    V x = map();
    oc.forward = [=](const Ctx& ctx) { return nn::max_pool2d(ctx, x, 3, 2, 1); };
  } else if (name == "global_avg_pool") {
    V x = map();
    oc.forward = [=](const Ctx& ctx) { return nn::global_avg_pool(ctx, x); };
  } else if (name == "split_concat") {
    V x = map();
    const std::int64_t c1 = c / 4;
    oc.forward = [=](const Ctx& ctx) {
      auto [a, b] = nn::channel_split(ctx, x, c1);
      return nn::channel_concat(ctx, nn::scale(ctx, b, 2.0), a);
    };
  } else if (name == "add") {
    V x = map();
    V y = mk.leaf(L, "y", {2, c, hw, hw});
    oc.forward = [=](const Ctx& ctx) { return nn::add(ctx, x, y); };
  } else if (name == "tokens_map") {
    V x = map();
    V w = mk.leaf(L, "weight", {c, c}, wstd);
    oc.forward = [=](const Ctx& ctx) { return nn::to_map(ctx, nn::linear(ctx, nn::to_tokens(ctx, x), w, V()), hw, hw); };
  } else if (name == "heads") {
    V x = tokens();
    V y = mk.leaf(L, "y", {2, n, c});
    const std::int64_t heads = std::max<std::int64_t>(1, c / nn::kHeadDim);
    oc.forward = [=](const Ctx& ctx) {
      V a = nn::split_heads(ctx, x, heads);
      V b = nn::split_heads(ctx, y, heads);
      return nn::merge_heads(ctx, nn::add(ctx, a, nn::scale(ctx, b, 0.5)), heads);
    };
  } else if (name == "batched_matmul" || name == "batched_matmul_tb") {
    const bool tb = name == "batched_matmul_tb";
    V a = mk.leaf(L, "a", {3, n, c}, wstd);
    V b = mk.leaf(L, "b", tb ? Shape{3, hw, c} : Shape{3, c, hw});
    oc.forward = [=](const Ctx& ctx) { return nn::batched_matmul(ctx, a, b, tb); };
  } else if (name == "attention" || name == "attention_sr") {
    const std::int64_t ch = std::max<std::int64_t>(nn::kHeadDim, c - c % nn::kHeadDim);
    V x = mk.leaf(L, "x", {2, n, ch});
    nn::AttentionParams<double> p;
    p.channels = ch;
    p.sr_ratio = name == "attention_sr" ? 2 : 1;
    const double s = 1.0 / std::sqrt(static_cast<double>(ch));
    auto lin = [&](nn::LinearParams<double>& lp, const std::string& nm) {
      lp.weight = mk.leaf(L, nm + ".weight", {ch, ch}, s);
      lp.bias = mk.leaf(L, nm + ".bias", {ch}, 0.1);
    };
    lin(p.q, "q");
    lin(p.k, "k");
    lin(p.v, "v");
    lin(p.out, "proj");
    if (p.sr_ratio > 1) {
      const std::int64_t r = p.sr_ratio;
      p.reduction.in_channels = p.reduction.out_channels = ch;
      p.reduction.kernel = p.reduction.stride = r;
      p.reduction.weight = mk.leaf(L, "sr.weight", {ch, ch, r, r}, s / static_cast<double>(r));
      p.reduction.bias = mk.leaf(L, "sr.bias", {ch}, 0.1);
      p.reduction_norm.kind = nn::NormKind::kLayerNorm;
      p.reduction_norm.gamma = mk.leaf(L, "sr_norm.gamma", {ch}, 0.1, 1.0);
      p.reduction_norm.beta = mk.leaf(L, "sr_norm.beta", {ch}, 0.1);
    }
    oc.forward = [=](const Ctx& ctx) { return nn::sra_attention_forward(ctx, x, p, hw, hw); };
  } else {
    throw NotFound("unknown op '" + name + "'");
  }
  return oc;
}

}  // namespace

const std::vector<std::string>& gradcheck_op_names() {
  static const std::vector<std::string> names = {
      "conv2d",     "conv2d_strided", "conv2d_1x1",      "linear",       "batch_norm",     "layer_norm",
      "relu",       "gelu",           "softmax",         "avg_pool2d",   "max_pool2d",     "global_avg_pool",
      "split_concat", "add",          "tokens_map",      "heads",        "batched_matmul", "batched_matmul_tb",
      "attention",  "attention_sr"};
  return names;
}

GradcheckReport gradcheck_op(const std::string& name, std::int64_t c, std::int64_t hw, std::uint64_t seed,
                             const GradcheckOptions& opts) {
  if (c < 4 || hw < 2 || hw % 2) throw InvalidArgument("gradcheck: need c >= 4 and an even hw >= 2");
  OpCase oc = make_op_case(name, c, hw, seed);
  GradcheckOptions o = opts;
  o.seed = seed;
  return gradcheck(oc.forward, oc.leaves, o);
}

BlockSpec gradcheck_block_spec(BlockKind kind, std::int64_t c) {
  switch (kind) {
    case BlockKind::kConv: return conv_block(c, 3, 1);
    case BlockKind::kMaxPool: return maxpool_block(c);
    case BlockKind::kBottleNeck: return bottleneck_block(c, 1);
    case BlockKind::kTransformer: return transformer_block(c, 1, 2);
    case BlockKind::kMixA:
    case BlockKind::kMixB:
    case BlockKind::kMixC: return mix_block(kind, c, 0.5, 2, 3);
  }
  throw InvalidArgument("gradcheck: unknown block kind");
}

GradcheckReport gradcheck_block(const BlockSpec& spec, std::int64_t c_in, std::int64_t hw, std::uint64_t seed,
                                const GradcheckOptions& opts) {
  Rng rng(seed, 0xbb67ae8584caa73bULL);
  Rng init = rng.split(1);
  std::unique_ptr<Block<double>> block = make_block<double>(spec, c_in, init);
  const auto rv = block_resolution_violations(spec, hw, hw);
  if (!rv.empty()) throw InvalidArgument("gradcheck: " + rv.front());

  // Fresh initialization leaves biases at zero and batch norm at identity,
  // which would hide mistakes in those gradients.
  std::vector<GradLeaf> leaves;
  Rng noise = rng.split(2);
  for (auto& p : block_parameters(*block, std::string(block_kind_name(spec.kind)))) {
    Tensor<double>& t = *p.tensor;
    const bool var = p.path.size() >= 12 && p.path.compare(p.path.size() - 12, 12, ".running_var") == 0;
    for (std::int64_t i = 0; i < t.size(); ++i) {
      const double z = noise.normal();
      if (var) {
        t[i] = 1.0 + std::abs(z) * 0.5;
      } else {
        t[i] += 0.1 * z;
      }
    }
    if (!p.buffer) leaves.push_back({p.path, p.var});
  }
  Var<double> x = Var<double>::leaf(rand_normal<double>(rng, {2, c_in, hw, hw}, 1.0), true);
  leaves.insert(leaves.begin(), {"input", x});
  Block<double>* b = block.get();
  GradcheckOptions o = opts;
  o.seed = seed;
  // The block must outlive the closure; gradcheck runs synchronously.
  return gradcheck([b, x](const Context<double>& ctx) { return b->forward(ctx, x); }, leaves, o);
}

}  // namespace trtvit
