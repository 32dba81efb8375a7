// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

// Each primitive against an independent, deliberately naive oracle.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "trtvit/ops.hpp"
#include "trtvit/rng.hpp"

namespace trtvit {
namespace {

using D = Tensor<double>;
using V = Var<double>;

V leaf(const D& t) { return V::leaf(t); }

D naive_conv(const D& x, const D& w, const D* b, int stride, int pad) {
  const auto B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const auto O = w.dim(0), K = w.dim(2);
  const auto OH = (H + 2 * pad - K) / stride + 1, OW = (W + 2 * pad - K) / stride + 1;
  D y({B, O, OH, OW});
  for (std::int64_t n = 0; n < B; ++n)
    for (std::int64_t o = 0; o < O; ++o)
      for (std::int64_t i = 0; i < OH; ++i)
        for (std::int64_t j = 0; j < OW; ++j) {
          double s = b ? (*b)[o] : 0.0;
          for (std::int64_t c = 0; c < C; ++c)
            for (std::int64_t u = 0; u < K; ++u)
              for (std::int64_t v = 0; v < K; ++v) {
                const auto yy = i * stride - pad + u, xx = j * stride - pad + v;
                if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
                s += x.at({n, c, yy, xx}) * w.at({o, c, u, v});
              }
          y.at({n, o, i, j}) = s;
        }
  return y;
}

struct ConvCase {
  int c_in, c_out, k, stride, pad, hw;
  bool bias;
};

class ConvOracle : public ::testing::TestWithParam<ConvCase> {};

TEST_P(ConvOracle, MatchesDirectLoops) {
  const auto p = GetParam();
  Rng r(p.c_in * 100 + p.k);
  const D x = rand_normal<double>(r, {2, p.c_in, p.hw, p.hw}, 1.0);
  const D w = rand_normal<double>(r, {p.c_out, p.c_in, p.k, p.k}, 1.0);
  const D b = rand_normal<double>(r, {p.c_out}, 1.0);
  MacCounter mc;
  Trace tr;
  Context<double> ctx{&mc, &tr, false};
  const D y = nn::conv2d(ctx, leaf(x), leaf(w), p.bias ? leaf(b) : V(), p.stride, p.pad).value();
  const D ref = naive_conv(x, w, p.bias ? &b : nullptr, p.stride, p.pad);
  ASSERT_EQ(y.shape(), ref.shape());
  for (std::int64_t i = 0; i < y.size(); ++i) ASSERT_NEAR(y[i], ref[i], 1e-10);
  const auto oh = ref.dim(2), ow = ref.dim(3);
  EXPECT_EQ(mc.total(), static_cast<std::uint64_t>(2 * oh * ow * p.c_out * p.c_in * p.k * p.k));
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr[0].kind, OpKind::kConv2d);
  EXPECT_EQ(tr[0].bias, p.bias);
}

INSTANTIATE_TEST_SUITE_P(Shapes, ConvOracle,
                         ::testing::Values(ConvCase{3, 5, 3, 1, 1, 7, true}, ConvCase{4, 6, 3, 2, 1, 8, false},
                                           ConvCase{8, 4, 1, 1, 0, 5, false}, ConvCase{3, 2, 7, 2, 3, 9, true},
                                           ConvCase{2, 3, 2, 2, 0, 6, true}, ConvCase{5, 5, 1, 2, 0, 6, false}));

TEST(Ops, LinearMatchesLoops) {
  Rng r(1);
  const D x = rand_normal<double>(r, {2, 3, 4}, 1.0), w = rand_normal<double>(r, {4, 5}, 1.0),
          b = rand_normal<double>(r, {5}, 1.0);
  MacCounter mc;
  const D y = nn::linear(Context<double>{&mc}, leaf(x), leaf(w), leaf(b)).value();
  for (int t = 0; t < 6; ++t)
    for (int o = 0; o < 5; ++o) {
      double s = b[o];
      for (int i = 0; i < 4; ++i) s += x[t * 4 + i] * w[i * 5 + o];
      ASSERT_NEAR(y[t * 5 + o], s, 1e-12);
    }
  EXPECT_EQ(mc.total(), 6u * 4 * 5);
}

TEST(Ops, BatchNormInference) {
  Rng r(2);
  const D x = rand_normal<double>(r, {2, 3, 4, 4}, 2.0);
  const D g = rand_normal<double>(r, {3}, 1.0), b = rand_normal<double>(r, {3}, 1.0);
  const D m = rand_normal<double>(r, {3}, 1.0);
  D v({3});
  for (int i = 0; i < 3; ++i) v[i] = 0.5 + i;
  const D y = nn::batch_norm(Context<double>{}, leaf(x), leaf(g), leaf(b), m, v, 1e-5).value();
  for (std::int64_t i = 0; i < x.size(); ++i) {
    const auto c = (i / 16) % 3;
    ASSERT_NEAR(y[i], (x[i] - m[c]) / std::sqrt(v[c] + 1e-5) * g[c] + b[c], 1e-12);
  }
}

TEST(Ops, LayerNormTwoPass) {
  Rng r(3);
  D x = rand_normal<double>(r, {2, 5, 8}, 3.0);
  for (std::int64_t i = 0; i < x.size(); ++i) x[i] += 100.0;  // large offset stresses one-pass variance
  const D g = rand_normal<double>(r, {8}, 1.0), b = rand_normal<double>(r, {8}, 1.0);
  const D y = nn::layer_norm(Context<double>{}, leaf(x), leaf(g), leaf(b), 1e-5).value();
  for (int row = 0; row < 10; ++row) {
    double mean = 0, var = 0;
    for (int i = 0; i < 8; ++i) mean += x[row * 8 + i];
    mean /= 8;
    for (int i = 0; i < 8; ++i) var += (x[row * 8 + i] - mean) * (x[row * 8 + i] - mean);
    var /= 8;
    for (int i = 0; i < 8; ++i) {
      ASSERT_NEAR(y[row * 8 + i], (x[row * 8 + i] - mean) / std::sqrt(var + 1e-5) * g[i] + b[i], 1e-9);
    }
  }
}

TEST(Ops, GeluCloseToErfForm) {
  D x({401});
  for (int i = 0; i < 401; ++i) x[i] = -10.0 + 0.05 * i;
  const D y = nn::gelu(Context<double>{}, leaf(x)).value();
  for (int i = 0; i < 401; ++i) {
    const double exact = 0.5 * x[i] * (1.0 + std::erf(x[i] / std::sqrt(2.0)));
    ASSERT_NEAR(y[i], exact, 1e-3) << x[i];
    ASSERT_DOUBLE_EQ(y[i], nn::gelu_tanh(x[i]));
  }
}

TEST(Ops, ReluAndAdd) {
  const D x({4}, std::vector<double>{-1, 0, 2, -3});
  const D y = nn::relu(Context<double>{}, leaf(x)).value();
  EXPECT_EQ(y.vec(), (std::vector<double>{0, 0, 2, 0}));
  const D z = nn::add(Context<double>{}, leaf(x), leaf(x)).value();
  EXPECT_EQ(z.vec(), (std::vector<double>{-2, 0, 4, -6}));
  EXPECT_THROW(nn::add(Context<double>{}, leaf(x), leaf(D({3}))), DimensionError);
}

TEST(Ops, SoftmaxExtremes) {
  const double big = 1e4;
  const D x({3, 3}, std::vector<double>{big, 0, -big, 1000, 1000, 1000, -1e300, 0, -1e300});
  const D y = nn::softmax(Context<double>{}, leaf(x)).value();
  for (int r = 0; r < 3; ++r) {
    double s = 0;
    for (int c = 0; c < 3; ++c) {
      ASSERT_TRUE(std::isfinite(y[r * 3 + c]));
      s += y[r * 3 + c];
    }
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
  EXPECT_DOUBLE_EQ(y[0], 1.0);
  EXPECT_NEAR(y[3], 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(y[7], 1.0);
  const Tensor<float> yf =
      nn::softmax(Context<float>{}, Var<float>::leaf(Tensor<float>({2}, std::vector<float>{88.f, 89.f}))).value();
  EXPECT_NEAR(yf[0] + yf[1], 1.0f, 1e-6f);
}

TEST(Ops, PoolsMatchWindows) {
  Rng r(4);
  const D x = rand_normal<double>(r, {1, 2, 6, 6}, 1.0);
  const D a = nn::avg_pool2d(Context<double>{}, leaf(x), 2, 2).value();
  const D m = nn::max_pool2d(Context<double>{}, leaf(x), 3, 2, 1).value();
  const D g = nn::global_avg_pool(Context<double>{}, leaf(x)).value();
  ASSERT_EQ(a.shape(), (Shape{1, 2, 3, 3}));
  ASSERT_EQ(m.shape(), (Shape{1, 2, 3, 3}));
  ASSERT_EQ(g.shape(), (Shape{1, 2}));
  for (int c = 0; c < 2; ++c) {
    double tot = 0;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) tot += x.at({0, c, i, j});
    EXPECT_NEAR(g[c], tot / 36, 1e-12);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0, mx = -std::numeric_limits<double>::infinity();
        for (int u = 0; u < 2; ++u)
          for (int v = 0; v < 2; ++v) s += x.at({0, c, 2 * i + u, 2 * j + v});
        for (int u = -1; u <= 1; ++u)
          for (int v = -1; v <= 1; ++v) {
            const int yy = 2 * i + u, xx = 2 * j + v;
            if (yy >= 0 && yy < 6 && xx >= 0 && xx < 6) mx = std::max(mx, x.at({0, c, yy, xx}));
          }
        EXPECT_NEAR(a.at({0, c, i, j}), s / 4, 1e-12);
        EXPECT_EQ(m.at({0, c, i, j}), mx);
      }
  }
}

TEST(Ops, SplitConcatRoundTrip) {
  Rng r(5);
  const D x = rand_normal<double>(r, {2, 7, 3, 3}, 1.0);
  Context<double> ctx;
  auto [a, b] = nn::channel_split(ctx, leaf(x), 3);
  EXPECT_EQ(a.shape(), (Shape{2, 3, 3, 3}));
  EXPECT_EQ(b.shape(), (Shape{2, 4, 3, 3}));
  EXPECT_TRUE(nn::channel_concat(ctx, a, b).value().bit_equal(x));
  EXPECT_THROW(nn::channel_split(ctx, leaf(x), 7), InvalidArgument);
}

TEST(Ops, TokensAndHeadsRoundTrip) {
  Rng r(6);
  const D x = rand_normal<double>(r, {2, 64, 3, 5}, 1.0);
  Context<double> ctx;
  V t = nn::to_tokens(ctx, leaf(x));
  ASSERT_EQ(t.shape(), (Shape{2, 15, 64}));
  EXPECT_EQ(t.value().at({1, 7, 9}), x.at({1, 9, 1, 2}));
  EXPECT_TRUE(nn::to_map(ctx, t, 3, 5).value().bit_equal(x));
  V h = nn::split_heads(ctx, t, 2);
  ASSERT_EQ(h.shape(), (Shape{4, 15, 32}));
  EXPECT_EQ(h.value().at({3, 7, 1}), t.value().at({1, 7, 33}));
  EXPECT_TRUE(nn::merge_heads(ctx, h, 2).value().bit_equal(t.value()));
}

// Attention computed one head, one query at a time.
D naive_attention(const D& x, const nn::AttentionParams<double>& p, int h, int w) {
  const auto B = x.dim(0), N = x.dim(1), C = x.dim(2);
  auto lin = [&](const D& in, const nn::LinearParams<double>& lp, std::int64_t rows) {
    D out({rows, C});
    for (std::int64_t t = 0; t < rows; ++t)
      for (std::int64_t o = 0; o < C; ++o) {
        double s = lp.bias.value()[o];
        for (std::int64_t i = 0; i < C; ++i) s += in[t * C + i] * lp.weight.value()[i * C + o];
        out[t * C + o] = s;
      }
    return out;
  };
  const std::int64_t S = p.sr_ratio, M = (h / S) * (w / S), heads = C / 32;
  D y({B, N, C});
  for (std::int64_t b = 0; b < B; ++b) {
    D xb({N, C});
    for (std::int64_t i = 0; i < N * C; ++i) xb[i] = x[b * N * C + i];
    D kv_src = xb;
    if (S > 1) {
      D map({1, C, h, w});
      for (std::int64_t t = 0; t < N; ++t)
        for (std::int64_t c = 0; c < C; ++c) map[c * N + t] = xb[t * C + c];
      const D red = naive_conv(map, p.reduction.weight.value(), &p.reduction.bias.value(), static_cast<int>(S), 0);
      kv_src = D({M, C});
      for (std::int64_t t = 0; t < M; ++t) {
        double mean = 0, var = 0;
        for (std::int64_t c = 0; c < C; ++c) mean += red[c * M + t];
        mean /= static_cast<double>(C);
        for (std::int64_t c = 0; c < C; ++c) var += (red[c * M + t] - mean) * (red[c * M + t] - mean);
        var /= static_cast<double>(C);
        for (std::int64_t c = 0; c < C; ++c) {
          kv_src[t * C + c] = (red[c * M + t] - mean) / std::sqrt(var + 1e-5) * p.reduction_norm.gamma.value()[c] +
                              p.reduction_norm.beta.value()[c];
        }
      }
    }
    const D q = lin(xb, p.q, N), k = lin(kv_src, p.k, M), v = lin(kv_src, p.v, M);
    D ctxv({N, C});
    for (std::int64_t hd = 0; hd < heads; ++hd)
      for (std::int64_t i = 0; i < N; ++i) {
        std::vector<double> sc(static_cast<std::size_t>(M));
        double mx = -1e300;
        for (std::int64_t j = 0; j < M; ++j) {
          double s = 0;
          for (int d = 0; d < 32; ++d) s += q[i * C + hd * 32 + d] * k[j * C + hd * 32 + d];
          sc[static_cast<std::size_t>(j)] = s / std::sqrt(32.0);
          mx = std::max(mx, sc[static_cast<std::size_t>(j)]);
        }
        double z = 0;
        for (auto& s : sc) z += (s = std::exp(s - mx));
        for (int d = 0; d < 32; ++d) {
          double acc = 0;
          for (std::int64_t j = 0; j < M; ++j) acc += sc[static_cast<std::size_t>(j)] / z * v[j * C + hd * 32 + d];
          ctxv[i * C + hd * 32 + d] = acc;
        }
      }
    const D o = lin(ctxv, p.out, N);
    for (std::int64_t i = 0; i < N * C; ++i) y[b * N * C + i] = o[i];
  }
  return y;
}

class AttentionOracle : public ::testing::TestWithParam<int> {};

TEST_P(AttentionOracle, MatchesStepByStep) {
  const int S = GetParam(), C = 64, h = 4, w = 6;
  Rng r(100 + S);
  nn::AttentionParams<double> p;
  p.channels = C;
  p.sr_ratio = S;
  for (auto* lp : {&p.q, &p.k, &p.v, &p.out}) {
    lp->weight = leaf(rand_normal<double>(r, {C, C}, 0.2));
    lp->bias = leaf(rand_normal<double>(r, {C}, 0.2));
  }
  if (S > 1) {
    p.reduction.in_channels = p.reduction.out_channels = C;
    p.reduction.kernel = p.reduction.stride = S;
    p.reduction.weight = leaf(rand_normal<double>(r, {C, C, S, S}, 0.1));
    p.reduction.bias = leaf(rand_normal<double>(r, {C}, 0.1));
    p.reduction_norm.gamma = leaf(rand_normal<double>(r, {C}, 1.0));
    p.reduction_norm.beta = leaf(rand_normal<double>(r, {C}, 1.0));
  }
  const D x = rand_normal<double>(r, {2, h * w, C}, 1.0);
  MacCounter mc;
  Trace tr;
  const D y = nn::sra_attention_forward(Context<double>{&mc, &tr, false}, leaf(x), p, h, w).value();
  const D ref = naive_attention(x, p, h, w);
  for (std::int64_t i = 0; i < y.size(); ++i) ASSERT_NEAR(y[i], ref[i], 1e-10);
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr[0].kind, OpKind::kAttention);
  const std::uint64_t N = h * w, M = N / (S * S);
  std::uint64_t expect = 2 * N * C * C + 2 * M * C * C + 2 * N * M * C;
  if (S > 1) expect += M * C * C * S * S;
  EXPECT_EQ(mc.total(), 2 * expect);  // batch of two
}

INSTANTIATE_TEST_SUITE_P(Reduction, AttentionOracle, ::testing::Values(1, 2));

TEST(Ops, AttentionRejectsBadShapes) {
  nn::AttentionParams<double> p;
  p.channels = 48;
  EXPECT_THROW(nn::sra_attention_forward(Context<double>{}, leaf(D({1, 4, 48})), p, 2, 2), InvalidArgument);
  p.channels = 32;
  EXPECT_THROW(nn::sra_attention_forward(Context<double>{}, leaf(D({1, 5, 32})), p, 2, 2), DimensionError);
}

TEST(Ops, BatchedMatmulCountsAndValues) {
  Rng r(9);
  const D a = rand_normal<double>(r, {3, 2, 4}, 1.0), b = rand_normal<double>(r, {3, 4, 5}, 1.0);
  MacCounter mc;
  const D c = nn::batched_matmul(Context<double>{&mc}, leaf(a), leaf(b), false).value();
  EXPECT_EQ(mc.total(), 3u * 2 * 4 * 5);
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 5; ++j) {
        double s = 0;
        for (int k = 0; k < 4; ++k) s += a.at({g, i, k}) * b.at({g, k, j});
        ASSERT_NEAR(c.at({g, i, j}), s, 1e-12);
      }
}

TEST(Ops, ZeroCostOpsChargeNothing) {
  Rng r(10);
  const D x = rand_normal<double>(r, {1, 4, 4, 4}, 1.0);
  MacCounter mc;
  Trace tr;
  Context<double> ctx{&mc, &tr, false};
  V v = leaf(x);
  v = nn::relu(ctx, v);
  v = nn::avg_pool2d(ctx, v, 2, 2);
  v = nn::add(ctx, v, v);
  nn::global_avg_pool(ctx, v);
  EXPECT_EQ(mc.total(), 0u);
  EXPECT_EQ(tr.size(), 4u);
}

}  // namespace
}  // namespace trtvit
