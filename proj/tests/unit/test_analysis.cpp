// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "trtvit/analysis.hpp"

namespace trtvit {
namespace {

TEST(CountOp, ConvAndLinear) {
  const OpCost one = count_op(conv_desc(1, 1, 1, 1, 0, 1, 1, false));
  EXPECT_EQ(one.params, 1);
  EXPECT_EQ(one.flops, 1);
  const OpCost c = count_op(conv_desc(64, 128, 3, 2, 1, 56, 56, true));
  EXPECT_EQ(c.params, 64 * 128 * 9 + 128);
  EXPECT_EQ(c.flops, 28 * 28 * 128 * 64 * 9);
  const OpCost l = count_op(linear_desc(49, 256, 768, true));
  EXPECT_EQ(l.params, 256 * 768 + 768);
  EXPECT_EQ(l.flops, 49 * 256 * 768);
  EXPECT_EQ(count_op(map_desc(OpKind::kBatchNorm, 64, 7, 7)).params, 128);
  EXPECT_EQ(count_op(map_desc(OpKind::kBatchNorm, 64, 7, 7)).flops, 0);
  EXPECT_EQ(count_op(token_desc(OpKind::kSoftmax, 10, 64)).flops, 0);
}

TEST(CountOp, AttentionClosedForm) {
  const std::int64_t C = 128, N = 196, S = 2, M = 49;
  const OpCost a = count_op(attention_desc(C, 14, 14, S));
  EXPECT_EQ(a.flops, 2 * N * C * C + 2 * M * C * C + 2 * N * M * C + M * C * C * S * S);
  EXPECT_EQ(a.params, 4 * (C * C + C) + C * C * S * S + C + 2 * C);
}

TEST(CountBlock, BottleNeckClosedForm) {
  const CostNode b = count_block(bottleneck_block(256, 1), 256, 56, 56, "");
  EXPECT_EQ(b.flops, 3136 * (256 * 64 + 64 * 64 * 9 + 64 * 256));
  EXPECT_EQ(b.flops, 218365952);
  EXPECT_EQ(b.params, 256 * 64 + 64 * 64 * 9 + 64 * 256 + 2 * (64 + 64 + 256));
  // Stride two with a projection shortcut carries the projection weights.
  const CostNode p = count_block(bottleneck_block(256, 2), 128, 56, 56, "");
  EXPECT_EQ(p.params, 128 * 64 + 64 * 64 * 9 + 64 * 256 + 128 * 256 + 2 * (64 + 64 + 256 + 256));
}

TEST(CountBlock, TransformerNearPublishedCounts) {
  const CostNode t = count_block(transformer_block(512), 512, 28, 28, "");
  EXPECT_NEAR(static_cast<double>(t.flops) / 1e6, 2688.0, 2688.0 * 0.002);
  EXPECT_NEAR(static_cast<double>(t.params) / 1e3, 2627.0, 2627.0 * 0.003);
}

TEST(CountBlock, ParentsSumChildren) {
  const CostNode m = count_model(preset("trt-vit-c"));
  std::int64_t p = 0, f = 0;
  for (const auto& st : m.children) {
    std::int64_t sp = 0, sf = 0;
    for (const auto& b : st.children) {
      std::int64_t bp = 0, bf = 0;
      for (const auto& op : b.children) {
        bp += op.params;
        bf += op.flops;
      }
      if (st.kind != "head") {
        EXPECT_EQ(bp, b.params);
        EXPECT_EQ(bf, b.flops);
      }
      sp += b.params;
      sf += b.flops;
    }
    EXPECT_EQ(sp, st.params);
    EXPECT_EQ(sf, st.flops);
    p += st.params;
    f += st.flops;
  }
  EXPECT_EQ(p, m.params);
  EXPECT_EQ(f, m.flops);
}

TEST(CountModel, RejectsInvalid) {
  EXPECT_THROW(count_model(preset("trt-vit-a"), 100), InvalidArgument);
}

TEST(Metrics, UnitsAndHomogeneity) {
  EXPECT_NEAR(teraflops(7098, 86.9), 81.68, 0.01);
  EXPECT_NEAR(teraparams(658, 86.9), 7.57, 0.01);
  for (double x : {1.0, 218.0, 7098.0}) {
    for (double t : {0.33, 1.0, 86.9}) {
      EXPECT_DOUBLE_EQ(teraflops(x, 2 * t), teraflops(x, t) / 2);
      EXPECT_NEAR(teraflops(3 * x, 3 * t), teraflops(x, t), 1e-12 * teraflops(x, t));
    }
  }
  EXPECT_THROW(teraflops(1, 0), InvalidArgument);
  EXPECT_THROW(teraparams(1, -1), InvalidArgument);
}

TEST(Grid, SixteenEntries) {
  const auto g = efficiency_grid();
  ASSERT_EQ(g.size(), 16u);
  EXPECT_EQ(g[0].target, "transformer-256x56");
  EXPECT_EQ(g[15].spec.kind, BlockKind::kMixC);
  const auto gb = efficiency_grid(BlockKind::kMixB);
  for (int i = 12; i < 16; ++i) {
    EXPECT_EQ(count_block(gb[i].spec, gb[i].c_in, gb[i].h, gb[i].w, "").flops,
              count_block(g[i].spec, g[i].c_in, g[i].h, g[i].w, "").flops);
  }
}

}  // namespace
}  // namespace trtvit
