// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "trtvit/analysis.hpp"
#include "trtvit/arch.hpp"

namespace trtvit {
namespace {

std::vector<std::int64_t> depths(const std::string& name) { return preset(name).main_depths(); }

TEST(Presets, AllValidate) {
  for (const auto& n : preset_names()) {
    EXPECT_TRUE(validate(preset(n)).empty()) << n << ": " << validate(preset(n)).front();
  }
  EXPECT_THROW(preset("vit-huge"), NotFound);
}

TEST(Presets, DepthPatterns) {
  EXPECT_EQ(depths("trt-vit-a"), (std::vector<std::int64_t>{2, 4, 5, 4}));
  EXPECT_EQ(depths("trt-vit-b"), (std::vector<std::int64_t>{3, 4, 7, 4}));
  EXPECT_EQ(depths("trt-vit-c"), (std::vector<std::int64_t>{3, 4, 9, 6}));
  EXPECT_EQ(depths("trt-vit-d"), (std::vector<std::int64_t>{4, 5, 9, 5}));
  EXPECT_EQ(depths("resnet50"), (std::vector<std::int64_t>{3, 4, 6, 3}));
  EXPECT_EQ(depths("refined-resnet50"), (std::vector<std::int64_t>{2, 3, 6, 5}));
  EXPECT_EQ(depths("mixnet-v"), (std::vector<std::int64_t>{3, 5, 6, 3}));
  EXPECT_EQ(depths("refined-mixnet-v"), (std::vector<std::int64_t>{2, 3, 6, 4}));
}

TEST(Presets, TrtStageFourMixBlocks) {
  for (const char* n : {"trt-vit-c", "trt-vit-d"}) {
    const ArchSpec a = preset(n);
    const auto& st = a.stages[4].blocks;
    ASSERT_GE(st.size(), 2u);
    EXPECT_EQ(st[st.size() - 1].kind, BlockKind::kMixC);
    EXPECT_EQ(st[st.size() - 2].kind, BlockKind::kMixC);
    EXPECT_EQ(st[st.size() - 1].sr_ratio, 2);
    EXPECT_EQ(st[st.size() - 3].kind, BlockKind::kBottleNeck);
  }
  const ArchSpec b4 = preset("trt-vit-b");
  for (const auto& b : b4.stages[4].blocks) EXPECT_EQ(b.kind, BlockKind::kBottleNeck);
}

TEST(Validate, ReportsPaths) {
  ArchSpec a = preset("trt-vit-a");
  a.stages[5].blocks[0].out_channels = 1000;  // 500-wide Transformer branch
  const auto v = validate(a);
  ASSERT_FALSE(v.empty());
  EXPECT_NE(v.front().find("stage5.0"), std::string::npos);
  EXPECT_FALSE(validate(preset("trt-vit-a"), 225).empty());
  ArchSpec b = preset("resnet50");
  b.stages[3].blocks[1].stride = 2;
  EXPECT_FALSE(validate(b).empty());
}

TEST(ArchText, RoundTripsEveryPreset) {
  for (const auto& n : preset_names()) {
    const ArchSpec a = preset(n);
    const std::string text = emit_arch(a);
    const ArchSpec b = parse_arch(text);
    EXPECT_EQ(a, b) << n;
    EXPECT_EQ(text, emit_arch(b));
  }
}

TEST(ArchText, ParsesHandWritten) {
  const ArchSpec a = parse_arch(R"(# tiny
arch tiny
classes 10
stem: conv c=32 k=3 stride=2
stage1: conv c=32 k=3
stage2: bottleneck c=64 stride=2
stage3: bottleneck c=128 stride=2
stage4: transformer c=128 stride=2 s=2
stage5: mixc c=256 r=0.5 s=1 k=3 stride=2
)");
  EXPECT_EQ(a.name, "tiny");
  EXPECT_EQ(a.num_classes, 10);
  EXPECT_TRUE(validate(a, 64).empty());
  EXPECT_EQ(a.stages[4].blocks[0].sr_ratio, 2);
  EXPECT_EQ(a.stages[5].blocks[0].kernel, 3);
}

TEST(ArchText, ErrorsCarryLineNumbers) {
  auto msg = [](const std::string& t) {
    try {
      parse_arch(t);
    } catch (const FormatError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(msg("arch x\nstem: conv c=32\nstage1: blob c=3\n").find("line 3"), std::string::npos);
  EXPECT_NE(msg("arch x\nstem: conv c=abc\n").find("line 2"), std::string::npos);
  EXPECT_NE(msg("arch x\nstage9: conv c=3\n").find("line 2"), std::string::npos);
  EXPECT_NE(msg("arch x\nstage5: mixc c=64 s=1\n").find("line 2"), std::string::npos);  // r required
}

TEST(Weights, SerializationIsByteStable) {
  auto m = Model<float>::instantiate(preset("trt-vit-a"), 3);
  const ModelWeights w = m->weights();
  const auto bytes = serialize_weights(w);
  const ModelWeights back = deserialize_weights(bytes);
  EXPECT_EQ(back, w);
  EXPECT_EQ(serialize_weights(back), bytes);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(deserialize_weights(truncated), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_weights(bad_magic), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(deserialize_weights(trailing), FormatError);
}

TEST(Weights, FileRoundTripAndMismatch) {
  const auto path = (std::filesystem::temp_directory_path() / "trtvit_test_weights.mxvw").string();
  auto a = Model<float>::instantiate(preset("resnet50"), 1);
  save_weights(a->weights(), path);
  auto b = Model<float>::instantiate(preset("resnet50"), 2);
  b->load(load_weights(path));
  EXPECT_EQ(a->weights(), b->weights());
  auto c = Model<float>::instantiate(preset("refined-resnet50"), 1);
  EXPECT_THROW(c->load(load_weights(path)), FormatError);
  std::remove(path.c_str());
  EXPECT_THROW(load_weights(path), IoError);
}

TEST(Model, ParameterCountMatchesAnalysis) {
  for (const char* n : {"trt-vit-a", "resnet50", "mixnet-a", "mixnet-v", "ablation-cmmm"}) {
    auto m = Model<float>::instantiate(preset(n), 0);
    EXPECT_EQ(m->parameter_count(), count_model(preset(n)).params) << n;
  }
}

TEST(Model, SmallResolutionForwardAndDeterminism) {
  const ArchSpec a = preset("trt-vit-a");
  auto m1 = Model<float>::instantiate(a, 5);
  auto m2 = Model<float>::instantiate(a, 5);
  Rng r(1);
  const Tensor<float> x = rand_normal<float>(r, {1, 3, 64, 64}, 1.0);
  const auto o1 = m1->forward(Context<float>{}, Var<float>::leaf(x));
  const auto o2 = m2->forward(Context<float>{}, Var<float>::leaf(x));
  EXPECT_EQ(o1.logits.shape(), (Shape{1, 1000}));
  EXPECT_TRUE(o1.logits.value().bit_equal(o2.logits.value()));
  ASSERT_EQ(o1.stage_shapes.size(), 6u);
  EXPECT_EQ(o1.stage_shapes[5], (Shape{1, 1280, 2, 2}));
  auto m3 = Model<float>::instantiate(a, 6);
  EXPECT_FALSE(m3->predict(x).bit_equal(o1.logits.value()));
  EXPECT_THROW(m1->predict(Tensor<float>({1, 3, 48, 48})), InvalidArgument);
}

}  // namespace
}  // namespace trtvit
