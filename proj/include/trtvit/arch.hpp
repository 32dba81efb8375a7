// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "trtvit/blocks.hpp"

namespace trtvit {

struct StageSpec {
  std::string name;  // "stem", "stage1" .. "stage5"
  std::vector<BlockSpec> blocks;
  // Output resolution divisor relative to the network input.
  std::int64_t divisor = 0;

  bool operator==(const StageSpec&) const = default;
};

struct ArchSpec {
  std::string name;
  std::int64_t in_channels = 3;
  std::int64_t num_classes = 1000;
  std::vector<StageSpec> stages;  // stem then stage1..stage5

  /// Block counts of every stage, stem first.
  std::vector<std::int64_t> stage_depths() const;
  /// Block counts of stages 2..5, the pattern quoted as e.g. "2-4-5-4".
  std::vector<std::int64_t> main_depths() const;
  std::int64_t out_channels() const;

  bool operator==(const ArchSpec&) const = default;
};

inline constexpr const char* kStageNames[] = {"stem", "stage1", "stage2", "stage3", "stage4", "stage5"};

const std::vector<std::string>& preset_names();
/// Throws NotFound for unknown names.
ArchSpec preset(const std::string& name);

/// Recomputes every stage divisor from the block strides.
void assign_divisors(ArchSpec& spec);

/// Empty when the spec is consistent; otherwise one message per problem,
/// each naming the block path (e.g. "stage5.0").
std::vector<std::string> validate(const ArchSpec& spec, std::int64_t resolution = 224);

/// Text form:
///   arch <name>
///   classes <n>                        (optional, default 1000)
///   <stage>: <kind> key=value ...      (one block per line, in order)
/// Keys: c (output channels), stride, r (shrinking ratio), k (kernel),
/// s (stride for conv/maxpool/bottleneck; spatial reduction for
/// transformer/mix kinds). '#' starts a comment.
ArchSpec parse_arch(const std::string& text);
std::string emit_arch(const ArchSpec& spec);

enum class DType : std::uint8_t { kF32 = 1, kF64 = 2 };

struct WeightEntry {
  std::string path;
  DType dtype = DType::kF32;
  Shape shape;
  std::vector<std::uint8_t> bytes;  // little-endian scalars

  bool operator==(const WeightEntry&) const = default;
};

/// Flat ordered map from parameter path to tensor.
struct ModelWeights {
  std::vector<WeightEntry> entries;

  const WeightEntry* find(const std::string& path) const;
  bool operator==(const ModelWeights&) const = default;
};

std::vector<std::uint8_t> serialize_weights(const ModelWeights& w);
ModelWeights deserialize_weights(const std::vector<std::uint8_t>& bytes);
void save_weights(const ModelWeights& w, const std::string& path);
ModelWeights load_weights(const std::string& path);

template <class T>
class Model {
 public:
  /// Validates the spec at 224 and initializes every weight from seed.
  static std::unique_ptr<Model> instantiate(const ArchSpec& spec, std::uint64_t seed);

  const ArchSpec& spec() const { return spec_; }

  struct Output {
    Var<T> logits;
    std::vector<Shape> stage_shapes;  // per stage, batch included
  };
  /// x [B, in_channels, H, W] with H, W divisible by 32.
  Output forward(const Context<T>& ctx, const Var<T>& x) const;
  Tensor<T> predict(const Tensor<T>& x) const;

  /// Every named tensor, buffers included, in a fixed order.
  std::vector<ParamRef<T>> parameters();
  std::int64_t parameter_count();

  ModelWeights weights();
  /// Throws FormatError naming the first path whose name, dtype or shape
  /// differs from this model.
  void load(const ModelWeights& w);

 private:
  Model() = default;
  ArchSpec spec_;
  std::vector<std::vector<std::unique_ptr<Block<T>>>> stages_;
  nn::LinearParams<T> head_;
};

}  // namespace trtvit
