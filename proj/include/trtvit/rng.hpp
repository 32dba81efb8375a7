// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>

#include "trtvit/tensor.hpp"

namespace trtvit {

/// Counter-based generator: the n-th draw is a pure function of (key, n), so
/// the integer stream is identical on every platform. Child streams are
/// derived with split() instead of sharing one mutable global.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_;
};

std::uint64_t mix64(std::uint64_t x);

template <class T>
Tensor<T> rand_normal(Rng& rng, Shape shape, double stddev);

template <class T>
Tensor<T> rand_uniform(Rng& rng, Shape shape, double lo, double hi);

/// Normal samples redrawn until they fall inside [-2 std, 2 std].
template <class T>
Tensor<T> trunc_normal(Rng& rng, Shape shape, double stddev);

}  // namespace trtvit
