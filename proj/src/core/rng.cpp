// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trtvit/rng.hpp"

#include <cmath>
#include <numbers>

namespace trtvit {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), key_(mix64(seed ^ mix64(stream + kGolden))) {}

std::uint64_t Rng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

Rng Rng::split(std::uint64_t stream) const { return Rng(key_ ^ mix64(counter_), stream); }

template <class T>
Tensor<T> rand_normal(Rng& rng, Shape shape, double stddev) {
  if (stddev < 0) throw InvalidArgument("rand_normal: std must be non-negative");
  Tensor<T> t(std::move(shape));
  if (stddev == 0) return t;
  for (auto& v : t.data()) v = static_cast<T>(rng.normal() * stddev);
  return t;
}

template <class T>
Tensor<T> rand_uniform(Rng& rng, Shape shape, double lo, double hi) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<T>(lo + (hi - lo) * rng.uniform());
  return t;
}

template <class T>
Tensor<T> trunc_normal(Rng& rng, Shape shape, double stddev) {
  if (stddev < 0) throw InvalidArgument("trunc_normal: std must be non-negative");
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data()) {
    double z = rng.normal();
    while (std::abs(z) > 2.0) z = rng.normal();
    v = static_cast<T>(z * stddev);
  }
  return t;
}

template Tensor<float> rand_normal<float>(Rng&, Shape, double);
template Tensor<double> rand_normal<double>(Rng&, Shape, double);
template Tensor<float> rand_uniform<float>(Rng&, Shape, double, double);
template Tensor<double> rand_uniform<double>(Rng&, Shape, double, double);
template Tensor<float> trunc_normal<float>(Rng&, Shape, double);
template Tensor<double> trunc_normal<double>(Rng&, Shape, double);

}  // namespace trtvit
