// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace trtvit {

using Shape = std::vector<std::int64_t>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class PrecisionError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

std::string shape_str(const Shape& shape);
std::int64_t numel(const Shape& shape);

/// Multiply-accumulate counter. One instance is owned by whoever drives an
/// execution; ops receive it through their Context.
class MacCounter {
 public:
  void add(std::uint64_t macs) {
    if (enabled_) total_ += macs;
  }
  std::uint64_t total() const { return total_; }
  bool enabled() const { return enabled_; }
  void set_enabled(bool on) { enabled_ = on; }
  void reset() { total_ = 0; }

 private:
  std::uint64_t total_ = 0;
  bool enabled_ = true;
};

/// Dense row-major tensor. Always contiguous, never a view.
template <class T>
class Tensor {
  static_assert(std::is_floating_point_v<T>, "Tensor holds float or double");

 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)) {
    check_extents(shape_);
    data_.assign(static_cast<std::size_t>(numel(shape_)), fill);
  }
  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_extents(shape_);
    if (static_cast<std::int64_t>(data_.size()) != numel(shape_)) {
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_str(shape_));
    }
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), T{0}); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), T{1}); }
  static Tensor full(Shape shape, T v) { return Tensor(std::move(shape), v); }
  static Tensor identity(std::int64_t n) {
    Tensor t({n, n});
    for (std::int64_t i = 0; i < n; ++i) t.data_[static_cast<std::size_t>(i * n + i)] = T{1};
    return t;
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t dim(int i) const {
    if (i < 0) i += rank();
    if (i < 0 || i >= rank()) throw DimensionError("dim index out of range for " + shape_str(shape_));
    return shape_[static_cast<std::size_t>(i)];
  }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return shape_.empty() && data_.empty(); }

  Shape strides() const {
    Shape s(shape_.size(), 1);
    for (int i = rank() - 2; i >= 0; --i) {
      s[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i + 1)] * shape_[static_cast<std::size_t>(i + 1)];
    }
    return s;
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* ptr() { return data_.data(); }
  const T* ptr() const { return data_.data(); }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  T& at(std::initializer_list<std::int64_t> idx) { return data_[offset(idx)]; }
  const T& at(std::initializer_list<std::int64_t> idx) const { return data_[offset(idx)]; }

  /// Same buffer, new extents. The element count must not change.
  Tensor reshaped(Shape shape) const& {
    Tensor out = *this;
    out.reshape_in_place(std::move(shape));
    return out;
  }
  Tensor reshaped(Shape shape) && {
    reshape_in_place(std::move(shape));
    return std::move(*this);
  }

  template <class U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool bit_equal(const Tensor& other) const {
    return shape_ == other.shape_ &&
           (data_.empty() || std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(T)) == 0);
  }

 private:
  static void check_extents(const Shape& shape) {
    for (auto e : shape) {
      if (e < 0) throw DimensionError("negative extent in shape " + shape_str(shape));
    }
  }

  void reshape_in_place(Shape shape) {
    check_extents(shape);
    if (numel(shape) != size()) {
      throw DimensionError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
    }
    shape_ = std::move(shape);
  }

  std::size_t offset(std::initializer_list<std::int64_t> idx) const {
    if (static_cast<int>(idx.size()) != rank()) {
      throw DimensionError("index rank " + std::to_string(idx.size()) + " for tensor " + shape_str(shape_));
    }
    std::int64_t off = 0;
    std::size_t d = 0;
    for (auto i : idx) {
      const auto extent = shape_[d++];
      if (i < 0 || i >= extent) throw DimensionError("index out of range for " + shape_str(shape_));
      off = off * extent + i;
    }
    return static_cast<std::size_t>(off);
  }

  Shape shape_;
  std::vector<T> data_;
};

}  // namespace trtvit
