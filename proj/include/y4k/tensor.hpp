// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "y4k/error.hpp"

namespace y4k {

/// NCHW extents.
struct Shape4 {
  std::int64_t n = 0;
  std::int64_t c = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;

  constexpr std::int64_t numel() const noexcept { return n * c * h * w; }
  constexpr std::int64_t plane() const noexcept { return h * w; }
  friend constexpr bool operator==(const Shape4&, const Shape4&) = default;

  std::string str() const {
    return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " + std::to_string(h) + ", " +
           std::to_string(w) + ")";
  }
};

/// Dense 4-D array in row-major NCHW order. Single precision is used for
/// inference, double precision for gradient verification.
template <class T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape4 shape, T fill = T{}) : shape_(shape) {
    check_shape(shape);
    data_.assign(static_cast<std::size_t>(shape.numel()), fill);
  }

  BasicTensor(Shape4 shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    check_shape(shape);
    if (static_cast<std::int64_t>(data_.size()) != shape.numel()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape.str());
    }
  }

  const Shape4& shape() const noexcept { return shape_; }
  std::int64_t numel() const noexcept { return shape_.numel(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }
  const std::vector<T>& vec() const noexcept { return data_; }

  std::int64_t offset(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const noexcept {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) noexcept {
    return data_[static_cast<std::size_t>(offset(n, c, h, w))];
  }
  const T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const noexcept {
    return data_[static_cast<std::size_t>(offset(n, c, h, w))];
  }
  T& operator[](std::int64_t i) noexcept { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const noexcept { return data_[static_cast<std::size_t>(i)]; }

  /// Pointer to the start of plane (n, c).
  const T* plane(std::int64_t n, std::int64_t c) const noexcept { return data_.data() + offset(n, c, 0, 0); }
  T* plane(std::int64_t n, std::int64_t c) noexcept { return data_.data() + offset(n, c, 0, 0); }

  template <class U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return BasicTensor<U>(shape_, std::move(out));
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  static void check_shape(const Shape4& s) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) throw ShapeError("negative extent in shape " + s.str());
  }

  Shape4 shape_{};
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// Per-channel vectors (bias, BN statistics) are stored as (c, 1, 1, 1).
constexpr Shape4 vector_shape(std::int64_t c) noexcept { return {c, 1, 1, 1}; }

}  // namespace y4k
