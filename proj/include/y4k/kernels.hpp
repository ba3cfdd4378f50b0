// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

// Forward and backward kernels. Every kernel is a pure function of its
// arguments; repeated calls on identical inputs are bit-identical, and the
// per-element accumulation order does not depend on the worker count.
// Instantiated for float and double.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "y4k/tensor.hpp"

namespace y4k {

struct Padding {
  int top = 0;
  int bottom = 0;
  int left = 0;
  int right = 0;

  static constexpr Padding uniform(int p) noexcept { return {p, p, p, p}; }
  friend constexpr bool operator==(const Padding&, const Padding&) = default;
};

struct ConvGeometry {
  int stride_h = 1;
  int stride_w = 1;
  Padding pad{};
  int groups = 1;
};

/// Weight (c_out, c_in/groups, k_h, k_w), optional per-output-channel bias,
/// and geometry.
template <class T>
struct ConvParams {
  BasicTensor<T> weight;
  std::vector<T> bias;
  ConvGeometry geometry;
};

enum class Activation { kIdentity, kSigmoid, kSilu };

struct PoolGeometry {
  int kernel = 1;
  int stride = 1;
  int pad = 0;
};

/// floor((in + pad_total - k) / s) + 1, or 0 when the window never fits.
std::int64_t window_extent(std::int64_t in, int k, int s, int pad_total) noexcept;

/// Validates a convolution and returns its output shape. Throws ShapeError
/// naming the offending dimension.
Shape4 conv2d_output_shape(const Shape4& input, const Shape4& weight, const ConvGeometry& g);
Shape4 maxpool2d_output_shape(const Shape4& input, const PoolGeometry& g);

template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight, std::span<const T> bias,
                      const ConvGeometry& g);
template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvParams<T>& p) {
  return conv2d<T>(input, p.weight, std::span<const T>(p.bias), p.geometry);
}

template <class T>
T activate_scalar(T x, Activation kind) noexcept;
template <class T>
BasicTensor<T> activate(const BasicTensor<T>& input, Activation kind);

template <class T>
BasicTensor<T> maxpool2d(const BasicTensor<T>& input, const PoolGeometry& g);

template <class T>
BasicTensor<T> upsample_nearest(const BasicTensor<T>& input, int scale);

template <class T>
BasicTensor<T> concat_channels(std::span<const BasicTensor<T>> inputs);

/// Channels [begin, end) of `input`.
template <class T>
BasicTensor<T> slice_channels(const BasicTensor<T>& input, std::int64_t begin, std::int64_t end);

template <class T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// gamma * (x - mean) / sqrt(var + eps) + beta, per channel.
template <class T>
BasicTensor<T> batchnorm_inference(const BasicTensor<T>& input, std::span<const T> gamma,
                                   std::span<const T> beta, std::span<const T> mean,
                                   std::span<const T> var, double eps);

/// Multi-head self-attention over the h*w positions of a packed qkv map.
/// Channel layout per head: key_dim query channels, key_dim key channels,
/// head_dim value channels. Logits are q.k * scale, normalized by a softmax
/// over key positions. Output is (n, heads*head_dim, h, w). When
/// `weights_out` is non-null it receives the (n, heads, h*w, h*w) softmax rows.
template <class T>
BasicTensor<T> spatial_attention(const BasicTensor<T>& qkv, int heads, int key_dim, int head_dim,
                                 double scale, BasicTensor<T>* weights_out = nullptr);

// Backward kernels.

template <class T>
struct ConvGrads {
  BasicTensor<T> input;
  BasicTensor<T> weight;
  std::vector<T> bias;  // empty when the forward had no bias
};

template <class T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weight, bool has_bias,
                             const ConvGeometry& g, const BasicTensor<T>& grad_output);

template <class T>
BasicTensor<T> activate_backward(const BasicTensor<T>& input, Activation kind,
                                 const BasicTensor<T>& grad_output);

template <class T>
BasicTensor<T> maxpool2d_backward(const BasicTensor<T>& input, const PoolGeometry& g,
                                  const BasicTensor<T>& grad_output);

template <class T>
BasicTensor<T> upsample_nearest_backward(const BasicTensor<T>& grad_output, int scale);

/// Splits grad_output along channels into pieces of the given widths.
template <class T>
std::vector<BasicTensor<T>> concat_channels_backward(const BasicTensor<T>& grad_output,
                                                     std::span<const std::int64_t> channels);

/// Scatters grad_output back into a zero tensor of `input_shape`.
template <class T>
BasicTensor<T> slice_channels_backward(const Shape4& input_shape, std::int64_t begin,
                                       const BasicTensor<T>& grad_output);

template <class T>
struct BatchNormGrads {
  BasicTensor<T> input;
  std::vector<T> gamma, beta, mean, var;
};

template <class T>
BatchNormGrads<T> batchnorm_inference_backward(const BasicTensor<T>& input, std::span<const T> gamma,
                                               std::span<const T> mean, std::span<const T> var,
                                               double eps, const BasicTensor<T>& grad_output);

}  // namespace y4k
