// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

// Execution contexts. Blocks express their forward pass once, against the
// small op vocabulary below; EvalContext evaluates it eagerly, Tape
// (autograd.hpp) records it for reverse-mode differentiation.

#pragma once

#include <set>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "y4k/kernels.hpp"
#include "y4k/weight_store.hpp"

namespace y4k {

/// Eager evaluation over a WeightStore in precision T. Optionally records
/// the name of every parameter the forward reads.
template <class T>
class EvalContext {
 public:
  using Value = BasicTensor<T>;

  explicit EvalContext(const WeightStore& store, std::set<std::string>* reads = nullptr)
      : store_(&store), reads_(reads) {}

  Value param(const std::string& name, const Shape4& expected) {
    const Tensor& t = store_->at(name);
    if (t.shape() != expected) {
      throw ShapeError("weight '" + name + "' has shape " + t.shape().str() + ", expected " + expected.str());
    }
    if (reads_ != nullptr) reads_->insert(name);
    if constexpr (std::is_same_v<T, float>) {
      return t;
    } else {
      return t.template cast<T>();
    }
  }

  static const Shape4& shape_of(const Value& v) { return v.shape(); }

  Value conv2d(const Value& x, const Value& w, const Value* bias, const ConvGeometry& g) {
    return y4k::conv2d<T>(x, w, bias != nullptr ? bias->data() : std::span<const T>{}, g);
  }
  Value batchnorm(const Value& x, const Value& gamma, const Value& beta, const Value& mean, const Value& var,
                  double eps) {
    return batchnorm_inference<T>(x, gamma.data(), beta.data(), mean.data(), var.data(), eps);
  }
  Value activate(const Value& x, Activation kind) { return y4k::activate<T>(x, kind); }
  Value maxpool2d(const Value& x, const PoolGeometry& g) { return y4k::maxpool2d<T>(x, g); }
  Value upsample_nearest(const Value& x, int scale) { return y4k::upsample_nearest<T>(x, scale); }
  Value concat_channels(std::span<const Value> xs) { return y4k::concat_channels<T>(xs); }
  Value slice_channels(const Value& x, std::int64_t begin, std::int64_t end) {
    return y4k::slice_channels<T>(x, begin, end);
  }
  Value add(const Value& a, const Value& b) { return y4k::add<T>(a, b); }
  Value spatial_attention(const Value& qkv, int heads, int key_dim, int head_dim, double scale) {
    return y4k::spatial_attention<T>(qkv, heads, key_dim, head_dim, scale, attention_log_);
  }

  /// When set, each spatial_attention call overwrites *sink with its
  /// softmax rows (used to check row normalization).
  void capture_attention(Value* sink) { attention_log_ = sink; }

 private:
  const WeightStore* store_;
  std::set<std::string>* reads_;
  Value* attention_log_ = nullptr;
};

}  // namespace y4k
