// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "y4k/kernels.hpp"

namespace y4k {

/// Handle to a value recorded on a Tape.
struct Var {
  std::int32_t id = -1;
};

/// Double-precision reverse-mode tape. Records the same op vocabulary as
/// EvalContext; backward() applies the analytic backward kernels in reverse
/// order. Ops without a backward kernel may be recorded, but backward()
/// through them throws UnsupportedOpError.
class Tape {
 public:
  using Value = Var;

  /// `params` supplies values for param(); each name becomes one leaf.
  explicit Tape(std::map<std::string, TensorD> params = {});

  Var input(TensorD value);
  Var param(const std::string& name, const Shape4& expected);

  const Shape4& shape_of(const Var& v) const { return value(v).shape(); }

  Var conv2d(const Var& x, const Var& w, const Var* bias, const ConvGeometry& g);
  Var batchnorm(const Var& x, const Var& gamma, const Var& beta, const Var& mean, const Var& var, double eps);
  Var activate(const Var& x, Activation kind);
  Var maxpool2d(const Var& x, const PoolGeometry& g);
  Var upsample_nearest(const Var& x, int scale);
  Var concat_channels(std::span<const Var> xs);
  Var slice_channels(const Var& x, std::int64_t begin, std::int64_t end);
  Var add(const Var& a, const Var& b);
  Var spatial_attention(const Var& qkv, int heads, int key_dim, int head_dim, double scale);

  const TensorD& value(const Var& v) const;

  /// Seeds d(out) = grad_output and propagates to every recorded input.
  void backward(const Var& out, const TensorD& grad_output);
  /// Gradient accumulated at `v` by the last backward(); zeros when no
  /// path reached it.
  TensorD grad(const Var& v) const;

  const std::map<std::string, Var>& params() const noexcept { return param_vars_; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  enum class Op { kLeaf, kConv, kBatchNorm, kActivate, kMaxPool, kUpsample, kConcat, kSlice, kAdd, kAttention };

  struct Node {
    Op op = Op::kLeaf;
    std::vector<std::int32_t> inputs;
    TensorD value;
    ConvGeometry conv{};
    bool has_bias = false;
    double eps = 0.0;
    Activation act = Activation::kIdentity;
    PoolGeometry pool{};
    int scale = 1;
    std::int64_t begin = 0;
  };

  Var push(Node node);
  const Node& node(const Var& v) const;
  static const char* op_name(Op op);

  std::vector<Node> nodes_;
  std::vector<std::optional<TensorD>> grads_;
  std::map<std::string, TensorD> param_values_;
  std::map<std::string, Var> param_vars_;
};

}  // namespace y4k
