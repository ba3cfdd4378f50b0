// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

// Network building blocks. Each block answers four questions with a single
// contract: what shape it produces, how many learnable scalars it owns, how
// many FLOPs it costs (2 per multiply-accumulate; pooling, activations,
// concatenation and upsampling cost 0) and what its forward computes.
//
// Parameter names are qualified by the block's name, e.g. a GhostConv at
// layer 3 owns "layers.3.primary.weight", "layers.3.cheap.bn.gamma", ...

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "y4k/autograd.hpp"
#include "y4k/context.hpp"
#include "y4k/kernels.hpp"

namespace y4k {

enum class ParamRole { kConvWeight, kConvBias, kBnGamma, kBnBeta, kBnMean, kBnVar };

/// BN running statistics are stored but not learned.
constexpr bool is_buffer(ParamRole r) noexcept { return r == ParamRole::kBnMean || r == ParamRole::kBnVar; }

struct ParamSpec {
  std::string name;
  Shape4 shape;
  ParamRole role;
  std::int64_t fan_in = 0;  // c_in/groups * k_h * k_w for conv weights and biases
};

/// Construction options shared by every block.
struct BlockOptions {
  /// Conv+BN pairs are built as conv-with-bias (BN folded away).
  bool fused = false;
  double bn_eps = 1e-3;
};

class Block {
 public:
  virtual ~Block();
  Block& operator=(const Block&) = delete;

  virtual std::string_view type() const = 0;
  const std::string& name() const noexcept { return name_; }

  /// Validates inputs (channel counts, spatial compatibility) and returns
  /// the output shapes. Throws ShapeError naming the block.
  virtual std::vector<Shape4> output_shapes(std::span<const Shape4> inputs) const = 0;
  virtual std::int64_t flops(std::span<const Shape4> inputs) const = 0;
  virtual void collect_params(std::vector<ParamSpec>& out) const = 0;

  virtual std::vector<Tensor> forward(EvalContext<float>& ctx, std::span<const Tensor> inputs) const = 0;
  virtual std::vector<TensorD> forward(EvalContext<double>& ctx, std::span<const TensorD> inputs) const = 0;
  virtual std::vector<Var> forward(Tape& ctx, std::span<const Var> inputs) const = 0;

  std::vector<ParamSpec> params() const;
  /// Learnable scalars: conv weights, conv biases, BN gamma and beta.
  std::int64_t param_count() const;

  Shape4 output_shape(const Shape4& input) const;
  std::int64_t flops_for(const Shape4& input) const;

  template <class Ctx>
  typename Ctx::Value forward_one(Ctx& ctx, const typename Ctx::Value& x) const {
    return forward(ctx, std::span<const typename Ctx::Value>(&x, 1)).front();
  }

 protected:
  explicit Block(std::string name) : name_(std::move(name)) {}
  Block(const Block&) = default;
  Block(Block&&) = default;

  [[noreturn]] void fail(const std::string& what) const;
  const Shape4& single_input(std::span<const Shape4> inputs) const;
  void require_channels(const Shape4& input, std::int64_t expected) const;

 private:
  std::string name_;
};

#define Y4K_BLOCK_OVERRIDES                                                                        \
  std::vector<Shape4> output_shapes(std::span<const Shape4> inputs) const override;               \
  std::int64_t flops(std::span<const Shape4> inputs) const override;                              \
  void collect_params(std::vector<ParamSpec>& out) const override;                                \
  std::vector<Tensor> forward(EvalContext<float>& ctx, std::span<const Tensor> inputs) const override;   \
  std::vector<TensorD> forward(EvalContext<double>& ctx, std::span<const TensorD> inputs) const override; \
  std::vector<Var> forward(Tape& ctx, std::span<const Var> inputs) const override;

struct ConvSpec {
  std::int64_t c_in = 0;
  std::int64_t c_out = 0;
  int kernel = 1;
  int stride = 1;
  int groups = 1;
  Activation act = Activation::kSilu;
  bool batchnorm = true;
  bool bias = false;
  /// Derived from kernel/stride when empty (see auto_padding).
  std::optional<Padding> padding;
};

/// Odd kernels pad k/2 on every side. Even kernels pad max(k - s, 0) in
/// total, the smaller half on top/left: k=2, s=1 gives (0, 1, 0, 1), so a
/// stride-1 2x2 conv preserves the spatial extent.
Padding auto_padding(int kernel, int stride) noexcept;

/// Convolution + optional BatchNorm + activation. Without BN the
/// convolution may carry a bias.
class ConvBlock final : public Block {
 public:
  ConvBlock(std::string name, ConvSpec spec, BlockOptions opts = {});
  std::string_view type() const override { return "Conv"; }
  Y4K_BLOCK_OVERRIDES

  template <class Ctx>
  typename Ctx::Value apply(Ctx& ctx, const typename Ctx::Value& x) const;

  const ConvSpec& spec() const noexcept { return spec_; }
  bool has_batchnorm() const noexcept { return spec_.batchnorm; }
  bool has_bias() const noexcept { return spec_.bias; }
  const Padding& padding() const noexcept { return padding_; }
  ConvGeometry geometry() const noexcept;
  Shape4 weight_shape() const noexcept;
  double bn_eps() const noexcept { return eps_; }

 private:
  ConvSpec spec_;
  Padding padding_;
  double eps_;
};

/// Half the output channels from a primary k x k conv (k = 1 by default),
/// the other half from a cheap 5x5 depthwise conv over the first half.
class GhostConvBlock final : public Block {
 public:
  GhostConvBlock(std::string name, std::int64_t c_in, std::int64_t c_out, int kernel = 1, int stride = 1,
                 Activation act = Activation::kSilu, BlockOptions opts = {});
  std::string_view type() const override { return "GhostConv"; }
  Y4K_BLOCK_OVERRIDES

  template <class Ctx>
  typename Ctx::Value apply(Ctx& ctx, const typename Ctx::Value& x) const;

  const ConvBlock& primary() const noexcept { return primary_; }
  const ConvBlock& cheap() const noexcept { return cheap_; }

 private:
  ConvBlock primary_;
  ConvBlock cheap_;
};

/// Split / append / merge block. The input is projected to 2h channels
/// (h = c_out * expansion) and split; n bottlenecks run sequentially on the
/// second half, each output appended; a 1x1 conv merges the (2 + n) h
/// channels. Inner bottleneck: two 2x2 convs padded (0, 1, 0, 1), plus a
/// residual when `shortcut`.
class C3k2Block final : public Block {
 public:
  C3k2Block(std::string name, std::int64_t c_in, std::int64_t c_out, int n = 1, bool shortcut = true,
            double expansion = 0.5, BlockOptions opts = {});
  std::string_view type() const override { return "C3k2"; }
  Y4K_BLOCK_OVERRIDES

  template <class Ctx>
  typename Ctx::Value apply(Ctx& ctx, const typename Ctx::Value& x) const;

  std::int64_t hidden() const noexcept { return hidden_; }
  const std::vector<ConvBlock>& inner_convs() const noexcept { return inner_; }

 private:
  std::int64_t c_in_, c_out_, hidden_;
  int n_;
  bool shortcut_;
  ConvBlock cv1_;
  std::vector<ConvBlock> inner_;  // 2 per bottleneck
  ConvBlock cv2_;
};

/// C3k2 topology with Ghost bottlenecks: GhostConv h->h, GhostConv h->h
/// with identity activation, residual add.
class C3GhostBlock final : public Block {
 public:
  C3GhostBlock(std::string name, std::int64_t c_in, std::int64_t c_out, int n = 1, double expansion = 0.5,
               BlockOptions opts = {});
  std::string_view type() const override { return "C3Ghost"; }
  Y4K_BLOCK_OVERRIDES

  template <class Ctx>
  typename Ctx::Value apply(Ctx& ctx, const typename Ctx::Value& x) const;

 private:
  std::int64_t c_in_, c_out_, hidden_;
  int n_;
  ConvBlock cv1_;
  std::vector<GhostConvBlock> inner_;  // 2 per bottleneck
  ConvBlock cv2_;
};

/// 1x1 reduce to c_in/2, three chained k x k stride-1 max-pools, concat of
/// the four maps, 1x1 conv to c_out.
class SPPFBlock final : public Block {
 public:
  SPPFBlock(std::string name, std::int64_t c_in, std::int64_t c_out, int pool_kernel = 5, BlockOptions opts = {});
  std::string_view type() const override { return "SPPF"; }
  Y4K_BLOCK_OVERRIDES

  template <class Ctx>
  typename Ctx::Value apply(Ctx& ctx, const typename Ctx::Value& x) const;

  PoolGeometry pool() const noexcept { return {pool_kernel_, 1, pool_kernel_ / 2}; }

 private:
  std::int64_t c_in_;
  int pool_kernel_;
  ConvBlock cv1_;
  ConvBlock cv2_;
};

/// Position-sensitive attention constants.
struct PsaConfig {
  int head_dim = 64;         // channels per head; heads = max(1, c / head_dim)
  double attn_ratio = 0.5;   // key_dim = head_dim * attn_ratio
  int ffn_expansion = 2;
  /// Logit scale is key_dim^-0.5 when false, head_dim^-0.5 when true.
  bool scale_by_head_dim = false;
};

/// C2PSA: 1x1 split into halves (a, b); b runs through n PSA units (MHSA
/// with depthwise 3x3 positional branch on v, then a 2x feed-forward, each
/// residual); concat(a, b') and 1x1 merge. c_in must equal c_out.
class C2PSABlock final : public Block {
 public:
  C2PSABlock(std::string name, std::int64_t c, int n = 1, PsaConfig psa = {}, BlockOptions opts = {});
  std::string_view type() const override { return "C2PSA"; }
  Y4K_BLOCK_OVERRIDES

  template <class Ctx>
  typename Ctx::Value apply(Ctx& ctx, const typename Ctx::Value& x) const;

  int heads() const noexcept { return heads_; }
  int key_dim() const noexcept { return key_dim_; }
  int head_dim() const noexcept { return head_dim_; }
  double scale() const noexcept;
  const PsaConfig& psa() const noexcept { return psa_; }

 private:
  struct Unit {
    ConvBlock qkv, pe, proj, ffn1, ffn2;
  };

  std::int64_t c_, hidden_;
  int n_;
  PsaConfig psa_;
  int heads_, key_dim_, head_dim_;
  ConvBlock cv1_;
  std::vector<Unit> units_;
  ConvBlock cv2_;
};

/// Nearest-neighbour upsampling layer.
class UpsampleBlock final : public Block {
 public:
  UpsampleBlock(std::string name, int scale);
  std::string_view type() const override { return "Upsample"; }
  Y4K_BLOCK_OVERRIDES

 private:
  int scale_;
};

/// Channel concatenation of all inputs.
class ConcatBlock final : public Block {
 public:
  explicit ConcatBlock(std::string name) : Block(std::move(name)) {}
  std::string_view type() const override { return "Concat"; }
  Y4K_BLOCK_OVERRIDES
};

/// Anchor-free decoupled head. Per input scale: a box branch producing
/// 4 * reg_max distribution logits and a class branch producing nc logits;
/// the two are concatenated into a (n, 4 * reg_max + nc, h, w) map.
class DetectHead final : public Block {
 public:
  /// box_hidden / cls_hidden of 0 select max(16, ch0/4, 4*reg_max) and
  /// max(ch0, min(nc, 100)) where ch0 is the first scale's channel count.
  DetectHead(std::string name, int nc, std::vector<std::int64_t> in_channels, int reg_max = 16,
             std::int64_t box_hidden = 0, std::int64_t cls_hidden = 0, BlockOptions opts = {});
  std::string_view type() const override { return "Detect"; }
  Y4K_BLOCK_OVERRIDES

  int nc() const noexcept { return nc_; }
  int reg_max() const noexcept { return reg_max_; }
  std::int64_t box_hidden() const noexcept { return box_hidden_; }
  std::int64_t cls_hidden() const noexcept { return cls_hidden_; }
  std::int64_t output_channels() const noexcept { return 4LL * reg_max_ + nc_; }
  std::size_t scales() const noexcept { return in_channels_.size(); }

 private:
  struct Branch {
    std::vector<ConvBlock> box;
    std::vector<ConvBlock> cls;
  };
  template <class Ctx>
  std::vector<typename Ctx::Value> run(Ctx& ctx, std::span<const typename Ctx::Value> xs) const;

  int nc_;
  int reg_max_;
  std::vector<std::int64_t> in_channels_;
  std::int64_t box_hidden_, cls_hidden_;
  std::vector<Branch> branches_;
};

#undef Y4K_BLOCK_OVERRIDES

}  // namespace y4k
