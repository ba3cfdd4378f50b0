// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace y4k {

// Block ---------------------------------------------------------------------

Block::~Block() = default;

std::vector<ParamSpec> Block::params() const {
  std::vector<ParamSpec> out;
  collect_params(out);
  return out;
}

std::int64_t Block::param_count() const {
  std::int64_t total = 0;
  for (const auto& p : params()) {
    if (!is_buffer(p.role)) total += p.shape.numel();
  }
  return total;
}

Shape4 Block::output_shape(const Shape4& input) const {
  auto shapes = output_shapes(std::span<const Shape4>(&input, 1));
  return shapes.front();
}

std::int64_t Block::flops_for(const Shape4& input) const { return flops(std::span<const Shape4>(&input, 1)); }

void Block::fail(const std::string& what) const {
  throw ShapeError("block '" + name_ + "' (" + std::string(type()) + "): " + what);
}

const Shape4& Block::single_input(std::span<const Shape4> inputs) const {
  if (inputs.size() != 1) fail("expects exactly one input, got " + std::to_string(inputs.size()));
  return inputs.front();
}

void Block::require_channels(const Shape4& input, std::int64_t expected) const {
  if (input.c != expected) {
    fail("expected " + std::to_string(expected) + " input channels, got " + std::to_string(input.c));
  }
  if (input.n < 1 || input.h < 1 || input.w < 1) fail("empty input " + input.str());
}

namespace {

template <class V>
const V& only(const Block& b, std::span<const V> in) {
  if (in.size() != 1) {
    throw ShapeError("block '" + b.name() + "' (" + std::string(b.type()) + "): expects exactly one input, got " +
                     std::to_string(in.size()));
  }
  return in.front();
}

}  // namespace

#define Y4K_SINGLE_FORWARD(Cls)                                                                   \
  std::vector<Tensor> Cls::forward(EvalContext<float>& ctx, std::span<const Tensor> in) const {    \
    return {apply(ctx, only(*this, in))};                                                         \
  }                                                                                               \
  std::vector<TensorD> Cls::forward(EvalContext<double>& ctx, std::span<const TensorD> in) const { \
    return {apply(ctx, only(*this, in))};                                                         \
  }                                                                                               \
  std::vector<Var> Cls::forward(Tape& ctx, std::span<const Var> in) const { return {apply(ctx, only(*this, in))}; }

// ConvBlock -------------------------------------------------------------------

Padding auto_padding(int kernel, int stride) noexcept {
  if (kernel % 2 == 1) return Padding::uniform(kernel / 2);
  const int total = std::max(kernel - stride, 0);
  const int lead = total / 2;
  return {lead, total - lead, lead, total - lead};
}

ConvBlock::ConvBlock(std::string name, ConvSpec spec, BlockOptions opts)
    : Block(std::move(name)), spec_(spec), eps_(opts.bn_eps) {
  if (spec_.c_in < 1 || spec_.c_out < 1) fail("channel counts must be positive");
  if (spec_.kernel < 1 || spec_.stride < 1) fail("kernel and stride must be positive");
  if (spec_.groups < 1 || spec_.c_in % spec_.groups != 0 || spec_.c_out % spec_.groups != 0) {
    fail("groups=" + std::to_string(spec_.groups) + " must divide c_in=" + std::to_string(spec_.c_in) +
         " and c_out=" + std::to_string(spec_.c_out));
  }
  if (opts.fused && spec_.batchnorm) {
    spec_.batchnorm = false;
    spec_.bias = true;
  }
  if (spec_.batchnorm && spec_.bias) fail("conv bias is not allowed together with BN");
  padding_ = spec_.padding.value_or(auto_padding(spec_.kernel, spec_.stride));
  spec_.padding = padding_;
}

ConvGeometry ConvBlock::geometry() const noexcept { return {spec_.stride, spec_.stride, padding_, spec_.groups}; }

Shape4 ConvBlock::weight_shape() const noexcept {
  return {spec_.c_out, spec_.c_in / spec_.groups, spec_.kernel, spec_.kernel};
}

std::vector<Shape4> ConvBlock::output_shapes(std::span<const Shape4> inputs) const {
  const Shape4& in = single_input(inputs);
  require_channels(in, spec_.c_in);
  try {
    return {conv2d_output_shape(in, weight_shape(), geometry())};
  } catch (const ShapeError& e) {
    fail(e.what());
  }
}

std::int64_t ConvBlock::flops(std::span<const Shape4> inputs) const {
  const Shape4 out = output_shapes(inputs).front();
  const Shape4 w = weight_shape();
  return 2 * w.c * w.h * w.w * out.numel();
}

void ConvBlock::collect_params(std::vector<ParamSpec>& out) const {
  const Shape4 w = weight_shape();
  const std::int64_t fan_in = w.c * w.h * w.w;
  out.push_back({name() + ".weight", w, ParamRole::kConvWeight, fan_in});
  if (spec_.bias) out.push_back({name() + ".bias", vector_shape(spec_.c_out), ParamRole::kConvBias, fan_in});
  if (spec_.batchnorm) {
    out.push_back({name() + ".bn.gamma", vector_shape(spec_.c_out), ParamRole::kBnGamma, 0});
    out.push_back({name() + ".bn.beta", vector_shape(spec_.c_out), ParamRole::kBnBeta, 0});
    out.push_back({name() + ".bn.running_mean", vector_shape(spec_.c_out), ParamRole::kBnMean, 0});
    out.push_back({name() + ".bn.running_var", vector_shape(spec_.c_out), ParamRole::kBnVar, 0});
  }
}

template <class Ctx>
typename Ctx::Value ConvBlock::apply(Ctx& ctx, const typename Ctx::Value& x) const {
  require_channels(ctx.shape_of(x), spec_.c_in);
  const auto vec = vector_shape(spec_.c_out);
  auto w = ctx.param(name() + ".weight", weight_shape());
  typename Ctx::Value y;
  if (spec_.bias) {
    auto b = ctx.param(name() + ".bias", vec);
    y = ctx.conv2d(x, w, &b, geometry());
  } else {
    y = ctx.conv2d(x, w, nullptr, geometry());
  }
  if (spec_.batchnorm) {
    auto gamma = ctx.param(name() + ".bn.gamma", vec);
    auto beta = ctx.param(name() + ".bn.beta", vec);
    auto mean = ctx.param(name() + ".bn.running_mean", vec);
    auto var = ctx.param(name() + ".bn.running_var", vec);
    y = ctx.batchnorm(y, gamma, beta, mean, var, eps_);
  }
  return ctx.activate(y, spec_.act);
}

Y4K_SINGLE_FORWARD(ConvBlock)

// GhostConvBlock --------------------------------------------------------------

namespace {

std::int64_t half_even(std::int64_t c, const std::string& name) {
  if (c < 2 || c % 2 != 0) {
    throw ShapeError("block '" + name + "' (GhostConv): output channels must be even and >= 2, got " +
                     std::to_string(c));
  }
  return c / 2;
}

}  // namespace

GhostConvBlock::GhostConvBlock(std::string name, std::int64_t c_in, std::int64_t c_out, int kernel, int stride,
                               Activation act, BlockOptions opts)
    : Block(name),
      primary_(name + ".primary", {c_in, half_even(c_out, name), kernel, stride, 1, act}, opts),
      cheap_(name + ".cheap", {c_out / 2, c_out / 2, 5, 1, static_cast<int>(c_out / 2), act}, opts) {}

std::vector<Shape4> GhostConvBlock::output_shapes(std::span<const Shape4> inputs) const {
  Shape4 out = primary_.output_shape(single_input(inputs));
  out.c *= 2;
  return {out};
}

std::int64_t GhostConvBlock::flops(std::span<const Shape4> inputs) const {
  const Shape4 mid = primary_.output_shape(single_input(inputs));
  return primary_.flops(inputs) + cheap_.flops_for(mid);
}

void GhostConvBlock::collect_params(std::vector<ParamSpec>& out) const {
  primary_.collect_params(out);
  cheap_.collect_params(out);
}

template <class Ctx>
typename Ctx::Value GhostConvBlock::apply(Ctx& ctx, const typename Ctx::Value& x) const {
  auto y = primary_.apply(ctx, x);
  auto z = cheap_.apply(ctx, y);
  const typename Ctx::Value parts[] = {y, z};
  return ctx.concat_channels(parts);
}

Y4K_SINGLE_FORWARD(GhostConvBlock)

// C3k2Block --------------------------------------------------------------------

namespace {

std::int64_t hidden_width(std::int64_t c_out, double expansion, const std::string& name, const char* type) {
  const auto h = static_cast<std::int64_t>(static_cast<double>(c_out) * expansion);
  if (h < 1) {
    throw ShapeError("block '" + name + "' (" + type + "): hidden width c_out*expansion < 1");
  }
  return h;
}

ConvSpec pointwise(std::int64_t c_in, std::int64_t c_out, Activation act = Activation::kSilu) {
  return {c_in, c_out, 1, 1, 1, act};
}

}  // namespace

C3k2Block::C3k2Block(std::string name, std::int64_t c_in, std::int64_t c_out, int n, bool shortcut,
                     double expansion, BlockOptions opts)
    : Block(name),
      c_in_(c_in),
      c_out_(c_out),
      hidden_(hidden_width(c_out, expansion, name, "C3k2")),
      n_(n),
      shortcut_(shortcut),
      cv1_(name + ".cv1", pointwise(c_in, 2 * hidden_), opts),
      cv2_(name + ".cv2", pointwise((2 + std::max(n, 0)) * hidden_, c_out), opts) {
  if (n < 1) fail("needs at least one bottleneck");
  const ConvSpec inner{hidden_, hidden_, 2, 1, 1, Activation::kSilu, true, false, Padding{0, 1, 0, 1}};
  for (int i = 0; i < n; ++i) {
    const std::string base = name + ".m." + std::to_string(i);
    inner_.emplace_back(base + ".cv1", inner, opts);
    inner_.emplace_back(base + ".cv2", inner, opts);
  }
}

std::vector<Shape4> C3k2Block::output_shapes(std::span<const Shape4> inputs) const {
  const Shape4 mid = cv1_.output_shape(single_input(inputs));
  Shape4 branch{mid.n, hidden_, mid.h, mid.w};
  for (const auto& conv : inner_) branch = conv.output_shape(branch);
  if (branch.h != mid.h || branch.w != mid.w) fail("bottleneck changed the spatial extent");
  return {cv2_.output_shape({mid.n, (2 + n_) * hidden_, mid.h, mid.w})};
}

std::int64_t C3k2Block::flops(std::span<const Shape4> inputs) const {
  const Shape4 mid = cv1_.output_shape(single_input(inputs));
  std::int64_t total = cv1_.flops(inputs);
  const Shape4 branch{mid.n, hidden_, mid.h, mid.w};
  for (const auto& conv : inner_) total += conv.flops_for(branch);
  return total + cv2_.flops_for({mid.n, (2 + n_) * hidden_, mid.h, mid.w});
}

void C3k2Block::collect_params(std::vector<ParamSpec>& out) const {
  cv1_.collect_params(out);
  for (const auto& conv : inner_) conv.collect_params(out);
  cv2_.collect_params(out);
}

template <class Ctx>
typename Ctx::Value C3k2Block::apply(Ctx& ctx, const typename Ctx::Value& x) const {
  require_channels(ctx.shape_of(x), c_in_);
  auto y = cv1_.apply(ctx, x);
  std::vector<typename Ctx::Value> parts{ctx.slice_channels(y, 0, hidden_), ctx.slice_channels(y, hidden_, 2 * hidden_)};
  for (int i = 0; i < n_; ++i) {
    const auto& last = parts.back();
    auto t = inner_[2 * i].apply(ctx, last);
    t = inner_[2 * i + 1].apply(ctx, t);
    parts.push_back(shortcut_ ? ctx.add(last, t) : t);
  }
  return cv2_.apply(ctx, ctx.concat_channels(parts));
}

Y4K_SINGLE_FORWARD(C3k2Block)

// C3GhostBlock -----------------------------------------------------------------

C3GhostBlock::C3GhostBlock(std::string name, std::int64_t c_in, std::int64_t c_out, int n, double expansion,
                           BlockOptions opts)
    : Block(name),
      c_in_(c_in),
      c_out_(c_out),
      hidden_(hidden_width(c_out, expansion, name, "C3Ghost")),
      n_(n),
      cv1_(name + ".cv1", pointwise(c_in, 2 * hidden_), opts),
      cv2_(name + ".cv2", pointwise((2 + std::max(n, 0)) * hidden_, c_out), opts) {
  if (n < 1) fail("needs at least one bottleneck");
  for (int i = 0; i < n; ++i) {
    const std::string base = name + ".m." + std::to_string(i);
    inner_.emplace_back(base + ".ghost1", hidden_, hidden_, 1, 1, Activation::kSilu, opts);
    inner_.emplace_back(base + ".ghost2", hidden_, hidden_, 1, 1, Activation::kIdentity, opts);
  }
}

std::vector<Shape4> C3GhostBlock::output_shapes(std::span<const Shape4> inputs) const {
  const Shape4 mid = cv1_.output_shape(single_input(inputs));
  return {cv2_.output_shape({mid.n, (2 + n_) * hidden_, mid.h, mid.w})};
}

std::int64_t C3GhostBlock::flops(std::span<const Shape4> inputs) const {
  const Shape4 mid = cv1_.output_shape(single_input(inputs));
  std::int64_t total = cv1_.flops(inputs);
  const Shape4 branch{mid.n, hidden_, mid.h, mid.w};
  for (const auto& g : inner_) total += g.flops_for(branch);
  return total + cv2_.flops_for({mid.n, (2 + n_) * hidden_, mid.h, mid.w});
}

void C3GhostBlock::collect_params(std::vector<ParamSpec>& out) const {
  cv1_.collect_params(out);
  for (const auto& g : inner_) g.collect_params(out);
  cv2_.collect_params(out);
}

template <class Ctx>
typename Ctx::Value C3GhostBlock::apply(Ctx& ctx, const typename Ctx::Value& x) const {
  require_channels(ctx.shape_of(x), c_in_);
  auto y = cv1_.apply(ctx, x);
  std::vector<typename Ctx::Value> parts{ctx.slice_channels(y, 0, hidden_), ctx.slice_channels(y, hidden_, 2 * hidden_)};
  for (int i = 0; i < n_; ++i) {
    const auto& last = parts.back();
    auto t = inner_[2 * i].apply(ctx, last);
    t = inner_[2 * i + 1].apply(ctx, t);
    parts.push_back(ctx.add(last, t));
  }
  return cv2_.apply(ctx, ctx.concat_channels(parts));
}

Y4K_SINGLE_FORWARD(C3GhostBlock)

// SPPFBlock --------------------------------------------------------------------

SPPFBlock::SPPFBlock(std::string name, std::int64_t c_in, std::int64_t c_out, int pool_kernel, BlockOptions opts)
    : Block(name),
      c_in_(c_in),
      pool_kernel_(pool_kernel),
      cv1_(name + ".cv1", pointwise(c_in, std::max<std::int64_t>(c_in / 2, 1)), opts),
      cv2_(name + ".cv2", pointwise(4 * std::max<std::int64_t>(c_in / 2, 1), c_out), opts) {
  if (pool_kernel < 1 || pool_kernel % 2 == 0) fail("pool kernel must be odd");
}

std::vector<Shape4> SPPFBlock::output_shapes(std::span<const Shape4> inputs) const {
  const Shape4 mid = cv1_.output_shape(single_input(inputs));
  const Shape4 pooled = maxpool2d_output_shape(mid, pool());
  return {cv2_.output_shape({pooled.n, 4 * pooled.c, pooled.h, pooled.w})};
}

std::int64_t SPPFBlock::flops(std::span<const Shape4> inputs) const {
  const Shape4 mid = cv1_.output_shape(single_input(inputs));
  return cv1_.flops(inputs) + cv2_.flops_for({mid.n, 4 * mid.c, mid.h, mid.w});
}

void SPPFBlock::collect_params(std::vector<ParamSpec>& out) const {
  cv1_.collect_params(out);
  cv2_.collect_params(out);
}

template <class Ctx>
typename Ctx::Value SPPFBlock::apply(Ctx& ctx, const typename Ctx::Value& x) const {
  require_channels(ctx.shape_of(x), c_in_);
  std::vector<typename Ctx::Value> parts{cv1_.apply(ctx, x)};
  for (int i = 0; i < 3; ++i) parts.push_back(ctx.maxpool2d(parts.back(), pool()));
  return cv2_.apply(ctx, ctx.concat_channels(parts));
}

Y4K_SINGLE_FORWARD(SPPFBlock)

// C2PSABlock -------------------------------------------------------------------

namespace {

struct PsaDims {
  int heads, head_dim, key_dim;
};

PsaDims psa_dims(std::int64_t hidden, const PsaConfig& psa, const std::string& name) {
  auto bad = [&](const std::string& what) { return ShapeError("block '" + name + "' (C2PSA): " + what); };
  if (psa.head_dim < 1 || psa.attn_ratio <= 0.0 || psa.ffn_expansion < 1) throw bad("invalid attention constants");
  const int heads = std::max<int>(1, static_cast<int>(hidden / psa.head_dim));
  if (hidden % heads != 0) throw bad("hidden width " + std::to_string(hidden) + " not divisible by heads");
  const int head_dim = static_cast<int>(hidden / heads);
  const int key_dim = static_cast<int>(head_dim * psa.attn_ratio);
  if (key_dim < 1) throw bad("key dimension rounds to zero");
  return {heads, head_dim, key_dim};
}

}  // namespace

C2PSABlock::C2PSABlock(std::string name, std::int64_t c, int n, PsaConfig psa, BlockOptions opts)
    : Block(name),
      c_(c),
      hidden_(c / 2),
      n_(n),
      psa_(psa),
      heads_(0),
      key_dim_(0),
      head_dim_(0),
      cv1_(name + ".cv1", pointwise(c, 2 * std::max<std::int64_t>(c / 2, 1)), opts),
      cv2_(name + ".cv2", pointwise(2 * std::max<std::int64_t>(c / 2, 1), c), opts) {
  if (c < 2) fail("needs at least 2 channels");
  if (n < 1) fail("needs at least one PSA unit");
  const PsaDims d = psa_dims(hidden_, psa_, this->name());
  heads_ = d.heads;
  key_dim_ = d.key_dim;
  head_dim_ = d.head_dim;
  const std::int64_t qkv_c = hidden_ + 2LL * key_dim_ * heads_;
  const std::int64_t ffn_c = hidden_ * psa_.ffn_expansion;
  const auto lin = Activation::kIdentity;
  for (int i = 0; i < n; ++i) {
    const std::string base = this->name() + ".m." + std::to_string(i);
    units_.push_back(Unit{
        ConvBlock(base + ".attn.qkv", pointwise(hidden_, qkv_c, lin), opts),
        ConvBlock(base + ".attn.pe", {hidden_, hidden_, 3, 1, static_cast<int>(hidden_), lin}, opts),
        ConvBlock(base + ".attn.proj", pointwise(hidden_, hidden_, lin), opts),
        ConvBlock(base + ".ffn.0", pointwise(hidden_, ffn_c), opts),
        ConvBlock(base + ".ffn.1", pointwise(ffn_c, hidden_, lin), opts),
    });
  }
}

double C2PSABlock::scale() const noexcept {
  return 1.0 / std::sqrt(static_cast<double>(psa_.scale_by_head_dim ? head_dim_ : key_dim_));
}

std::vector<Shape4> C2PSABlock::output_shapes(std::span<const Shape4> inputs) const {
  const Shape4 mid = cv1_.output_shape(single_input(inputs));
  return {cv2_.output_shape(mid)};
}

std::int64_t C2PSABlock::flops(std::span<const Shape4> inputs) const {
  const Shape4 mid = cv1_.output_shape(single_input(inputs));
  const Shape4 half{mid.n, hidden_, mid.h, mid.w};
  const std::int64_t positions = mid.plane();
  std::int64_t total = cv1_.flops(inputs) + cv2_.flops_for(mid);
  for (const auto& u : units_) {
    total += u.qkv.flops_for(half);
    total += 2 * mid.n * heads_ * positions * positions * (key_dim_ + head_dim_);
    total += u.pe.flops_for(half) + u.proj.flops_for(half);
    total += u.ffn1.flops_for(half) + u.ffn2.flops_for(u.ffn1.output_shape(half));
  }
  return total;
}

void C2PSABlock::collect_params(std::vector<ParamSpec>& out) const {
  cv1_.collect_params(out);
  for (const auto& u : units_) {
    u.qkv.collect_params(out);
    u.pe.collect_params(out);
    u.proj.collect_params(out);
    u.ffn1.collect_params(out);
    u.ffn2.collect_params(out);
  }
  cv2_.collect_params(out);
}

template <class Ctx>
typename Ctx::Value C2PSABlock::apply(Ctx& ctx, const typename Ctx::Value& x) const {
  require_channels(ctx.shape_of(x), c_);
  auto y = cv1_.apply(ctx, x);
  auto a = ctx.slice_channels(y, 0, hidden_);
  auto b = ctx.slice_channels(y, hidden_, 2 * hidden_);
  const std::int64_t per_head = 2LL * key_dim_ + head_dim_;
  for (const auto& u : units_) {
    auto qkv = u.qkv.apply(ctx, b);
    auto attended = ctx.spatial_attention(qkv, heads_, key_dim_, head_dim_, scale());
    std::vector<typename Ctx::Value> v_parts;
    for (int h = 0; h < heads_; ++h) {
      const std::int64_t v0 = h * per_head + 2LL * key_dim_;
      v_parts.push_back(ctx.slice_channels(qkv, v0, v0 + head_dim_));
    }
    auto v = heads_ == 1 ? v_parts.front() : ctx.concat_channels(v_parts);
    auto mixed = u.proj.apply(ctx, ctx.add(attended, u.pe.apply(ctx, v)));
    b = ctx.add(b, mixed);
    b = ctx.add(b, u.ffn2.apply(ctx, u.ffn1.apply(ctx, b)));
  }
  const typename Ctx::Value parts[] = {a, b};
  return cv2_.apply(ctx, ctx.concat_channels(parts));
}

Y4K_SINGLE_FORWARD(C2PSABlock)

// UpsampleBlock / ConcatBlock --------------------------------------------------

UpsampleBlock::UpsampleBlock(std::string name, int scale) : Block(std::move(name)), scale_(scale) {
  if (scale < 1) fail("scale must be >= 1");
}

std::vector<Shape4> UpsampleBlock::output_shapes(std::span<const Shape4> inputs) const {
  const Shape4& in = single_input(inputs);
  if (in.c < 1) fail("zero-channel input");
  return {{in.n, in.c, in.h * scale_, in.w * scale_}};
}

std::int64_t UpsampleBlock::flops(std::span<const Shape4> inputs) const {
  output_shapes(inputs);
  return 0;
}

void UpsampleBlock::collect_params(std::vector<ParamSpec>&) const {}

std::vector<Tensor> UpsampleBlock::forward(EvalContext<float>& ctx, std::span<const Tensor> in) const {
  return {ctx.upsample_nearest(only(*this, in), scale_)};
}
std::vector<TensorD> UpsampleBlock::forward(EvalContext<double>& ctx, std::span<const TensorD> in) const {
  return {ctx.upsample_nearest(only(*this, in), scale_)};
}
std::vector<Var> UpsampleBlock::forward(Tape& ctx, std::span<const Var> in) const {
  return {ctx.upsample_nearest(only(*this, in), scale_)};
}

std::vector<Shape4> ConcatBlock::output_shapes(std::span<const Shape4> inputs) const {
  if (inputs.empty()) fail("no inputs");
  Shape4 out = inputs.front();
  out.c = 0;
  for (const auto& s : inputs) {
    if (s.c < 1) fail("zero-channel input");
    if (s.n != out.n || s.h != out.h || s.w != out.w) {
      fail("spatial mismatch " + inputs.front().str() + " vs " + s.str());
    }
    out.c += s.c;
  }
  return {out};
}

std::int64_t ConcatBlock::flops(std::span<const Shape4> inputs) const {
  output_shapes(inputs);
  return 0;
}

void ConcatBlock::collect_params(std::vector<ParamSpec>&) const {}

std::vector<Tensor> ConcatBlock::forward(EvalContext<float>& ctx, std::span<const Tensor> in) const {
  return {ctx.concat_channels(in)};
}
std::vector<TensorD> ConcatBlock::forward(EvalContext<double>& ctx, std::span<const TensorD> in) const {
  return {ctx.concat_channels(in)};
}
std::vector<Var> ConcatBlock::forward(Tape& ctx, std::span<const Var> in) const { return {ctx.concat_channels(in)}; }

// DetectHead -------------------------------------------------------------------

DetectHead::DetectHead(std::string name, int nc, std::vector<std::int64_t> in_channels, int reg_max,
                       std::int64_t box_hidden, std::int64_t cls_hidden, BlockOptions opts)
    : Block(std::move(name)), nc_(nc), reg_max_(reg_max), in_channels_(std::move(in_channels)) {
  if (nc < 1) fail("nc must be positive");
  if (reg_max < 1) fail("reg_max must be positive");
  if (in_channels_.empty()) fail("needs at least one input scale");
  const std::int64_t ch0 = in_channels_.front();
  box_hidden_ = box_hidden > 0 ? box_hidden : std::max<std::int64_t>({16, ch0 / 4, 4LL * reg_max});
  cls_hidden_ = cls_hidden > 0 ? cls_hidden : std::max<std::int64_t>(ch0, std::min(nc, 100));

  const auto lin = Activation::kIdentity;
  for (std::size_t i = 0; i < in_channels_.size(); ++i) {
    const std::int64_t ch = in_channels_[i];
    const std::string base = this->name() + ".scale" + std::to_string(i);
    Branch br;
    br.box.emplace_back(base + ".box.0", ConvSpec{ch, box_hidden_, 3}, opts);
    br.box.emplace_back(base + ".box.1", ConvSpec{box_hidden_, box_hidden_, 3}, opts);
    br.box.emplace_back(base + ".box.2", ConvSpec{box_hidden_, 4LL * reg_max, 1, 1, 1, lin, false, true}, opts);
    br.cls.emplace_back(base + ".cls.0", ConvSpec{ch, ch, 3, 1, static_cast<int>(ch)}, opts);
    br.cls.emplace_back(base + ".cls.1", ConvSpec{ch, cls_hidden_, 1}, opts);
    br.cls.emplace_back(base + ".cls.2", ConvSpec{cls_hidden_, cls_hidden_, 3, 1, static_cast<int>(cls_hidden_)}, opts);
    br.cls.emplace_back(base + ".cls.3", ConvSpec{cls_hidden_, cls_hidden_, 1}, opts);
    br.cls.emplace_back(base + ".cls.4", ConvSpec{cls_hidden_, nc, 1, 1, 1, lin, false, true}, opts);
    branches_.push_back(std::move(br));
  }
}

std::vector<Shape4> DetectHead::output_shapes(std::span<const Shape4> inputs) const {
  if (inputs.size() != in_channels_.size()) {
    fail("expects " + std::to_string(in_channels_.size()) + " input scales, got " + std::to_string(inputs.size()));
  }
  std::vector<Shape4> out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    require_channels(inputs[i], in_channels_[i]);
    Shape4 s = inputs[i];
    for (const auto& conv : branches_[i].box) s = conv.output_shape(s);
    out.push_back({s.n, output_channels(), s.h, s.w});
  }
  return out;
}

std::int64_t DetectHead::flops(std::span<const Shape4> inputs) const {
  output_shapes(inputs);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Shape4 s = inputs[i];
    for (const auto& conv : branches_[i].box) {
      total += conv.flops_for(s);
      s = conv.output_shape(s);
    }
    s = inputs[i];
    for (const auto& conv : branches_[i].cls) {
      total += conv.flops_for(s);
      s = conv.output_shape(s);
    }
  }
  return total;
}

void DetectHead::collect_params(std::vector<ParamSpec>& out) const {
  for (const auto& br : branches_) {
    for (const auto& conv : br.box) conv.collect_params(out);
    for (const auto& conv : br.cls) conv.collect_params(out);
  }
}

template <class Ctx>
std::vector<typename Ctx::Value> DetectHead::run(Ctx& ctx, std::span<const typename Ctx::Value> xs) const {
  if (xs.size() != in_channels_.size()) {
    fail("expects " + std::to_string(in_channels_.size()) + " input scales, got " + std::to_string(xs.size()));
  }
  std::vector<typename Ctx::Value> outs;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require_channels(ctx.shape_of(xs[i]), in_channels_[i]);
    auto box = xs[i];
    for (const auto& conv : branches_[i].box) box = conv.apply(ctx, box);
    auto cls = xs[i];
    for (const auto& conv : branches_[i].cls) cls = conv.apply(ctx, cls);
    const typename Ctx::Value parts[] = {box, cls};
    outs.push_back(ctx.concat_channels(parts));
  }
  return outs;
}

std::vector<Tensor> DetectHead::forward(EvalContext<float>& ctx, std::span<const Tensor> in) const {
  return run(ctx, in);
}
std::vector<TensorD> DetectHead::forward(EvalContext<double>& ctx, std::span<const TensorD> in) const {
  return run(ctx, in);
}
std::vector<Var> DetectHead::forward(Tape& ctx, std::span<const Var> in) const { return run(ctx, in); }

#undef Y4K_SINGLE_FORWARD

}  // namespace y4k
