// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/autograd.hpp"

#include <string>
#include <utility>

namespace y4k {
namespace {

std::span<const double> as_vec(const TensorD& t) { return t.data(); }

TensorD vec_tensor(std::vector<double> v) {
  const auto c = static_cast<std::int64_t>(v.size());
  return TensorD(vector_shape(c), std::move(v));
}

}  // namespace

Tape::Tape(std::map<std::string, TensorD> params) : param_values_(std::move(params)) {}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(const Var& v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) throw Error("tape: invalid variable handle");
  return nodes_[static_cast<std::size_t>(v.id)];
}

const TensorD& Tape::value(const Var& v) const { return node(v).value; }

Var Tape::input(TensorD value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(const std::string& name, const Shape4& expected) {
  if (auto it = param_vars_.find(name); it != param_vars_.end()) return it->second;
  auto it = param_values_.find(name);
  if (it == param_values_.end()) throw MissingWeightError("weight '" + name + "' is not loaded");
  if (it->second.shape() != expected) {
    throw ShapeError("weight '" + name + "' has shape " + it->second.shape().str() + ", expected " + expected.str());
  }
  Var v = input(it->second);
  param_vars_.emplace(name, v);
  return v;
}

Var Tape::conv2d(const Var& x, const Var& w, const Var* bias, const ConvGeometry& g) {
  Node n;
  n.op = Op::kConv;
  n.inputs = {x.id, w.id};
  n.conv = g;
  n.has_bias = bias != nullptr;
  if (bias != nullptr) n.inputs.push_back(bias->id);
  n.value = y4k::conv2d<double>(value(x), value(w), bias != nullptr ? as_vec(value(*bias)) : std::span<const double>{}, g);
  return push(std::move(n));
}

Var Tape::batchnorm(const Var& x, const Var& gamma, const Var& beta, const Var& mean, const Var& var, double eps) {
  Node n;
  n.op = Op::kBatchNorm;
  n.inputs = {x.id, gamma.id, beta.id, mean.id, var.id};
  n.eps = eps;
  n.value = batchnorm_inference<double>(value(x), as_vec(value(gamma)), as_vec(value(beta)), as_vec(value(mean)),
                                        as_vec(value(var)), eps);
  return push(std::move(n));
}

Var Tape::activate(const Var& x, Activation kind) {
  Node n;
  n.op = Op::kActivate;
  n.inputs = {x.id};
  n.act = kind;
  n.value = y4k::activate<double>(value(x), kind);
  return push(std::move(n));
}

Var Tape::maxpool2d(const Var& x, const PoolGeometry& g) {
  Node n;
  n.op = Op::kMaxPool;
  n.inputs = {x.id};
  n.pool = g;
  n.value = y4k::maxpool2d<double>(value(x), g);
  return push(std::move(n));
}

Var Tape::upsample_nearest(const Var& x, int scale) {
  Node n;
  n.op = Op::kUpsample;
  n.inputs = {x.id};
  n.scale = scale;
  n.value = y4k::upsample_nearest<double>(value(x), scale);
  return push(std::move(n));
}

Var Tape::concat_channels(std::span<const Var> xs) {
  Node n;
  n.op = Op::kConcat;
  std::vector<TensorD> parts;
  parts.reserve(xs.size());
  for (const auto& x : xs) {
    n.inputs.push_back(x.id);
    parts.push_back(value(x));
  }
  n.value = y4k::concat_channels<double>(parts);
  return push(std::move(n));
}

Var Tape::slice_channels(const Var& x, std::int64_t begin, std::int64_t end) {
  Node n;
  n.op = Op::kSlice;
  n.inputs = {x.id};
  n.begin = begin;
  n.value = y4k::slice_channels<double>(value(x), begin, end);
  return push(std::move(n));
}

Var Tape::add(const Var& a, const Var& b) {
  Node n;
  n.op = Op::kAdd;
  n.inputs = {a.id, b.id};
  n.value = y4k::add<double>(value(a), value(b));
  return push(std::move(n));
}

Var Tape::spatial_attention(const Var& qkv, int heads, int key_dim, int head_dim, double scale) {
  Node n;
  n.op = Op::kAttention;
  n.inputs = {qkv.id};
  n.value = y4k::spatial_attention<double>(value(qkv), heads, key_dim, head_dim, scale);
  return push(std::move(n));
}

const char* Tape::op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kConv: return "conv2d";
    case Op::kBatchNorm: return "batchnorm_inference";
    case Op::kActivate: return "activation";
    case Op::kMaxPool: return "maxpool2d";
    case Op::kUpsample: return "upsample_nearest";
    case Op::kConcat: return "concat_channels";
    case Op::kSlice: return "slice_channels";
    case Op::kAdd: return "add";
    case Op::kAttention: return "spatial_attention";
  }
  return "unknown";
}

void Tape::backward(const Var& out, const TensorD& grad_output) {
  const Node& root = node(out);
  if (root.value.shape() != grad_output.shape()) {
    throw ShapeError("backward: seed gradient " + grad_output.shape().str() + " does not match output " +
                     root.value.shape().str());
  }
  grads_.assign(nodes_.size(), std::nullopt);
  grads_[static_cast<std::size_t>(out.id)] = grad_output;

  auto accumulate = [this](std::int32_t id, TensorD g) {
    auto& slot = grads_[static_cast<std::size_t>(id)];
    if (!slot) {
      slot = std::move(g);
    } else {
      *slot = y4k::add<double>(*slot, g);
    }
  };

  for (std::int32_t id = out.id; id >= 0; --id) {
    const auto& gslot = grads_[static_cast<std::size_t>(id)];
    if (!gslot) continue;
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const TensorD& gy = *gslot;
    auto in = [&](std::size_t i) -> const TensorD& { return nodes_[static_cast<std::size_t>(n.inputs[i])].value; };

    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kConv: {
        auto g = conv2d_backward<double>(in(0), in(1), n.has_bias, n.conv, gy);
        accumulate(n.inputs[0], std::move(g.input));
        accumulate(n.inputs[1], std::move(g.weight));
        if (n.has_bias) accumulate(n.inputs[2], vec_tensor(std::move(g.bias)));
        break;
      }
      case Op::kBatchNorm: {
        auto g = batchnorm_inference_backward<double>(in(0), as_vec(in(1)), as_vec(in(3)), as_vec(in(4)), n.eps, gy);
        accumulate(n.inputs[0], std::move(g.input));
        accumulate(n.inputs[1], vec_tensor(std::move(g.gamma)));
        accumulate(n.inputs[2], vec_tensor(std::move(g.beta)));
        accumulate(n.inputs[3], vec_tensor(std::move(g.mean)));
        accumulate(n.inputs[4], vec_tensor(std::move(g.var)));
        break;
      }
      case Op::kActivate:
        accumulate(n.inputs[0], activate_backward<double>(in(0), n.act, gy));
        break;
      case Op::kMaxPool:
        accumulate(n.inputs[0], maxpool2d_backward<double>(in(0), n.pool, gy));
        break;
      case Op::kUpsample:
        accumulate(n.inputs[0], upsample_nearest_backward<double>(gy, n.scale));
        break;
      case Op::kConcat: {
        std::vector<std::int64_t> widths;
        for (std::size_t i = 0; i < n.inputs.size(); ++i) widths.push_back(in(i).shape().c);
        auto parts = concat_channels_backward<double>(gy, widths);
        for (std::size_t i = 0; i < parts.size(); ++i) accumulate(n.inputs[i], std::move(parts[i]));
        break;
      }
      case Op::kSlice:
        accumulate(n.inputs[0], slice_channels_backward<double>(in(0).shape(), n.begin, gy));
        break;
      case Op::kAdd:
        accumulate(n.inputs[0], gy);
        accumulate(n.inputs[1], gy);
        break;
      case Op::kAttention:
        throw UnsupportedOpError(std::string("backward is not implemented for op '") + op_name(n.op) + "'");
    }
  }
}

TensorD Tape::grad(const Var& v) const {
  const Node& n = node(v);
  if (static_cast<std::size_t>(v.id) < grads_.size() && grads_[static_cast<std::size_t>(v.id)]) {
    return *grads_[static_cast<std::size_t>(v.id)];
  }
  return TensorD(n.value.shape());
}

}  // namespace y4k
