// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "y4k/error.hpp"
#include "y4k/rng.hpp"

namespace y4k {

namespace {

constexpr double kRelFloor = 1e-3;

std::map<std::string, TensorD> random_params(const Block& block, SplitMix64& rng) {
  std::map<std::string, TensorD> out;
  for (const ParamSpec& p : block.params()) {
    TensorD t(p.shape);
    for (auto& v : t.data()) {
      switch (p.role) {
        case ParamRole::kConvWeight:
        case ParamRole::kConvBias: {
          const double bound = 1.0 / std::sqrt(static_cast<double>(p.fan_in));
          v = rng.uniform(-bound, bound);
          break;
        }
        case ParamRole::kBnGamma:
        case ParamRole::kBnVar:
          v = rng.uniform(0.5, 1.5);
          break;
        case ParamRole::kBnBeta:
        case ParamRole::kBnMean:
          v = rng.uniform(-0.5, 0.5);
          break;
      }
    }
    out.emplace(p.name, std::move(t));
  }
  return out;
}

double loss(const Block& block, const std::map<std::string, TensorD>& params, const TensorD& x, const TensorD& proj) {
  Tape tape(params);
  const TensorD& out = tape.value(block.forward_one(tape, tape.input(x)));
  double sum = 0;
  for (std::int64_t i = 0; i < out.numel(); ++i) sum += out[i] * proj[i];
  return sum;
}

}  // namespace

std::vector<std::string> gradcheck_block_types() { return {"Conv", "GhostConv", "C3k2", "C3Ghost", "SPPF", "C2PSA"}; }

std::unique_ptr<Block> make_gradcheck_block(const std::string& type, std::int64_t channels) {
  if (type == "Conv") return std::make_unique<ConvBlock>("b", ConvSpec{channels, channels, 3, 1});
  if (type == "GhostConv") return std::make_unique<GhostConvBlock>("b", channels, channels);
  if (type == "C3k2") return std::make_unique<C3k2Block>("b", channels, channels, 1, true);
  if (type == "C3Ghost") return std::make_unique<C3GhostBlock>("b", channels, channels, 1);
  if (type == "SPPF") return std::make_unique<SPPFBlock>("b", channels, channels);
  if (type == "C2PSA") return std::make_unique<C2PSABlock>("b", channels, 1);
  std::string valid;
  for (const auto& t : gradcheck_block_types()) valid += (valid.empty() ? "" : ", ") + t;
  throw ConfigError(-1, "no gradient check for block type '" + type + "' (valid: " + valid + ")");
}

GradCheckResult gradcheck(const Block& block, const GradCheckOptions& options) {
  SplitMix64 rng(options.seed);
  std::map<std::string, TensorD> params = random_params(block, rng);
  TensorD x(options.input);
  for (auto& v : x.data()) v = rng.uniform(-1.0, 1.0);
  const Shape4 out_shape = block.output_shape(options.input);
  TensorD proj(out_shape);
  for (auto& v : proj.data()) v = rng.uniform(-1.0, 1.0);

  Tape tape(params);
  const Var in = tape.input(x);
  const Var out = block.forward_one(tape, in);
  tape.backward(out, proj);

  GradCheckResult result;
  result.block = std::string(block.type());
  result.tolerance = options.tolerance;
  const auto compare = [&](double analytic, double numeric, const std::string& where) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelFloor});
    const double rel = std::abs(analytic - numeric) / denom;
    if (result.checked++ == 0 || rel > result.max_rel_err) {
      result.max_rel_err = rel;
      result.worst = where;
    }
  };

  const TensorD gx = tape.grad(in);
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const double saved = x[i];
    x[i] = saved + options.eps;
    const double up = loss(block, params, x, proj);
    x[i] = saved - options.eps;
    const double down = loss(block, params, x, proj);
    x[i] = saved;
    compare(gx[i], (up - down) / (2 * options.eps), "input[" + std::to_string(i) + "]");
  }

  for (auto& [name, value] : params) {
    const TensorD g = tape.grad(tape.params().at(name));
    for (std::int64_t i = 0; i < value.numel(); ++i) {
      const double saved = value[i];
      value[i] = saved + options.eps;
      const double up = loss(block, params, x, proj);
      value[i] = saved - options.eps;
      const double down = loss(block, params, x, proj);
      value[i] = saved;
      compare(g[i], (up - down) / (2 * options.eps), name + "[" + std::to_string(i) + "]");
    }
  }
  return result;
}

}  // namespace y4k
