// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

// Declarative model configs and the executable graphs built from them.
//
// A config is a list of layers. Each layer names its inputs with `from`
// indices: -1 is the previous layer (the image for layer 0), other negative
// values are relative, non-negative values are absolute and must point
// backwards. The last layer is the single Detect layer.
//
// Layer args by type (trailing args optional):
//   Conv      [c_out, k=1, s=1]
//   GhostConv [c_out, k=1, s=1]
//   C3k2      [c_out, n=1, shortcut=true, e=0.5]
//   C3Ghost   [c_out, n=1, e=0.5]
//   SPPF      [c_out, k=5]
//   C2PSA     [c_out, n=1]
//   Upsample  [scale=2]
//   Concat    []
//   Detect    [reg_max=16, box_hidden=0, cls_hidden=0]

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "y4k/blocks.hpp"
#include "y4k/weight_store.hpp"

namespace y4k {

using ArgValue = std::variant<std::int64_t, double, bool>;

struct LayerSpec {
  std::vector<int> from;
  std::string type;
  std::vector<ArgValue> args;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelConfig {
  std::string name;
  int nc = 1;
  int input_h = 640;
  int input_w = 640;
  std::vector<LayerSpec> layers;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Throws ConfigError (with the offending layer index where there is one).
ModelConfig parse_config(std::string_view text);
std::string serialize_config(const ModelConfig& config);
/// Structural checks shared by parse_config and build.
void validate_config(const ModelConfig& config);

std::span<const std::string_view> builtin_variant_names();
/// Throws ConfigError listing the valid names when `name` is unknown.
ModelConfig builtin_variant(std::string_view name);

struct BuildOptions {
  bool fused = false;
  double bn_eps = 1e-3;
  PsaConfig psa;
};

struct GraphLayer {
  int index = 0;
  std::vector<int> inputs;  // absolute indices, -1 = image
  std::unique_ptr<Block> block;
  std::vector<Shape4> output_shapes;  // one per Detect scale, one otherwise
  std::int64_t params = 0;
  std::int64_t flops = 0;
  int last_use = 0;  // last layer index reading this output
};

/// Called after every layer with its index and produced shapes.
using LayerObserver = std::function<void(int, std::span<const Shape4>)>;

class ModelGraph {
 public:
  const ModelConfig& config() const noexcept { return config_; }
  const BuildOptions& options() const noexcept { return options_; }
  Shape4 input_shape() const noexcept { return {1, 3, config_.input_h, config_.input_w}; }
  const std::vector<GraphLayer>& layers() const noexcept { return layers_; }
  const DetectHead& detect() const;

  std::int64_t total_params() const noexcept { return total_params_; }
  std::int64_t total_flops() const noexcept { return total_flops_; }
  /// Every stored weight the forward reads, in execution order.
  std::vector<ParamSpec> param_specs() const;

  std::span<const Shape4> detect_input_shapes() const noexcept { return detect_inputs_; }
  std::span<const Shape4> head_output_shapes() const { return layers_.back().output_shapes; }
  /// input_h / h_s per detect scale.
  std::vector<int> strides() const;

  /// Raw head outputs, one tensor per detect scale. `image` must be
  /// (n, 3, input_h, input_w). Throws MissingWeightError when the store
  /// lacks a weight.
  std::vector<Tensor> forward(const WeightStore& store, const Tensor& image, const LayerObserver& observer = {},
                              std::set<std::string>* reads = nullptr) const;
  std::vector<TensorD> forward(const WeightStore& store, const TensorD& image,
                               const LayerObserver& observer = {}) const;
  std::vector<Var> forward(Tape& tape, const Var& image) const;

 private:
  friend ModelGraph build(const ModelConfig&, std::optional<std::pair<int, int>>, const BuildOptions&);

  template <class Ctx>
  std::vector<typename Ctx::Value> run(Ctx& ctx, const typename Ctx::Value& image,
                                       const LayerObserver& observer) const;

  ModelConfig config_;
  BuildOptions options_;
  std::vector<GraphLayer> layers_;
  std::vector<Shape4> detect_inputs_;
  std::int64_t total_params_ = 0;
  std::int64_t total_flops_ = 0;
};

/// Instantiates every layer and propagates shapes at `imgsz` (h, w), or at
/// the config's input_size when absent. Throws ConfigError naming the first
/// layer that fails.
ModelGraph build(const ModelConfig& config, std::optional<std::pair<int, int>> imgsz = std::nullopt,
                 const BuildOptions& options = {});

}  // namespace y4k
