// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/graph.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include <json.hpp>

#include "y4k/error.hpp"

namespace y4k {

namespace {

using nlohmann::json;

enum class ArgKind { kInt, kReal, kBool };

struct TypeSignature {
  std::vector<ArgKind> kinds;
  std::size_t required;
};

const std::map<std::string, TypeSignature, std::less<>>& signatures() {
  using enum ArgKind;
  static const std::map<std::string, TypeSignature, std::less<>> table{
      {"Conv", {{kInt, kInt, kInt}, 1}},
      {"GhostConv", {{kInt, kInt, kInt}, 1}},
      {"C3k2", {{kInt, kInt, kBool, kReal}, 1}},
      {"C3Ghost", {{kInt, kInt, kReal}, 1}},
      {"SPPF", {{kInt, kInt}, 1}},
      {"C2PSA", {{kInt, kInt}, 1}},
      {"Upsample", {{kInt}, 0}},
      {"Concat", {{}, 0}},
      {"Detect", {{kInt, kInt, kInt}, 0}},
  };
  return table;
}

bool fits(const ArgValue& v, ArgKind kind) {
  switch (kind) {
    case ArgKind::kInt:
      return std::holds_alternative<std::int64_t>(v);
    case ArgKind::kReal:
      return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
    case ArgKind::kBool:
      return std::holds_alternative<bool>(v);
  }
  return false;
}

// Absolute source index, or nullopt when the reference is illegal.
std::optional<int> resolve(int layer, int from) {
  const int abs = from < 0 ? layer + from : from;
  if (from >= 0 && from >= layer) return std::nullopt;
  if (abs == -1 && layer == 0) return -1;
  if (abs < 0) return std::nullopt;
  return abs;
}

class Args {
 public:
  Args(int layer, const LayerSpec& spec) : layer_(layer), spec_(spec) {}

  std::int64_t integer(std::size_t i, std::int64_t fallback) const {
    return i < spec_.args.size() ? std::get<std::int64_t>(spec_.args[i]) : fallback;
  }
  std::int64_t positive(std::size_t i, std::int64_t fallback, const char* what) const {
    const std::int64_t v = integer(i, fallback);
    if (v < 1) throw ConfigError(layer_, spec_.type + " " + what + " must be positive, got " + std::to_string(v));
    return v;
  }
  double real(std::size_t i, double fallback) const {
    if (i >= spec_.args.size()) return fallback;
    const ArgValue& v = spec_.args[i];
    return std::holds_alternative<double>(v) ? std::get<double>(v) : static_cast<double>(std::get<std::int64_t>(v));
  }
  bool boolean(std::size_t i, bool fallback) const {
    return i < spec_.args.size() ? std::get<bool>(spec_.args[i]) : fallback;
  }

 private:
  int layer_;
  const LayerSpec& spec_;
};

int to_int(std::int64_t v, int layer, const char* what) {
  if (v > 1 << 20) throw ConfigError(layer, std::string(what) + " is out of range");
  return static_cast<int>(v);
}

std::unique_ptr<Block> make_block(int index, const LayerSpec& spec, std::span<const Shape4> inputs, int nc,
                                  const BuildOptions& options) {
  const Args a(index, spec);
  const std::string name = "layers." + std::to_string(index);
  const BlockOptions opts{options.fused, options.bn_eps};
  const std::string& t = spec.type;

  if (t == "Concat") return std::make_unique<ConcatBlock>(name);
  if (t == "Detect") {
    std::vector<std::int64_t> channels;
    for (const auto& s : inputs) channels.push_back(s.c);
    return std::make_unique<DetectHead>(name, nc, std::move(channels), to_int(a.positive(0, 16, "reg_max"), index, "reg_max"),
                                        a.integer(1, 0), a.integer(2, 0), opts);
  }
  if (inputs.size() != 1) {
    throw ConfigError(index, t + " takes exactly one input, got " + std::to_string(inputs.size()));
  }
  const std::int64_t c_in = inputs.front().c;
  if (t == "Upsample") return std::make_unique<UpsampleBlock>(name, to_int(a.positive(0, 2, "scale"), index, "scale"));

  const std::int64_t c_out = a.positive(0, 0, "c_out");
  if (t == "Conv" || t == "GhostConv") {
    const int k = to_int(a.positive(1, 1, "kernel"), index, "kernel");
    const int s = to_int(a.positive(2, 1, "stride"), index, "stride");
    if (t == "Conv") return std::make_unique<ConvBlock>(name, ConvSpec{c_in, c_out, k, s}, opts);
    return std::make_unique<GhostConvBlock>(name, c_in, c_out, k, s, Activation::kSilu, opts);
  }
  const int n = to_int(a.positive(1, 1, "repeat count"), index, "repeat count");
  if (t == "C3k2") return std::make_unique<C3k2Block>(name, c_in, c_out, n, a.boolean(2, true), a.real(3, 0.5), opts);
  if (t == "C3Ghost") return std::make_unique<C3GhostBlock>(name, c_in, c_out, n, a.real(2, 0.5), opts);
  if (t == "SPPF") {
    return std::make_unique<SPPFBlock>(name, c_in, c_out, to_int(a.positive(1, 5, "pool kernel"), index, "kernel"),
                                       opts);
  }
  if (t == "C2PSA") {
    if (c_out != c_in) {
      throw ConfigError(index, "C2PSA needs c_out == c_in, got " + std::to_string(c_out) + " vs " +
                                   std::to_string(c_in));
    }
    return std::make_unique<C2PSABlock>(name, c_in, n, options.psa, opts);
  }
  throw ConfigError(index, "unknown block type '" + t + "'");
}

json arg_to_json(const ArgValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

}  // namespace

// Config I/O -------------------------------------------------------------------

void validate_config(const ModelConfig& config) {
  if (config.nc < 1) throw ConfigError(-1, "nc must be positive");
  if (config.input_h < 1 || config.input_w < 1) throw ConfigError(-1, "input_size must be positive");
  if (config.layers.empty()) throw ConfigError(-1, "config has no layers");
  int detect_at = -1;
  for (int i = 0; i < static_cast<int>(config.layers.size()); ++i) {
    const LayerSpec& layer = config.layers[i];
    const auto sig = signatures().find(layer.type);
    if (sig == signatures().end()) throw ConfigError(i, "unknown block type '" + layer.type + "'");
    if (layer.from.empty()) throw ConfigError(i, "empty 'from' list");
    for (int f : layer.from) {
      if (!resolve(i, f)) {
        throw ConfigError(i, f >= i ? "forward reference to layer " + std::to_string(f)
                                    : "reference " + std::to_string(f) + " points before the input");
      }
    }
    const auto& kinds = sig->second.kinds;
    if (layer.args.size() < sig->second.required || layer.args.size() > kinds.size()) {
      throw ConfigError(i, layer.type + " takes " + std::to_string(sig->second.required) + ".." +
                               std::to_string(kinds.size()) + " args, got " + std::to_string(layer.args.size()));
    }
    for (std::size_t a = 0; a < layer.args.size(); ++a) {
      if (!fits(layer.args[a], kinds[a])) {
        throw ConfigError(i, layer.type + " arg " + std::to_string(a) + " has the wrong type");
      }
    }
    if (layer.type == "Detect") {
      if (detect_at >= 0) throw ConfigError(i, "second Detect layer (first at " + std::to_string(detect_at) + ")");
      detect_at = i;
    }
  }
  if (detect_at < 0) throw ConfigError(-1, "config has no Detect layer");
  if (detect_at != static_cast<int>(config.layers.size()) - 1) {
    throw ConfigError(detect_at, "the Detect layer must be last");
  }
}

ModelConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(-1, std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError(-1, "config must be a JSON object");

  ModelConfig config;
  try {
    config.name = doc.value("name", std::string{});
    config.nc = doc.at("nc").get<int>();
    const auto& size = doc.at("input_size");
    if (!size.is_array() || size.size() != 2) throw ConfigError(-1, "input_size must be [h, w]");
    config.input_h = size[0].get<int>();
    config.input_w = size[1].get<int>();
    const auto& layers = doc.at("layers");
    if (!layers.is_array()) throw ConfigError(-1, "'layers' must be an array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      const int idx = static_cast<int>(i);
      if (!l.is_object()) throw ConfigError(idx, "layer must be an object");
      LayerSpec spec;
      spec.type = l.at("type").get<std::string>();
      const auto& from = l.at("from");
      if (from.is_number_integer()) {
        spec.from.push_back(from.get<int>());
      } else {
        spec.from = from.get<std::vector<int>>();
      }
      for (const auto& arg : l.value("args", json::array())) {
        if (arg.is_boolean()) {
          spec.args.emplace_back(arg.get<bool>());
        } else if (arg.is_number_integer()) {
          spec.args.emplace_back(arg.get<std::int64_t>());
        } else if (arg.is_number_float()) {
          spec.args.emplace_back(arg.get<double>());
        } else {
          throw ConfigError(idx, "args must be numbers or booleans");
        }
      }
      config.layers.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw ConfigError(-1, std::string("malformed config: ") + e.what());
  }
  validate_config(config);
  return config;
}

std::string serialize_config(const ModelConfig& config) {
  // One layer per line keeps emitted files easy to edit by hand.
  std::string out = "{\n";
  out += "  \"name\": " + json(config.name).dump() + ",\n";
  out += "  \"nc\": " + std::to_string(config.nc) + ",\n";
  out += "  \"input_size\": [" + std::to_string(config.input_h) + ", " + std::to_string(config.input_w) + "],\n";
  out += "  \"layers\": [\n";
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const LayerSpec& l = config.layers[i];
    json args = json::array();
    for (const auto& a : l.args) args.push_back(arg_to_json(a));
    json row{{"from", l.from}, {"type", l.type}, {"args", args}};
    out += "    " + row.dump() + (i + 1 < config.layers.size() ? ",\n" : "\n");
  }
  out += "  ]\n}\n";
  return out;
}

// ModelGraph -------------------------------------------------------------------

ModelGraph build(const ModelConfig& config, std::optional<std::pair<int, int>> imgsz, const BuildOptions& options) {
  validate_config(config);
  ModelGraph g;
  g.config_ = config;
  g.options_ = options;
  if (imgsz) {
    if (imgsz->first < 1 || imgsz->second < 1) throw ConfigError(-1, "image size must be positive");
    g.config_.input_h = imgsz->first;
    g.config_.input_w = imgsz->second;
  }
  const Shape4 image = g.input_shape();

  for (int i = 0; i < static_cast<int>(config.layers.size()); ++i) {
    const LayerSpec& spec = config.layers[i];
    GraphLayer layer;
    layer.index = i;
    layer.last_use = i;
    std::vector<Shape4> in;
    for (int f : spec.from) {
      const int src = *resolve(i, f);
      layer.inputs.push_back(src);
      if (src < 0) {
        in.push_back(image);
        continue;
      }
      GraphLayer& producer = g.layers_[src];
      if (producer.output_shapes.size() != 1) throw ConfigError(i, "cannot consume the Detect output");
      in.push_back(producer.output_shapes.front());
      producer.last_use = i;
    }
    try {
      layer.block = make_block(i, spec, in, config.nc, options);
      layer.output_shapes = layer.block->output_shapes(in);
      layer.flops = layer.block->flops(in);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(i, spec.type + ": " + e.what());
    }
    layer.params = layer.block->param_count();
    g.total_params_ += layer.params;
    g.total_flops_ += layer.flops;
    if (spec.type == "Detect") g.detect_inputs_ = in;
    g.layers_.push_back(std::move(layer));
  }
  return g;
}

const DetectHead& ModelGraph::detect() const { return static_cast<const DetectHead&>(*layers_.back().block); }

std::vector<ParamSpec> ModelGraph::param_specs() const {
  std::vector<ParamSpec> out;
  for (const auto& l : layers_) l.block->collect_params(out);
  return out;
}

std::vector<int> ModelGraph::strides() const {
  std::vector<int> out;
  for (const auto& s : detect_inputs_) out.push_back(static_cast<int>(config_.input_h / s.h));
  return out;
}

template <class Ctx>
std::vector<typename Ctx::Value> ModelGraph::run(Ctx& ctx, const typename Ctx::Value& image,
                                                 const LayerObserver& observer) const {
  using Value = typename Ctx::Value;
  const Shape4 got = ctx.shape_of(image);
  const Shape4 want = input_shape();
  if (got.c != 3 || got.h != want.h || got.w != want.w) {
    throw ShapeError("image has shape " + got.str() + ", graph expects (n, 3, " + std::to_string(want.h) + ", " +
                     std::to_string(want.w) + ")");
  }
  std::vector<std::optional<Value>> outputs(layers_.size());
  std::vector<Value> args;
  std::vector<Shape4> shapes;
  for (const auto& layer : layers_) {
    args.clear();
    for (int src : layer.inputs) args.push_back(src < 0 ? image : *outputs[src]);
    auto produced = layer.block->forward(ctx, std::span<const Value>(args));
    if (observer) {
      shapes.clear();
      for (const auto& v : produced) shapes.push_back(ctx.shape_of(v));
      observer(layer.index, shapes);
    }
    if (&layer == &layers_.back()) return produced;
    outputs[layer.index] = std::move(produced.front());
    for (int src : layer.inputs) {
      if (src >= 0 && layers_[src].last_use == layer.index) outputs[src].reset();
    }
  }
  return {};
}

std::vector<Tensor> ModelGraph::forward(const WeightStore& store, const Tensor& image, const LayerObserver& observer,
                                        std::set<std::string>* reads) const {
  EvalContext<float> ctx(store, reads);
  return run(ctx, image, observer);
}

std::vector<TensorD> ModelGraph::forward(const WeightStore& store, const TensorD& image,
                                         const LayerObserver& observer) const {
  EvalContext<double> ctx(store);
  return run(ctx, image, observer);
}

std::vector<Var> ModelGraph::forward(Tape& tape, const Var& image) const { return run(tape, image, {}); }

}  // namespace y4k
