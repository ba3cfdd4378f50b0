// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/weights.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "y4k/error.hpp"
#include "y4k/rng.hpp"

namespace y4k {

namespace {

using nlohmann::json;
using Kind = FormatError::Kind;

constexpr std::string_view kMagic = "Y4KW";
constexpr std::size_t kHeaderSize = 16;
constexpr std::size_t kAlign = 64;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint64_t get_le(std::string_view bytes, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= std::uint64_t{static_cast<unsigned char>(bytes[at + i])} << (8 * i);
  return v;
}

std::size_t align_up(std::size_t v) { return (v + kAlign - 1) / kAlign * kAlign; }

std::string prefix_of(const std::string& name, std::string_view suffix) {
  return name.substr(0, name.size() - suffix.size());
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

WeightStore random_init(const ModelGraph& graph, std::uint64_t seed) {
  SplitMix64 rng(seed);
  WeightStore store;
  for (const ParamSpec& p : graph.param_specs()) {
    Tensor t(p.shape);
    switch (p.role) {
      case ParamRole::kConvWeight:
      case ParamRole::kConvBias: {
        const double bound = 1.0 / std::sqrt(static_cast<double>(p.fan_in));
        for (auto& v : t.data()) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * bound);
        break;
      }
      case ParamRole::kBnGamma:
      case ParamRole::kBnVar:
        t = Tensor(p.shape, 1.0f);
        break;
      case ParamRole::kBnBeta:
      case ParamRole::kBnMean:
        break;
    }
    store.insert(p.name, std::move(t));
  }
  return store;
}

std::string serialize_weights(const WeightStore& store) {
  json manifest = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : store.entries()) {
    const Shape4& s = t.shape();
    const std::uint64_t nbytes = static_cast<std::uint64_t>(t.numel()) * 4;
    manifest.push_back({{"name", name},
                        {"dtype", "f32"},
                        {"shape", {s.n, s.c, s.h, s.w}},
                        {"offset", offset},
                        {"nbytes", nbytes}});
    offset += nbytes;
  }
  const std::string text = manifest.dump();

  std::string out(kMagic);
  put_u32(out, kWeightFormatVersion);
  put_u64(out, text.size());
  out += text;
  out.resize(align_up(out.size()), '\0');
  out.reserve(out.size() + offset);
  for (const auto& [name, t] : store.entries()) {
    for (float v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

WeightStore parse_weights(std::string_view bytes) {
  if (bytes.size() < kMagic.size()) throw FormatError(Kind::kTruncated, "weight file shorter than its magic");
  if (bytes.substr(0, 4) != kMagic) throw FormatError(Kind::kBadMagic, "bad magic, expected \"Y4KW\"");
  if (bytes.size() < kHeaderSize) throw FormatError(Kind::kTruncated, "weight file header truncated");
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  if (version != kWeightFormatVersion) {
    throw FormatError(Kind::kUnsupportedVersion, "unsupported weight format version " + std::to_string(version));
  }
  const std::uint64_t manifest_len = get_le(bytes, 8, 8);
  if (manifest_len > bytes.size() - kHeaderSize) throw FormatError(Kind::kTruncated, "manifest truncated");
  const std::size_t data_start = align_up(kHeaderSize + manifest_len);
  if (data_start > bytes.size()) throw FormatError(Kind::kTruncated, "data section missing");
  const std::string_view data = bytes.substr(data_start);

  json manifest;
  try {
    manifest = json::parse(bytes.substr(kHeaderSize, manifest_len));
  } catch (const json::parse_error& e) {
    throw FormatError(Kind::kBadManifest, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.is_array()) throw FormatError(Kind::kBadManifest, "manifest must be a JSON array");

  WeightStore store;
  for (const auto& entry : manifest) {
    std::string name;
    std::vector<std::int64_t> dims;
    std::uint64_t offset = 0;
    std::uint64_t nbytes = 0;
    try {
      name = entry.at("name").get<std::string>();
      if (entry.at("dtype").get<std::string>() != "f32") {
        throw FormatError(Kind::kBadManifest, "tensor '" + name + "' has unsupported dtype");
      }
      dims = entry.at("shape").get<std::vector<std::int64_t>>();
      offset = entry.at("offset").get<std::uint64_t>();
      nbytes = entry.at("nbytes").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw FormatError(Kind::kBadManifest, std::string("malformed manifest entry: ") + e.what());
    }
    if (dims.size() != 4 || std::any_of(dims.begin(), dims.end(), [](std::int64_t d) { return d < 0; })) {
      throw FormatError(Kind::kBadManifest, "tensor '" + name + "' needs a 4-D non-negative shape");
    }
    const Shape4 shape{dims[0], dims[1], dims[2], dims[3]};
    if (static_cast<std::uint64_t>(shape.numel()) * 4 != nbytes) {
      throw FormatError(Kind::kInconsistent, "tensor '" + name + "': shape " + shape.str() + " disagrees with nbytes " +
                                                 std::to_string(nbytes));
    }
    if (offset > data.size() || nbytes > data.size() - offset) {
      throw FormatError(Kind::kTruncated, "tensor '" + name + "' extends past the end of the file");
    }
    if (store.contains(name)) throw FormatError(Kind::kInconsistent, "duplicate tensor '" + name + "'");
    std::vector<float> values(static_cast<std::size_t>(shape.numel()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(data, offset + 4 * i, 4)));
    }
    store.insert(name, Tensor(shape, std::move(values)));
  }
  return store;
}

void save_weights(const WeightStore& store, const std::filesystem::path& path) {
  const std::string bytes = serialize_weights(store);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError(Kind::kIo, "cannot open '" + path.string() + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError(Kind::kIo, "write to '" + path.string() + "' failed");
}

WeightStore load_weights(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError(Kind::kIo, "cannot open '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_weights(bytes);
}

void check_weights(const ModelGraph& graph, const WeightStore& store) {
  const auto specs = graph.param_specs();
  for (const ParamSpec& p : specs) {
    const Tensor* t = store.find(p.name);
    if (t == nullptr) throw MissingWeightError("missing weight '" + p.name + "'");
    if (t->shape() != p.shape) {
      throw ShapeError("weight '" + p.name + "' has shape " + t->shape().str() + ", expected " + p.shape.str());
    }
  }
  if (store.size() != specs.size()) {
    throw Error("weight store has " + std::to_string(store.size()) + " tensors, model expects " +
                std::to_string(specs.size()));
  }
}

FoldedModel fold_batchnorm(const ModelGraph& graph, const WeightStore& store) {
  // Every BN group must sit on a conv that is present in the store.
  for (const auto& [name, t] : store.entries()) {
    for (std::string_view suffix : {".bn.gamma", ".bn.beta", ".bn.running_mean", ".bn.running_var"}) {
      if (ends_with(name, suffix) && !store.contains(prefix_of(name, suffix) + ".weight")) {
        throw Error("BN entry '" + name + "' has no preceding conv weight");
      }
    }
  }

  BuildOptions options = graph.options();
  options.fused = true;
  const ModelConfig& config = graph.config();
  FoldedModel out{build(config, std::pair{config.input_h, config.input_w}, options), {}};
  const double eps = graph.options().bn_eps;

  for (const ParamSpec& p : out.graph.param_specs()) {
    if (p.role == ParamRole::kConvWeight) {
      const std::string conv = prefix_of(p.name, ".weight");
      const Tensor& w = store.at(p.name);
      if (!store.contains(conv + ".bn.gamma")) {
        out.store.insert(p.name, w);
        continue;
      }
      const Tensor& gamma = store.at(conv + ".bn.gamma");
      const Tensor& var = store.at(conv + ".bn.running_var");
      Tensor folded = w;
      const std::int64_t per_out = w.numel() / w.shape().n;
      for (std::int64_t o = 0; o < w.shape().n; ++o) {
        const double k = gamma[o] / std::sqrt(static_cast<double>(var[o]) + eps);
        for (std::int64_t i = 0; i < per_out; ++i) {
          folded[o * per_out + i] = static_cast<float>(w[o * per_out + i] * k);
        }
      }
      out.store.insert(p.name, std::move(folded));
    } else if (p.role == ParamRole::kConvBias) {
      const std::string conv = prefix_of(p.name, ".bias");
      if (!store.contains(conv + ".bn.gamma")) {
        out.store.insert(p.name, store.at(p.name));
        continue;
      }
      const Tensor& gamma = store.at(conv + ".bn.gamma");
      const Tensor& beta = store.at(conv + ".bn.beta");
      const Tensor& mean = store.at(conv + ".bn.running_mean");
      const Tensor& var = store.at(conv + ".bn.running_var");
      const Tensor* bias = store.find(p.name);
      Tensor b(p.shape);
      for (std::int64_t o = 0; o < p.shape.numel(); ++o) {
        const double k = gamma[o] / std::sqrt(static_cast<double>(var[o]) + eps);
        const double b0 = bias != nullptr ? (*bias)[o] : 0.0;
        b[o] = static_cast<float>(beta[o] + (b0 - mean[o]) * k);
      }
      out.store.insert(p.name, std::move(b));
    } else {
      throw Error("fused graph still declares BN parameter '" + p.name + "'");
    }
  }
  return out;
}

}  // namespace y4k
