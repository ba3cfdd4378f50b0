// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

// Weight initialization, the Y4KW container, and BN folding.
//
// Y4KW layout, little-endian:
//   "Y4KW" | u32 version (1) | u64 manifest length | manifest (UTF-8 JSON)
//   | zero padding to the next 64-byte file offset | data section
// The manifest is an array of {"name", "dtype": "f32", "shape": [n, c, h, w],
// "offset", "nbytes"}; offsets are relative to the data section start.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "y4k/graph.hpp"
#include "y4k/weight_store.hpp"

namespace y4k {

inline constexpr std::uint32_t kWeightFormatVersion = 1;

/// One SplitMix64 stream consumed in graph parameter order. Conv weights
/// and biases draw float((2u - 1) * b), b = 1 / sqrt(fan_in); BN gamma = 1,
/// beta = 0, running_mean = 0, running_var = 1.
WeightStore random_init(const ModelGraph& graph, std::uint64_t seed);

std::string serialize_weights(const WeightStore& store);
/// Throws FormatError.
WeightStore parse_weights(std::string_view bytes);

void save_weights(const WeightStore& store, const std::filesystem::path& path);
WeightStore load_weights(const std::filesystem::path& path);

/// Throws Error unless the store holds exactly the graph's weights with the
/// declared shapes.
void check_weights(const ModelGraph& graph, const WeightStore& store);

struct FoldedModel {
  ModelGraph graph;
  WeightStore store;
};

/// w' = w * gamma / sqrt(var + eps), b' = beta + (b - mean) * gamma / sqrt(var + eps).
/// The returned graph is rebuilt with BuildOptions::fused. Throws Error when
/// the store holds BN entries whose conv weight is absent.
FoldedModel fold_batchnorm(const ModelGraph& graph, const WeightStore& store);

}  // namespace y4k
