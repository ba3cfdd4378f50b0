// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "y4k/graph.hpp"

namespace y4k {

inline constexpr std::string_view kFlopsConvention = "2*MAC";

/// Published ablation numbers for a built-in variant. Transcribed, never
/// computed; reports label them "paper-reported".
struct PublishedReference {
  std::int64_t params;
  double gflops;
  double map50;
  double map50_std;
  double latency_ms;
  double latency_std;
};

std::optional<PublishedReference> published_reference(std::string_view variant);

struct LayerRow {
  int index;
  std::string type;
  std::vector<int> from;
  std::vector<Shape4> output_shapes;
  std::int64_t params;
  std::int64_t flops;
};

struct AnalysisReport {
  std::string model;
  int input_h = 0;
  int input_w = 0;
  std::vector<LayerRow> rows;
  std::int64_t total_params = 0;
  std::int64_t total_flops = 0;  // at input_h x input_w
  std::int64_t flops_640 = 0;
  std::int64_t flops_3840 = 0;
  std::vector<Shape4> detect_inputs;
  std::vector<int> strides;
  std::optional<PublishedReference> reference;

  /// Computed minus reference. Empty without a reference.
  std::optional<std::int64_t> params_delta() const;
  std::optional<double> gflops_delta() const;  // uses the 640x640 figure
};

AnalysisReport analyze(const ModelGraph& graph);

std::string format_table(const AnalysisReport& report);
std::string to_json(const AnalysisReport& report);

struct VariantRow {
  std::string name;
  std::int64_t params;
  std::int64_t flops_640;
  std::int64_t flops_3840;
  std::optional<PublishedReference> reference;
};

/// Throws ConfigError on an unknown name.
std::vector<VariantRow> compare_variants(std::span<const std::string_view> names);
std::string format_comparison(std::span<const VariantRow> rows);
std::string comparison_json(std::span<const VariantRow> rows);

/// "%.1f" of flops / 1e9.
std::string gflops_str(std::int64_t flops);

}  // namespace y4k
