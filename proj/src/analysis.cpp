// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/analysis.hpp"

#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace y4k {

namespace {

using nlohmann::json;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string with_commas(std::int64_t v) {
  std::string digits = std::to_string(v < 0 ? -v : v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return v < 0 ? "-" + out : out;
}

std::string signed_commas(std::int64_t v) { return (v > 0 ? "+" : "") + with_commas(v); }

std::string pad(std::string s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

std::string shape_list(const std::vector<Shape4>& shapes) {
  std::string out;
  for (const auto& s : shapes) {
    if (!out.empty()) out += " ";
    out += std::to_string(s.c) + "x" + std::to_string(s.h) + "x" + std::to_string(s.w);
  }
  return out;
}

json shape_json(const Shape4& s) { return json::array({s.n, s.c, s.h, s.w}); }

json reference_json(const PublishedReference& p) {
  return {{"label", "paper-reported"}, {"params", p.params},           {"gflops", p.gflops},
          {"map50", p.map50},          {"map50_std", p.map50_std},     {"latency_ms", p.latency_ms},
          {"latency_std", p.latency_std}};
}

std::int64_t flops_at(const ModelConfig& config, const BuildOptions& options, int size) {
  return build(config, std::pair{size, size}, options).total_flops();
}

}  // namespace

std::optional<PublishedReference> published_reference(std::string_view variant) {
  static const std::map<std::string_view, PublishedReference> table{
      {"baseline", {2582542, 6.3, 0.904, 0.011, 112.3, 0.15}},
      {"p2-head", {2634248, 10.1, 0.908, 0.002, 126.6, 0.12}},
      {"p2-lightweight-bb", {4846512, 13.9, 0.867, 0.023, 102.6, 0.12}},
      {"ghostconv-all", {4224896, 12.3, 0.873, 0.012, 104.46, 0.162}},
      {"hybrid", {1149212, 7.0, 0.888, 0.021, 71.2, 0.126}},
      {"hybrid-c3ghost", {786662, 5.2, 0.847, 0.022, 61.38, 0.098}},
      {"yolo11-4k", {1377444, 2.4, 0.950, 0.007, 28.3, 0.126}},
  };
  const auto it = table.find(variant);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::string gflops_str(std::int64_t flops) { return fmt("%.1f", static_cast<double>(flops) / 1e9); }

std::optional<std::int64_t> AnalysisReport::params_delta() const {
  if (!reference) return std::nullopt;
  return total_params - reference->params;
}

std::optional<double> AnalysisReport::gflops_delta() const {
  if (!reference) return std::nullopt;
  return static_cast<double>(flops_640) / 1e9 - reference->gflops;
}

AnalysisReport analyze(const ModelGraph& graph) {
  AnalysisReport r;
  const ModelConfig& config = graph.config();
  r.model = config.name;
  r.input_h = config.input_h;
  r.input_w = config.input_w;
  for (const auto& layer : graph.layers()) {
    r.rows.push_back({layer.index, std::string(layer.block->type()), config.layers[layer.index].from,
                      layer.output_shapes, layer.params, layer.flops});
  }
  r.total_params = std::accumulate(r.rows.begin(), r.rows.end(), std::int64_t{0},
                                   [](std::int64_t acc, const LayerRow& row) { return acc + row.params; });
  r.total_flops = std::accumulate(r.rows.begin(), r.rows.end(), std::int64_t{0},
                                  [](std::int64_t acc, const LayerRow& row) { return acc + row.flops; });
  const auto square = [&](int size) {
    return r.input_h == size && r.input_w == size ? r.total_flops : flops_at(config, graph.options(), size);
  };
  r.flops_640 = square(640);
  r.flops_3840 = square(3840);
  r.detect_inputs.assign(graph.detect_input_shapes().begin(), graph.detect_input_shapes().end());
  r.strides = graph.strides();
  r.reference = published_reference(config.name);
  return r;
}

std::string format_table(const AnalysisReport& r) {
  std::ostringstream out;
  out << "model " << r.model << "  input " << r.input_h << "x" << r.input_w << "  FLOPs convention "
      << kFlopsConvention << "\n\n";
  out << pad("idx", 4, true) << "  " << pad("from", 10) << pad("type", 10) << pad("output", 22)
      << pad("params", 12, true) << pad("GFLOPs", 10, true) << "\n";
  for (const auto& row : r.rows) {
    std::string from;
    for (int f : row.from) from += (from.empty() ? "" : ",") + std::to_string(f);
    out << pad(std::to_string(row.index), 4, true) << "  " << pad(from, 10) << pad(row.type, 10)
        << pad(shape_list(row.output_shapes), 22) << pad(with_commas(row.params), 12, true)
        << pad(fmt("%.3f", row.flops / 1e9), 10, true) << "\n";
  }
  out << "\ntotal params      " << with_commas(r.total_params) << "\n";
  const bool standard_size = r.input_h == r.input_w && (r.input_h == 640 || r.input_h == 3840);
  if (!standard_size) {
    char line[64];
    std::snprintf(line, sizeof line, "GFLOPs @%-9s ", (std::to_string(r.input_h) + "x" + std::to_string(r.input_w)).c_str());
    out << line << gflops_str(r.total_flops) << "\n";
  }
  out << "GFLOPs @640x640   " << gflops_str(r.flops_640) << "\n";
  out << "GFLOPs @3840x3840 " << gflops_str(r.flops_3840) << "\n";
  out << "detect strides   ";
  for (std::size_t i = 0; i < r.strides.size(); ++i) {
    out << " " << r.strides[i] << " (" << r.detect_inputs[i].h << "x" << r.detect_inputs[i].w << ")";
  }
  out << "\n";
  if (r.reference) {
    out << "paper-reported    params " << with_commas(r.reference->params) << " (delta " << signed_commas(*r.params_delta())
        << "), GFLOPs " << fmt("%.1f", r.reference->gflops) << " (delta @640 " << fmt("%+.1f", *r.gflops_delta())
        << ")\n";
  }
  return out.str();
}

std::string to_json(const AnalysisReport& r) {
  json layers = json::array();
  for (const auto& row : r.rows) {
    json shapes = json::array();
    for (const auto& s : row.output_shapes) shapes.push_back(shape_json(s));
    layers.push_back({{"index", row.index},
                      {"from", row.from},
                      {"type", row.type},
                      {"output_shapes", shapes},
                      {"params", row.params},
                      {"flops", row.flops}});
  }
  json detect = json::array();
  for (std::size_t i = 0; i < r.detect_inputs.size(); ++i) {
    detect.push_back({{"stride", r.strides[i]}, {"shape", shape_json(r.detect_inputs[i])}});
  }
  json doc{{"model", r.model},
           {"input_size", {r.input_h, r.input_w}},
           {"flops_convention", kFlopsConvention},
           {"layers", layers},
           {"total_params", r.total_params},
           {"total_flops", r.total_flops},
           {"flops_640", r.flops_640},
           {"flops_3840", r.flops_3840},
           {"detect_scales", detect},
           {"reference", nullptr}};
  if (r.reference) {
    doc["reference"] = reference_json(*r.reference);
    doc["reference"]["params_delta"] = *r.params_delta();
    doc["reference"]["gflops_delta_640"] = *r.gflops_delta();
  }
  return doc.dump(2) + "\n";
}

std::vector<VariantRow> compare_variants(std::span<const std::string_view> names) {
  std::vector<VariantRow> rows;
  for (auto name : names) {
    const ModelConfig config = builtin_variant(name);
    const ModelGraph g640 = build(config, std::pair{640, 640});
    rows.push_back({std::string(name), g640.total_params(), g640.total_flops(), flops_at(config, {}, 3840),
                    published_reference(name)});
  }
  return rows;
}

std::string format_comparison(std::span<const VariantRow> rows) {
  std::ostringstream out;
  out << "FLOPs convention " << kFlopsConvention << "; reference columns are paper-reported\n\n";
  out << pad("variant", 19) << pad("params", 11, true) << pad("GF@640", 8, true) << pad("GF@3840", 9, true)
      << "  |" << pad("ref params", 11, true) << pad("ref GF", 8, true) << pad("ref mAP@50", 14, true)
      << pad("ref ms", 16, true) << pad("d params", 12, true) << pad("d GF", 7, true) << "\n";
  for (const auto& row : rows) {
    out << pad(row.name, 19) << pad(with_commas(row.params), 11, true) << pad(gflops_str(row.flops_640), 8, true)
        << pad(gflops_str(row.flops_3840), 9, true) << "  |";
    if (row.reference) {
      const auto& p = *row.reference;
      out << pad(with_commas(p.params), 11, true) << pad(fmt("%.1f", p.gflops), 8, true)
          << pad(fmt("%.3f", p.map50) + "±" + fmt("%.3f", p.map50_std), 15, true)
          << pad(fmt("%g", p.latency_ms) + "±" + fmt("%g", p.latency_std), 17, true)
          << pad(signed_commas(row.params - p.params), 12, true)
          << pad(fmt("%+.1f", row.flops_640 / 1e9 - p.gflops), 7, true);
    }
    out << "\n";
  }
  return out.str();
}

std::string comparison_json(std::span<const VariantRow> rows) {
  json arr = json::array();
  for (const auto& row : rows) {
    json j{{"name", row.name},
           {"params", row.params},
           {"flops_640", row.flops_640},
           {"flops_3840", row.flops_3840},
           {"reference", nullptr}};
    if (row.reference) {
      j["reference"] = reference_json(*row.reference);
      j["reference"]["params_delta"] = row.params - row.reference->params;
      j["reference"]["gflops_delta_640"] = row.flops_640 / 1e9 - row.reference->gflops;
    }
    arr.push_back(j);
  }
  return json{{"flops_convention", kFlopsConvention}, {"variants", arr}}.dump(2) + "\n";
}

}  // namespace y4k
