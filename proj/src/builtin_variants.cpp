// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

// Built-in model variants. Widths are listed per stage next to each layer;
// stride ladder comments give the output scale relative to the input.

#include <array>
#include <string>

#include "y4k/error.hpp"
#include "y4k/graph.hpp"

namespace y4k {

namespace {

ArgValue I(std::int64_t v) { return v; }

LayerSpec conv(std::int64_t c, int k = 1, int s = 1, int from = -1) { return {{from}, "Conv", {I(c), I(k), I(s)}}; }
LayerSpec ghost(std::int64_t c, int k = 1, int s = 1, int from = -1) {
  return {{from}, "GhostConv", {I(c), I(k), I(s)}};
}
LayerSpec c3k2(std::int64_t c, double e = 0.5) {
  if (e == 0.5) return {{-1}, "C3k2", {I(c)}};
  return {{-1}, "C3k2", {I(c), I(1), true, e}};
}
LayerSpec c3ghost(std::int64_t c) { return {{-1}, "C3Ghost", {I(c)}}; }
LayerSpec sppf(std::int64_t c) { return {{-1}, "SPPF", {I(c)}}; }
LayerSpec c2psa(std::int64_t c) { return {{-1}, "C2PSA", {I(c)}}; }
LayerSpec up() { return {{-1}, "Upsample", {I(2)}}; }
LayerSpec cat(int other) { return {{-1, other}, "Concat", {}}; }
LayerSpec detect(std::vector<int> from) { return {std::move(from), "Detect", {}}; }

ModelConfig model(std::string name, std::vector<LayerSpec> layers) {
  return {std::move(name), 1, 640, 640, std::move(layers)};
}

// Three-scale reference network.
ModelConfig baseline() {
  return model("baseline", {
      conv(16, 3, 2),    // 0  1/2
      conv(32, 3, 2),    // 1  1/4
      c3k2(64, 0.25),    // 2
      conv(64, 3, 2),    // 3  1/8
      c3k2(128, 0.25),   // 4  P3 tap
      conv(128, 3, 2),   // 5  1/16
      c3k2(128),         // 6  P4 tap
      conv(256, 3, 2),   // 7  1/32
      c3k2(256),         // 8
      sppf(256),         // 9
      c2psa(256),        // 10 P5 tap
      up(),              // 11
      cat(6),            // 12
      c3k2(128),         // 13
      up(),              // 14
      cat(4),            // 15
      c3k2(64),          // 16 P3 out
      conv(64, 3, 2),    // 17
      cat(13),           // 18
      c3k2(128),         // 19 P4 out
      conv(128, 3, 2),   // 20
      cat(10),           // 21
      c3k2(256),         // 22 P5 out
      detect({16, 19, 22}),
  });
}

// Baseline plus a P2 branch: upsample the P3 output, fuse with the 1/4
// backbone map, then re-descend through P3-P5.
ModelConfig p2_head() {
  ModelConfig m = baseline();
  m.name = "p2-head";
  m.layers.resize(17);
  const std::vector<LayerSpec> tail{
      up(),             // 17
      cat(2),           // 18
      c3k2(32),         // 19 P2 out (1/4)
      conv(32, 3, 2),   // 20
      cat(16),          // 21
      c3k2(64),         // 22 P3 out
      conv(64, 3, 2),   // 23
      cat(13),          // 24
      c3k2(128),        // 25 P4 out
      conv(128, 3, 2),  // 26
      cat(10),          // 27
      c3k2(256),        // 28 P5 out
      detect({19, 22, 25, 28}),
  };
  m.layers.insert(m.layers.end(), tail.begin(), tail.end());
  return m;
}

// P2 head on a re-shaped backbone: narrow early C3k2 stages, 1x1
// compressions before each downsample, wider deep stages.
std::vector<LayerSpec> lightweight_backbone(bool ghost_only) {
  auto down = [&](std::int64_t c) { return ghost_only ? ghost(c, 3, 2) : conv(c, 3, 2); };
  auto squeeze = [&](std::int64_t c) { return ghost_only ? ghost(c) : conv(c); };
  return {
      down(16),         // 0  1/2
      down(32),         // 1  1/4
      c3k2(48, 0.25),   // 2  P2 tap
      squeeze(32),      // 3
      down(96),         // 4  1/8
      c3k2(96, 0.25),   // 5  P3 tap
      squeeze(64),      // 6
      down(192),        // 7  1/16
      c3k2(192),        // 8  P4 tap
      squeeze(128),     // 9
      down(384),        // 10 1/32
      c3k2(384),        // 11
      sppf(384),        // 12
      c2psa(384),       // 13 P5 tap
  };
}

std::vector<LayerSpec> wide_p2_head() {
  return {
      up(),             // 14
      cat(8),           // 15
      c3k2(192),        // 16
      up(),             // 17
      cat(5),           // 18
      c3k2(96),         // 19
      up(),             // 20
      cat(2),           // 21
      c3k2(48),         // 22 P2 out
      conv(48, 3, 2),   // 23
      cat(19),          // 24
      c3k2(96),         // 25 P3 out
      conv(96, 3, 2),   // 26
      cat(16),          // 27
      c3k2(192),        // 28 P4 out
      conv(192, 3, 2),  // 29
      cat(13),          // 30
      c3k2(384),        // 31 P5 out
      detect({22, 25, 28, 31}),
  };
}

ModelConfig p2_lightweight_bb() {
  auto layers = lightweight_backbone(false);
  auto head = wide_p2_head();
  layers.insert(layers.end(), head.begin(), head.end());
  return model("p2-lightweight-bb", std::move(layers));
}

// Every backbone convolution replaced by GhostConv.
ModelConfig ghostconv_all() {
  auto layers = lightweight_backbone(true);
  auto head = wide_p2_head();
  layers.insert(layers.end(), head.begin(), head.end());
  return model("ghostconv-all", std::move(layers));
}

// GhostConv at the stride-2 and stride-4 stages, standard Conv deeper,
// P2 head, slimmer deep stages.
std::vector<LayerSpec> hybrid_layers(bool ghost_bottlenecks) {
  auto block = [&](std::int64_t c, double e = 0.5) { return ghost_bottlenecks ? c3ghost(c) : c3k2(c, e); };
  return {
      ghost(16, 3, 2),  // 0  1/2
      ghost(32, 3, 2),  // 1  1/4
      block(64, 0.25),  // 2  P2 tap
      conv(64, 3, 2),   // 3  1/8
      block(96, 0.25),  // 4  P3 tap
      conv(96, 3, 2),   // 5  1/16
      block(96),        // 6  P4 tap
      conv(128, 3, 2),  // 7  1/32
      block(128),       // 8
      sppf(128),        // 9
      c2psa(128),       // 10 P5 tap
      up(),             // 11
      cat(6),           // 12
      block(96),        // 13
      up(),             // 14
      cat(4),           // 15
      block(64),        // 16
      up(),             // 17
      cat(2),           // 18
      block(32),        // 19 P2 out
      conv(32, 3, 2),   // 20
      cat(16),          // 21
      block(64),        // 22 P3 out
      conv(64, 3, 2),   // 23
      cat(13),          // 24
      block(96),        // 25 P4 out
      conv(96, 3, 2),   // 26
      cat(10),          // 27
      block(128),       // 28 P5 out
      detect({19, 22, 25, 28}),
  };
}

ModelConfig hybrid() { return model("hybrid", hybrid_layers(false)); }
ModelConfig hybrid_c3ghost() { return model("hybrid-c3ghost", hybrid_layers(true)); }

// Hybrid with kernel-stride tuning: one 4x4 stride-4 stem replaces the two
// stride-2 layers, the P2 branch taps the GhostConv at layer 1 and feeds
// Detect directly, head widths reduced.
ModelConfig yolo11_4k() {
  return model("yolo11-4k", {
      conv(16, 4, 4),          // 0  1/4 stem
      ghost(32),               // 1  1/4 P2 tap
      conv(48, 3, 2),          // 2  1/8
      c3k2(64, 0.25),          // 3  P3 tap
      conv(128, 3, 2),         // 4  1/16
      c3k2(128, 0.25),         // 5  P4 tap
      conv(224, 3, 2),         // 6  1/32
      c3k2(224),               // 7
      sppf(224),               // 8
      c2psa(224),              // 9  P5 tap
      up(),                    // 10
      cat(5),                  // 11
      c3k2(96),                // 12
      up(),                    // 13
      cat(3),                  // 14
      c3k2(48),                // 15 P3 out
      conv(48, 3, 2),          // 16
      cat(12),                 // 17
      c3k2(96),                // 18 P4 out
      conv(96, 3, 2),          // 19
      cat(9),                  // 20
      c3k2(192),               // 21 P5 out
      ghost(32, 1, 1, 1),      // 22 P2 branch from layer 1
      c3k2(32, 0.25),          // 23 P2 out
      {{23, 15, 18, 21}, "Detect", {I(16), I(16), I(32)}},  // box/cls hidden 16/32
  });
}

constexpr std::array<std::string_view, 7> kNames{
    "baseline", "p2-head", "p2-lightweight-bb", "ghostconv-all", "hybrid", "hybrid-c3ghost", "yolo11-4k",
};

}  // namespace

std::span<const std::string_view> builtin_variant_names() { return kNames; }

ModelConfig builtin_variant(std::string_view name) {
  if (name == "baseline") return baseline();
  if (name == "p2-head") return p2_head();
  if (name == "p2-lightweight-bb") return p2_lightweight_bb();
  if (name == "ghostconv-all") return ghostconv_all();
  if (name == "hybrid") return hybrid();
  if (name == "hybrid-c3ghost") return hybrid_c3ghost();
  if (name == "yolo11-4k") return yolo11_4k();
  std::string valid;
  for (auto n : kNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
  throw ConfigError(-1, "unknown variant '" + std::string(name) + "' (valid: " + valid + ")");
}

}  // namespace y4k
