// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "y4k/error.hpp"
#include "y4k/graph.hpp"
#include "y4k/weights.hpp"

namespace {

using namespace y4k;

std::vector<std::int64_t> detect_sides(const ModelGraph& g) {
  std::vector<std::int64_t> out;
  for (const auto& s : g.detect_input_shapes()) {
    EXPECT_EQ(s.h, s.w);
    out.push_back(s.h);
  }
  return out;
}

ModelConfig tiny_config() {
  return parse_config(R"({"name": "tiny", "nc": 2, "input_size": [32, 32], "layers": [
    {"from": -1, "type": "Conv", "args": [8, 3, 2]},
    {"from": -1, "type": "Conv", "args": [16, 3, 2]},
    {"from": -1, "type": "C3k2", "args": [16, 1, true, 0.5]},
    {"from": [-1], "type": "Detect", "args": [4]}
  ]})");
}

TEST(Config, BuiltinsRoundTrip) {
  for (auto name : builtin_variant_names()) {
    const ModelConfig c = builtin_variant(name);
    EXPECT_EQ(parse_config(serialize_config(c)), c) << name;
  }
}

TEST(Config, ForwardReferenceRejected) {
  ModelConfig c = tiny_config();
  c.layers.insert(c.layers.begin() + 3, LayerSpec{{5}, "Conv", {std::int64_t{16}}});
  try {
    validate_config(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.layer(), 3);
  }
}

TEST(Config, MissingDetectRejected) {
  ModelConfig c = tiny_config();
  c.layers.pop_back();
  EXPECT_THROW(validate_config(c), ConfigError);
}

TEST(Config, ParseErrorsAreConfigErrors) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config(R"({"name": "x", "layers": [{"from": -1, "type": "Nope", "args": []}]})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"name": "x", "layers": [{"from": -1, "type": "Conv", "args": ["a"]}]})"),
               ConfigError);
}

TEST(Config, UnknownBuiltinListsChoices) {
  try {
    builtin_variant("yolo99");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("yolo11-4k"), std::string::npos);
  }
}

TEST(Variants, BaselineHasThreeScalesAndP2HeadExtendsIt) {
  const ModelConfig base = builtin_variant("baseline");
  const ModelConfig p2 = builtin_variant("p2-head");
  const ModelGraph gb = build(base), gp = build(p2);
  EXPECT_EQ(gb.detect_input_shapes().size(), 3u);
  EXPECT_EQ(gp.detect_input_shapes().size(), 4u);
  // Shared trunk up to the P3 output; everything after it is P2 branch or
  // fusion layers.
  const std::size_t p3 = 16;
  for (std::size_t i = 0; i <= p3; ++i) EXPECT_EQ(p2.layers[i], base.layers[i]) << "layer " << i;
  for (std::size_t i = p3 + 1; i + 1 < p2.layers.size(); ++i) {
    const std::string& t = p2.layers[i].type;
    EXPECT_TRUE(t == "Upsample" || t == "Concat" || t == "C3k2" || t == "Conv") << t;
  }
  EXPECT_GT(p2.layers.size(), base.layers.size());
}

TEST(Variants, GhostconvAllHasNoStandardConvInBackbone) {
  const ModelConfig c = builtin_variant("ghostconv-all");
  for (const auto& layer : c.layers) {
    if (layer.type == "Upsample") break;
    EXPECT_NE(layer.type, "Conv");
  }
}

TEST(Variants, Yolo4kUsesStrideFourStem) {
  const ModelConfig c = builtin_variant("yolo11-4k");
  EXPECT_EQ(c.layers[0].type, "Conv");
  EXPECT_EQ(std::get<std::int64_t>(c.layers[0].args[1]), 4);
  EXPECT_EQ(std::get<std::int64_t>(c.layers[0].args[2]), 4);
}

TEST(Variants, TableDirections) {
  const auto params = [](const char* n) { return build(builtin_variant(n)).total_params(); };
  const auto flops = [](const char* n) { return build(builtin_variant(n), std::pair{640, 640}).total_flops(); };
  EXPECT_GT(params("p2-head"), params("baseline"));
  EXPECT_GT(flops("p2-head"), flops("baseline"));
  EXPECT_LT(params("yolo11-4k"), params("baseline"));
  EXPECT_LT(flops("yolo11-4k"), flops("baseline"));
  EXPECT_GT(params("yolo11-4k"), params("hybrid"));
  EXPECT_LT(flops("yolo11-4k"), flops("hybrid"));
}

TEST(Build, StrideLadderAt3840) {
  EXPECT_EQ(detect_sides(build(builtin_variant("yolo11-4k"), std::pair{3840, 3840})),
            (std::vector<std::int64_t>{960, 480, 240, 120}));
  EXPECT_EQ(detect_sides(build(builtin_variant("baseline"), std::pair{3840, 3840})),
            (std::vector<std::int64_t>{480, 240, 120}));
}

TEST(Build, ToyInputKeepsLadder) {
  const ModelGraph g = build(builtin_variant("yolo11-4k"), std::pair{64, 64});
  EXPECT_EQ(detect_sides(g), (std::vector<std::int64_t>{16, 8, 4, 2}));
  EXPECT_EQ(g.strides(), (std::vector<int>{4, 8, 16, 32}));
}

TEST(Build, P2InputIsTwiceP3) {
  for (const char* name : {"p2-head", "p2-lightweight-bb", "ghostconv-all", "hybrid", "hybrid-c3ghost", "yolo11-4k"}) {
    const ModelGraph g = build(builtin_variant(name), std::pair{256, 256});
    const auto s = g.detect_input_shapes();
    ASSERT_GE(s.size(), 2u) << name;
    EXPECT_EQ(s[0].h, 2 * s[1].h) << name;
    EXPECT_EQ(s[0].w, 2 * s[1].w) << name;
  }
}

TEST(Build, HeadChannels) {
  const ModelGraph g = build(builtin_variant("yolo11-4k"), std::pair{64, 64});
  for (const auto& s : g.head_output_shapes()) EXPECT_EQ(s.c, 65);
}

TEST(Build, ErrorsNameTheLayer) {
  ModelConfig c = tiny_config();
  c.layers[2].args[0] = std::int64_t{15};  // C3k2 output mismatch is fine, but Detect needs hidden >= 1
  c.layers.insert(c.layers.begin() + 2, LayerSpec{{-1}, "GhostConv", {std::int64_t{7}}});
  try {
    build(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.layer(), 2);
  }
}

TEST(Build, IndivisibleInputRejected) {
  EXPECT_THROW(build(builtin_variant("yolo11-4k"), std::pair{8, 8}), ConfigError);
}

TEST(Forward, ShapesMatchAnnotationsAndAreDeterministic) {
  const ModelGraph g = build(builtin_variant("yolo11-4k"), std::pair{64, 64});
  const WeightStore store = random_init(g, 0);
  SplitMix64 rng(30);
  const Tensor image = oracle::random_tensor<float>(g.input_shape(), rng, 0, 1);
  std::vector<std::vector<Shape4>> seen(g.layers().size());
  const auto a = g.forward(store, image, [&](int i, std::span<const Shape4> s) {
    seen[static_cast<std::size_t>(i)].assign(s.begin(), s.end());
  });
  for (const auto& layer : g.layers()) EXPECT_EQ(seen[static_cast<std::size_t>(layer.index)], layer.output_shapes);
  const auto b = g.forward(store, image);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    for (float v : a[i].data()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(Forward, ReadsExactlyTheDeclaredParameters) {
  const ModelGraph g = build(builtin_variant("hybrid-c3ghost"), std::pair{64, 64});
  const WeightStore store = random_init(g, 1);
  std::set<std::string> reads;
  g.forward(store, Tensor(g.input_shape(), 0.5f), {}, &reads);
  std::set<std::string> declared;
  for (const auto& p : g.param_specs()) declared.insert(p.name);
  EXPECT_EQ(reads, declared);
}

TEST(Forward, MissingWeightReported) {
  const ModelGraph g = build(tiny_config());
  WeightStore store = random_init(g, 0);
  store.erase("layers.1.weight");
  EXPECT_THROW(g.forward(store, Tensor(g.input_shape())), MissingWeightError);
}

TEST(Forward, WrongImageShapeRejected) {
  const ModelGraph g = build(tiny_config());
  EXPECT_THROW(g.forward(random_init(g, 0), Tensor({1, 3, 16, 32})), ShapeError);
}

TEST(Forward, DoubleAndTapeAgreeWithFloat) {
  const ModelGraph g = build(tiny_config());
  const WeightStore store = random_init(g, 2);
  SplitMix64 rng(31);
  const TensorD image = oracle::random_tensor<double>(g.input_shape(), rng, 0, 1);
  const auto d = g.forward(store, image);
  const auto f = g.forward(store, image.cast<float>());
  std::map<std::string, TensorD> params;
  for (const auto& [name, t] : store.entries()) params.emplace(name, t.cast<double>());
  Tape tape(params);
  const auto v = g.forward(tape, tape.input(image));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(tape.value(v[0]), d[0]);
  EXPECT_LE(oracle::max_rel_err(f[0].cast<double>(), d[0]), 1e-4);
}

}  // namespace
