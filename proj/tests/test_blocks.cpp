// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "y4k/blocks.hpp"
#include "y4k/context.hpp"
#include "y4k/error.hpp"
#include "y4k/gradcheck.hpp"

namespace {

using namespace y4k;

// Conv + BN + SiLU evaluated with the naive oracles, reading `name.*` from
// the store.
TensorD conv_bn_silu(const WeightStore& s, const std::string& name, const TensorD& x, int k) {
  const TensorD w = s.at(name + ".weight").cast<double>();
  const int p = k / 2;
  TensorD y = oracle::conv2d<double>(x, w, {}, 1, 1, p, p, p, p, 1);
  const auto g = s.at(name + ".bn.gamma"), b = s.at(name + ".bn.beta");
  const auto m = s.at(name + ".bn.running_mean"), v = s.at(name + ".bn.running_var");
  const std::int64_t plane = y.shape().plane();
  for (std::int64_t c = 0; c < y.shape().c; ++c) {
    for (std::int64_t i = 0; i < plane; ++i) {
      double& e = y[c * plane + i];
      e = g[c] * (e - m[c]) / std::sqrt(static_cast<double>(v[c]) + 1e-3) + b[c];
      e = e / (1.0 + std::exp(-e));
    }
  }
  return y;
}

TEST(BlockParams, HandCounts) {
  EXPECT_EQ(ConvBlock("c", ConvSpec{16, 32, 3}).param_count(), 9 * 16 * 32 + 64);
  EXPECT_EQ(GhostConvBlock("g", 16, 32).param_count(), 256 + 32 + 400 + 32);
  EXPECT_EQ(ConvBlock("b", ConvSpec{1, 1, 1, 1, 1, Activation::kIdentity, false, true}).param_count(), 2);
}

TEST(BlockParams, BnStatisticsAreBuffersNotParameters) {
  const ConvBlock c("c", ConvSpec{4, 8, 1});
  std::int64_t all = 0;
  for (const auto& p : c.params()) all += p.shape.numel();
  EXPECT_EQ(all, 4 * 8 + 4 * 8);
  EXPECT_EQ(c.param_count(), 4 * 8 + 2 * 8);
}

TEST(BlockFlops, HandCounts) {
  EXPECT_EQ(ConvBlock("c", ConvSpec{16, 32, 1}).flops_for({1, 16, 8, 8}), 2 * 16 * 32 * 64);
  EXPECT_EQ(ConvBlock("c", ConvSpec{16, 32, 1}).flops_for({1, 16, 8, 8}), 65536);
  EXPECT_EQ(GhostConvBlock("g", 16, 32).flops_for({1, 16, 8, 8}), 32768 + 51200);
}

TEST(BlockFlops, DoublingExtentQuadruplesConvFlops) {
  const std::vector<std::unique_ptr<Block>> blocks = [] {
    std::vector<std::unique_ptr<Block>> v;
    v.push_back(std::make_unique<ConvBlock>("c", ConvSpec{8, 16, 3, 2}));
    v.push_back(std::make_unique<GhostConvBlock>("g", 8, 16, 3, 1));
    v.push_back(std::make_unique<C3k2Block>("k", 8, 16, 2));
    v.push_back(std::make_unique<SPPFBlock>("s", 8, 8));
    v.push_back(std::make_unique<C3GhostBlock>("h", 8, 8, 1));
    return v;
  }();
  for (const auto& b : blocks) {
    EXPECT_EQ(b->flops_for({1, 8, 32, 32}), 4 * b->flops_for({1, 8, 16, 16})) << b->type();
  }
}

TEST(BlockShapes, ZeroChannelInputIsAnError) {
  EXPECT_THROW(ConvBlock("c", ConvSpec{16, 32, 1}).flops_for({1, 0, 8, 8}), ShapeError);
  EXPECT_THROW(GhostConvBlock("g", 16, 32).output_shape({1, 0, 8, 8}), ShapeError);
  EXPECT_THROW(SPPFBlock("s", 16, 16).output_shape({1, 0, 8, 8}), ShapeError);
}

TEST(BlockShapes, ErrorsNameTheBlock) {
  try {
    C3k2Block("layers.7", 32, 32).output_shape({1, 16, 8, 8});
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("layers.7"), std::string::npos);
  }
}

TEST(GhostConv, FirstHalfIsPrimaryConv) {
  SplitMix64 rng(20);
  const GhostConvBlock g("g", 16, 32);
  const WeightStore store = oracle::random_store(g.params(), rng);
  const Tensor x = oracle::random_tensor<float>({1, 16, 8, 8}, rng);
  EvalContext<float> ctx(store);
  const Tensor y = g.forward_one(ctx, x);
  ASSERT_EQ(y.shape(), (Shape4{1, 32, 8, 8}));
  const Tensor primary = g.primary().forward_one(ctx, x);
  EXPECT_EQ(slice_channels<float>(y, 0, 16), primary);
}

TEST(GhostConv, CheapBranchIsDepthwiseFiveByFive) {
  const GhostConvBlock g("g", 16, 32);
  EXPECT_EQ(g.cheap().spec().kernel, 5);
  EXPECT_EQ(g.cheap().spec().groups, 16);
  EXPECT_EQ(g.primary().spec().kernel, 1);
}

TEST(GhostConv, EconomyAgainstStandardConv) {
  for (std::int64_t c : {32, 64, 128, 256}) {
    const GhostConvBlock ghost("g", c, c);
    const ConvBlock standard("s", ConvSpec{c, c, 3});
    const std::int64_t g = oracle::conv_weight_scalars(ghost);
    const std::int64_t s = oracle::conv_weight_scalars(standard);
    EXPECT_EQ(g, c * (c / 2) + (c / 2) * 25) << c;
    EXPECT_EQ(s, 9 * c * c) << c;
    EXPECT_LT(g, s / 4) << c;
  }
  EXPECT_EQ(oracle::conv_weight_scalars(GhostConvBlock("g", 64, 64)), 2848);
  EXPECT_EQ(oracle::conv_weight_scalars(ConvBlock("s", ConvSpec{64, 64, 3})), 36864);
}

TEST(Sppf, MatchesComposedOps) {
  SplitMix64 rng(21);
  const SPPFBlock sppf("s", 64, 64);
  const WeightStore store = oracle::random_store(sppf.params(), rng);
  const TensorD x = oracle::random_tensor<double>({1, 64, 20, 20}, rng);
  EvalContext<double> ctx(store);
  const TensorD y = sppf.forward_one(ctx, x);
  ASSERT_EQ(y.shape(), (Shape4{1, 64, 20, 20}));

  std::vector<TensorD> parts{conv_bn_silu(store, "s.cv1", x, 1)};
  EXPECT_EQ(parts[0].shape().c, 32);
  for (int i = 0; i < 3; ++i) parts.push_back(oracle::maxpool2d<double>(parts.back(), 5, 1, 2));
  const TensorD ref = conv_bn_silu(store, "s.cv2", concat_channels<double>(parts), 1);
  EXPECT_LE(oracle::max_rel_err(y, ref), 1e-9);
}

TEST(C3k2, TwoByTwoInnerConvsPreserveExtent) {
  const C3k2Block b("k", 32, 32, 1);
  EXPECT_EQ(b.output_shape({1, 32, 6, 6}), (Shape4{1, 32, 6, 6}));
  ASSERT_EQ(b.inner_convs().size(), 2u);
  for (const auto& conv : b.inner_convs()) {
    EXPECT_EQ(conv.spec().kernel, 2);
    EXPECT_EQ(conv.padding(), (Padding{0, 1, 0, 1}));
    EXPECT_EQ(conv.output_shape({1, 16, 6, 6}).h, 6);
  }
  EXPECT_EQ(auto_padding(2, 1), (Padding{0, 1, 0, 1}));
  EXPECT_EQ(auto_padding(3, 2), Padding::uniform(1));
  EXPECT_EQ(auto_padding(4, 4), Padding{});
}

TEST(C3k2, HandCount) {
  // cv1 32->32 (1x1), two 2x2 convs 16->16, cv2 48->32 (1x1); BN gamma+beta each.
  const std::int64_t expected = (32 * 32 + 64) + 2 * (4 * 16 * 16 + 32) + (48 * 32 + 64);
  EXPECT_EQ(C3k2Block("k", 32, 32, 1).param_count(), expected);
}

TEST(C2psa, ShapeAndHeads) {
  SplitMix64 rng(22);
  const C2PSABlock b("p", 256, 1);
  EXPECT_EQ(b.heads(), 2);
  EXPECT_EQ(b.head_dim(), 64);
  EXPECT_EQ(b.key_dim(), 32);
  EXPECT_DOUBLE_EQ(b.scale(), 1.0 / std::sqrt(32.0));
  const C2PSABlock small("q", 32, 1);
  EXPECT_EQ(small.heads(), 1);
  const WeightStore store = oracle::random_store(small.params(), rng);
  EvalContext<float> ctx(store);
  const Tensor y = small.forward_one(ctx, oracle::random_tensor<float>({1, 32, 5, 7}, rng));
  EXPECT_EQ(y.shape(), (Shape4{1, 32, 5, 7}));
}

TEST(Detect, ChannelLayout) {
  const DetectHead head("d", 1, {32, 64, 128, 256});
  EXPECT_EQ(head.output_channels(), 65);
  const std::vector<Shape4> in{{1, 32, 16, 16}, {1, 64, 8, 8}, {1, 128, 4, 4}, {1, 256, 2, 2}};
  const auto out = head.output_shapes(in);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0], (Shape4{1, 65, 16, 16}));
  EXPECT_EQ(out[3], (Shape4{1, 65, 2, 2}));
}

TEST(Blocks, FusedConvHasBiasAndNoBn) {
  BlockOptions fused;
  fused.fused = true;
  const ConvBlock c("c", ConvSpec{4, 8, 3}, fused);
  EXPECT_TRUE(c.has_bias());
  EXPECT_FALSE(c.has_batchnorm());
  EXPECT_EQ(c.param_count(), 9 * 4 * 8 + 8);
}

TEST(Blocks, TapeForwardMatchesEvaluation) {
  SplitMix64 rng(23);
  for (const auto& type : gradcheck_block_types()) {
    const auto block = make_gradcheck_block(type, 4);
    const WeightStore store = oracle::random_store(block->params(), rng);
    const TensorD x = oracle::random_tensor<double>({1, 4, 6, 6}, rng);
    EvalContext<double> ctx(store);
    const TensorD eval = block->forward_one(ctx, x);

    std::map<std::string, TensorD> params;
    for (const auto& [name, t] : store.entries()) params.emplace(name, t.cast<double>());
    Tape tape(params);
    const TensorD taped = tape.value(block->forward_one(tape, tape.input(x)));
    EXPECT_EQ(eval, taped) << type;
  }
}

TEST(Gradcheck, DifferentiableBlocksPass) {
  for (const char* type : {"Conv", "GhostConv", "C3k2", "C3Ghost", "SPPF"}) {
    const auto block = make_gradcheck_block(type, 4);
    const GradCheckResult r = gradcheck(*block);
    EXPECT_TRUE(r.passed()) << type << " max_rel_err=" << r.max_rel_err << " at " << r.worst;
    EXPECT_GT(r.checked, 144) << type;
  }
}

TEST(Gradcheck, AttentionBackwardIsUnsupported) {
  const auto block = make_gradcheck_block("C2PSA", 4);
  EXPECT_THROW(gradcheck(*block), UnsupportedOpError);
}

TEST(Gradcheck, UnknownTypeRejected) { EXPECT_THROW(make_gradcheck_block("Upsample", 4), ConfigError); }

}  // namespace
