// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

// Finite-difference verification of block backward passes.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "y4k/blocks.hpp"

namespace y4k {

struct GradCheckOptions {
  double eps = 1e-5;
  double tolerance = 1e-6;
  std::uint64_t seed = 7;
  Shape4 input{1, 4, 6, 6};
};

struct GradCheckResult {
  std::string block;
  std::int64_t checked = 0;    // scalars compared (input + every parameter)
  double max_rel_err = 0;
  std::string worst;           // "input[17]" or "<param>[i]"
  double tolerance = 0;
  bool passed() const noexcept { return max_rel_err < tolerance; }
};

/// Block types the harness can instantiate: Conv, GhostConv, C3k2, C3Ghost,
/// SPPF, C2PSA.
std::vector<std::string> gradcheck_block_types();

/// A small instance of `type` mapping `channels` to `channels` (stride 1).
/// Throws ConfigError for unknown types.
std::unique_ptr<Block> make_gradcheck_block(const std::string& type, std::int64_t channels);

/// Compares the tape gradient of L = sum(out * R), R a fixed random
/// projection, against central differences for every input element and
/// every parameter scalar. The relative error of one scalar is
/// |a - n| / max(|a|, |n|, 1e-3).
GradCheckResult gradcheck(const Block& block, const GradCheckOptions& options = {});

}  // namespace y4k
