// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data
// error, 3 internal error.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace y4k::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

/// `args` excludes the program name.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace y4k::cli
