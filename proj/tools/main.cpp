// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "y4k/cli.hpp"

int main(int argc, char** argv) {
  return y4k::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
