// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace y4k {

/// 8-bit RGB, row-major, channels interleaved.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

  bool empty() const noexcept { return width <= 0 || height <= 0; }
  std::uint8_t& at(int x, int y, int ch) { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + ch]; }
  std::uint8_t at(int x, int y, int ch) const { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + ch]; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Binary PPM (P6, maxval 255). Throws DataError.
Image parse_ppm(std::string_view bytes);
std::string encode_ppm(const Image& image);
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

struct ImageSize {
  int width;
  int height;
};

/// Dimensions from a PPM (P3/P6) or PNG header without decoding pixels.
/// Throws DataError for other formats.
ImageSize read_image_size(const std::filesystem::path& path);

}  // namespace y4k
