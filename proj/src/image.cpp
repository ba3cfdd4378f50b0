// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>

#include "y4k/error.hpp"

namespace y4k {

namespace {

std::string slurp(const std::filesystem::path& path, std::size_t limit = std::string::npos) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open image '" + path.string() + "'");
  if (limit == std::string::npos) return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  std::string buf(limit, '\0');
  f.read(buf.data(), static_cast<std::streamsize>(limit));
  buf.resize(static_cast<std::size_t>(f.gcount()));
  return buf;
}

// Netpbm header tokenizer: whitespace separated, '#' comments to end of line.
class PnmHeader {
 public:
  explicit PnmHeader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view magic() {
    if (bytes_.size() < 2) throw DataError("not a PPM file");
    pos_ = 2;
    return bytes_.substr(0, 2);
  }

  long number() {
    skip();
    long v = 0;
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1 << 24) throw DataError("PPM header value too large");
    }
    if (pos_ == start) throw DataError("malformed PPM header");
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw DataError("malformed PPM header");
    }
    return pos_ + 1;
  }

 private:
  void skip() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t be32(std::string_view b, std::size_t at) {
  return (std::uint32_t{static_cast<unsigned char>(b[at])} << 24) |
         (std::uint32_t{static_cast<unsigned char>(b[at + 1])} << 16) |
         (std::uint32_t{static_cast<unsigned char>(b[at + 2])} << 8) | std::uint32_t{static_cast<unsigned char>(b[at + 3])};
}

}  // namespace

Image parse_ppm(std::string_view bytes) {
  PnmHeader h(bytes);
  if (h.magic() != "P6") throw DataError("only binary PPM (P6) images are supported");
  const long w = h.number();
  const long ht = h.number();
  const long maxval = h.number();
  if (w < 1 || ht < 1) throw DataError("PPM image is empty");
  if (maxval != 255) throw DataError("PPM maxval must be 255, got " + std::to_string(maxval));
  const std::size_t start = h.raster_start();
  Image img(static_cast<int>(w), static_cast<int>(ht));
  if (bytes.size() - start < img.rgb.size()) throw DataError("PPM raster truncated");
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), img.rgb.size(), img.rgb.begin());
  return img;
}

std::string encode_ppm(const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(image.rgb.begin(), image.rgb.end());
  return out;
}

Image read_ppm(const std::filesystem::path& path) {
  try {
    return parse_ppm(slurp(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  const std::string bytes = encode_ppm(image);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("cannot write '" + path.string() + "'");
}

ImageSize read_image_size(const std::filesystem::path& path) {
  const std::string head = slurp(path, 4096);
  static constexpr std::string_view kPng = "\x89PNG\r\n\x1a\n";
  if (head.size() >= 24 && std::string_view(head).substr(0, 8) == kPng && head.compare(12, 4, "IHDR") == 0) {
    return {static_cast<int>(be32(head, 16)), static_cast<int>(be32(head, 20))};
  }
  if (head.size() >= 2 && head[0] == 'P' && (head[1] == '6' || head[1] == '3')) {
    PnmHeader h(head);
    h.magic();
    const long w = h.number();
    const long ht = h.number();
    return {static_cast<int>(w), static_cast<int>(ht)};
  }
  throw DataError("'" + path.string() + "': unsupported image format (expected PPM or PNG)");
}

}  // namespace y4k
