// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <optional>

namespace y4k {

/// Axis-aligned box in pixels, corners (x1, y1) top-left and (x2, y2)
/// bottom-right.
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return std::max(0.0, width()) * std::max(0.0, height()); }
  Box shifted(double dx) const noexcept { return {x1 + dx, y1, x2 + dx, y2}; }

  friend bool operator==(const Box&, const Box&) = default;
};

inline double iou_plain(const Box& a, const Box& b) noexcept {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

/// Intersection over union. With `wrap_width`, b is also compared at
/// horizontal shifts of -w and +w and the largest overlap wins (ERP seam).
inline double iou(const Box& a, const Box& b, const std::optional<double>& wrap_width = std::nullopt) noexcept {
  double best = iou_plain(a, b);
  if (wrap_width) {
    best = std::max({best, iou_plain(a, b.shifted(-*wrap_width)), iou_plain(a, b.shifted(*wrap_width))});
  }
  return best;
}

}  // namespace y4k
