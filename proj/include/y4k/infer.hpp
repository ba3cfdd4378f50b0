// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

// Image to detections: letterbox, forward, distribution decode, NMS.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "y4k/box.hpp"
#include "y4k/graph.hpp"
#include "y4k/image.hpp"
#include "y4k/weight_store.hpp"

namespace y4k {

/// Maps network-input coordinates back to the source image. Padding is
/// always bottom/right, so the inverse is a pure scale.
struct LetterboxTransform {
  double scale = 1.0;
  int src_w = 0, src_h = 0;
  int dst_w = 0, dst_h = 0;
  int resized_w = 0, resized_h = 0;

  bool identity() const noexcept { return scale == 1.0 && src_w == dst_w && src_h == dst_h; }
  /// Divides by scale; clamps x and/or y to the source bounds.
  Box to_source(const Box& b, bool clamp_x = true, bool clamp_y = true) const noexcept;
};

struct Preprocessed {
  Tensor tensor;  // (1, 3, H, W), values in [0, 1]
  LetterboxTransform transform;
};

/// Aspect-preserving bilinear resize by min(H/h, W/w), zero padding on the
/// bottom and right. H and W must be multiples of `stride`.
Preprocessed preprocess(const Image& image, int target_h, int target_w, int stride = 32);

struct Detection {
  int class_id = 0;
  double confidence = 0;
  Box box;
  /// Box crosses the ERP seam: x1 > x2, the box spans [x1, W) and [0, x2].
  bool wrapped = false;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct InferConfig {
  double conf_threshold = 0.25;
  double iou_threshold = 0.45;
  bool wrap_seam = false;
  int max_detections = 300;
};

struct DecodeOptions {
  double conf_threshold = 0.25;
  bool clamp = true;
  /// Keep horizontal coordinates unclamped so boxes may cross the seam.
  bool wrap_seam = false;
};

/// Raw per-scale head maps (n = 1) to source-image boxes. Cells whose best
/// class confidence falls below the threshold are dropped, as are boxes
/// that are empty after clamping.
std::vector<Detection> decode(std::span<const Tensor> raw, std::span<const int> strides, int reg_max, int nc,
                              const LetterboxTransform& transform, const DecodeOptions& options = {});

/// Class-aware greedy NMS. Ordering is (confidence desc, x1, y1, class, x2,
/// y2, input position). With cfg.wrap_seam, IoU also considers shifts of
/// +-image_width.
std::vector<Detection> nms(std::span<const Detection> boxes, const InferConfig& cfg, double image_width = 0);

/// Total order used by nms: true when a ranks before b.
bool nms_before(const Detection& a, const Detection& b) noexcept;

/// Folds seam-crossing boxes into [0, width): x1 < 0 or x2 > width become
/// wrapped boxes with x1 > x2.
Detection wrap_normalize(Detection d, double width) noexcept;

struct StageTiming {
  double preprocess_ms = 0;
  double forward_ms = 0;
  double decode_ms = 0;
  double nms_ms = 0;
};

struct DetectResult {
  std::vector<Detection> detections;
  StageTiming timing;
};

DetectResult detect_image(const ModelGraph& graph, const WeightStore& store, const Image& image,
                          const InferConfig& cfg = {});

/// {"detections": [...]} only; stable for equality checks.
std::string detections_json(std::span<const Detection> detections);
/// Full record with "image", "detections" and "timing_ms".
std::string detect_result_json(const DetectResult& result, const std::string& image_name);

/// Inverse of detect_result_json's "detections" (accepts a bare array too).
std::vector<Detection> parse_detections(std::string_view json_text);

}  // namespace y4k
