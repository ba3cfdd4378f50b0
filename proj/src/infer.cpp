// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/infer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include <json.hpp>

#include "y4k/error.hpp"

namespace y4k {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

double sigmoid(double x) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

// Expectation of softmax over `bins` logits spaced `stride` apart in memory.
double expectation(const float* logits, int bins, std::int64_t stride) {
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < bins; ++i) top = std::max(top, static_cast<double>(logits[i * stride]));
  double norm = 0;
  double weighted = 0;
  for (int i = 0; i < bins; ++i) {
    const double p = std::exp(logits[i * stride] - top);
    norm += p;
    weighted += i * p;
  }
  return weighted / norm;
}

json detection_json(const Detection& d) {
  json j{{"class_id", d.class_id}, {"confidence", d.confidence}, {"box", {d.box.x1, d.box.y1, d.box.x2, d.box.y2}}};
  if (d.wrapped) j["wrapped"] = true;
  return j;
}

}  // namespace

Box LetterboxTransform::to_source(const Box& b, bool clamp_x, bool clamp_y) const noexcept {
  Box out{b.x1 / scale, b.y1 / scale, b.x2 / scale, b.y2 / scale};
  if (clamp_x) {
    out.x1 = std::clamp(out.x1, 0.0, static_cast<double>(src_w));
    out.x2 = std::clamp(out.x2, 0.0, static_cast<double>(src_w));
  }
  if (clamp_y) {
    out.y1 = std::clamp(out.y1, 0.0, static_cast<double>(src_h));
    out.y2 = std::clamp(out.y2, 0.0, static_cast<double>(src_h));
  }
  return out;
}

Preprocessed preprocess(const Image& image, int target_h, int target_w, int stride) {
  if (image.empty()) throw DataError("cannot preprocess an empty image");
  if (target_h < 1 || target_w < 1 || stride < 1 || target_h % stride != 0 || target_w % stride != 0) {
    throw ShapeError("target size " + std::to_string(target_h) + "x" + std::to_string(target_w) +
                     " must be a positive multiple of stride " + std::to_string(stride));
  }
  LetterboxTransform t;
  t.src_w = image.width;
  t.src_h = image.height;
  t.dst_w = target_w;
  t.dst_h = target_h;
  t.scale = std::min(static_cast<double>(target_h) / image.height, static_cast<double>(target_w) / image.width);
  t.resized_w = std::clamp(static_cast<int>(std::lround(image.width * t.scale)), 1, target_w);
  t.resized_h = std::clamp(static_cast<int>(std::lround(image.height * t.scale)), 1, target_h);

  Tensor out({1, 3, target_h, target_w}, 0.0f);
  const std::int64_t plane = static_cast<std::int64_t>(target_h) * target_w;
  if (t.resized_w == image.width && t.resized_h == image.height) {
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) {
        for (int ch = 0; ch < 3; ++ch) {
          out[ch * plane + static_cast<std::int64_t>(y) * target_w + x] = image.at(x, y, ch) / 255.0f;
        }
      }
    }
    return {std::move(out), t};
  }

  // Half-pixel-centre bilinear sampling.
  const double sx = static_cast<double>(image.width) / t.resized_w;
  const double sy = static_cast<double>(image.height) / t.resized_h;
  for (int y = 0; y < t.resized_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < t.resized_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = image.at(x0, y0, ch) * (1 - wx) + image.at(x1, y0, ch) * wx;
        const double bottom = image.at(x0, y1, ch) * (1 - wx) + image.at(x1, y1, ch) * wx;
        out[ch * plane + static_cast<std::int64_t>(y) * target_w + x] =
            static_cast<float>((top * (1 - wy) + bottom * wy) / 255.0);
      }
    }
  }
  return {std::move(out), t};
}

std::vector<Detection> decode(std::span<const Tensor> raw, std::span<const int> strides, int reg_max, int nc,
                              const LetterboxTransform& transform, const DecodeOptions& options) {
  if (raw.size() != strides.size()) throw ShapeError("decode: one stride per head output required");
  std::vector<Detection> out;
  const std::int64_t channels = 4LL * reg_max + nc;
  for (std::size_t s = 0; s < raw.size(); ++s) {
    const Shape4& shape = raw[s].shape();
    if (shape.c != channels) {
      throw ShapeError("decode: scale " + std::to_string(s) + " has " + std::to_string(shape.c) +
                       " channels, expected 4*reg_max+nc = " + std::to_string(channels));
    }
    if (shape.n != 1) throw ShapeError("decode: batch size must be 1");
    const double stride = strides[s];
    const std::int64_t plane = shape.plane();
    const float* base = raw[s].data().data();
    for (std::int64_t i = 0; i < shape.h; ++i) {
      for (std::int64_t j = 0; j < shape.w; ++j) {
        const float* cell = base + i * shape.w + j;
        int best = 0;
        double top = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < nc; ++c) {
          const double v = cell[(4LL * reg_max + c) * plane];
          if (v > top) {
            top = v;
            best = c;
          }
        }
        const double conf = sigmoid(top);
        if (!(conf >= options.conf_threshold) || conf <= 0.0) continue;
        double dist[4];
        for (int side = 0; side < 4; ++side) {
          dist[side] = expectation(cell + static_cast<std::int64_t>(side) * reg_max * plane, reg_max, plane) * stride;
        }
        const double cx = (j + 0.5) * stride;
        const double cy = (i + 0.5) * stride;
        const Box net{cx - dist[0], cy - dist[1], cx + dist[2], cy + dist[3]};
        const Box box = transform.to_source(net, options.clamp && !options.wrap_seam, options.clamp);
        if (options.clamp && (box.width() <= 0 || box.height() <= 0)) continue;
        out.push_back({best, conf, box, false});
      }
    }
  }
  return out;
}

bool nms_before(const Detection& a, const Detection& b) noexcept {
  return std::tie(b.confidence, a.box.x1, a.box.y1, a.class_id, a.box.x2, a.box.y2) <
         std::tie(a.confidence, b.box.x1, b.box.y1, b.class_id, b.box.x2, b.box.y2);
}

std::vector<Detection> nms(std::span<const Detection> boxes, const InferConfig& cfg, double image_width) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return nms_before(boxes[a], boxes[b]); });
  const bool wrap = cfg.wrap_seam && image_width > 0;

  std::vector<Detection> kept;
  for (std::size_t idx : order) {
    if (static_cast<int>(kept.size()) >= cfg.max_detections) break;
    const Detection& cand = boxes[idx];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.class_id == cand.class_id && (wrap ? iou(k.box, cand.box, image_width) : iou_plain(k.box, cand.box)) > cfg.iou_threshold;
    });
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

Detection wrap_normalize(Detection d, double width) noexcept {
  if (d.box.x1 < 0) {
    d.box.x1 += width;
    d.wrapped = true;
  } else if (d.box.x2 > width) {
    d.box.x2 -= width;
    d.wrapped = true;
  }
  if (d.wrapped) {
    d.box.x1 = std::clamp(d.box.x1, 0.0, width);
    d.box.x2 = std::clamp(d.box.x2, 0.0, width);
  }
  return d;
}

DetectResult detect_image(const ModelGraph& graph, const WeightStore& store, const Image& image,
                          const InferConfig& cfg) {
  DetectResult result;
  const auto strides = graph.strides();
  const int max_stride = strides.empty() ? 32 : *std::max_element(strides.begin(), strides.end());

  auto t0 = Clock::now();
  const Preprocessed pre = preprocess(image, graph.config().input_h, graph.config().input_w, max_stride);
  result.timing.preprocess_ms = elapsed_ms(t0);

  t0 = Clock::now();
  const std::vector<Tensor> raw = graph.forward(store, pre.tensor);
  result.timing.forward_ms = elapsed_ms(t0);

  t0 = Clock::now();
  const DetectHead& head = graph.detect();
  const auto candidates =
      decode(raw, strides, head.reg_max(), head.nc(), pre.transform, {cfg.conf_threshold, true, cfg.wrap_seam});
  result.timing.decode_ms = elapsed_ms(t0);

  t0 = Clock::now();
  result.detections = nms(candidates, cfg, image.width);
  if (cfg.wrap_seam) {
    for (auto& d : result.detections) d = wrap_normalize(d, image.width);
  }
  result.timing.nms_ms = elapsed_ms(t0);
  return result;
}

std::string detections_json(std::span<const Detection> detections) {
  json arr = json::array();
  for (const auto& d : detections) arr.push_back(detection_json(d));
  return json{{"detections", arr}}.dump();
}

std::string detect_result_json(const DetectResult& result, const std::string& image_name) {
  json arr = json::array();
  for (const auto& d : result.detections) arr.push_back(detection_json(d));
  const json doc{{"image", image_name},
                 {"detections", arr},
                 {"timing_ms",
                  {{"preprocess", result.timing.preprocess_ms},
                   {"forward", result.timing.forward_ms},
                   {"decode", result.timing.decode_ms},
                   {"nms", result.timing.nms_ms}}}};
  return doc.dump(2) + "\n";
}

std::vector<Detection> parse_detections(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("detections are not valid JSON: ") + e.what());
  }
  const json& arr = doc.is_object() ? doc.value("detections", json::array()) : doc;
  if (!arr.is_array()) throw DataError("detections must be a JSON array");
  std::vector<Detection> out;
  try {
    for (const auto& j : arr) {
      const auto b = j.at("box").get<std::vector<double>>();
      if (b.size() != 4) throw DataError("detection box must have 4 coordinates");
      out.push_back({j.at("class_id").get<int>(), j.at("confidence").get<double>(), {b[0], b[1], b[2], b[3]},
                     j.value("wrapped", false)});
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed detection record: ") + e.what());
  }
  return out;
}

}  // namespace y4k
