// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

// Detection quality evaluation: YOLO label ingestion, greedy IoU matching,
// precision/recall, AP/mAP, k-fold splits and box-size statistics.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "y4k/box.hpp"
#include "y4k/infer.hpp"

namespace y4k {

struct GroundTruthBox {
  int class_id = 0;
  Box box;
};

/// Parses YOLO label text ("class cx cy w h" per line, normalized) against
/// an image of `width` x `height` pixels. Blank lines are skipped. Throws
/// DataError naming `source` and the 1-based line number.
std::vector<GroundTruthBox> parse_labels(std::string_view text, int width, int height,
                                         const std::string& source = "<labels>");

struct DatasetImage {
  std::string id;  // file stem
  std::filesystem::path path;
  int width = 0;
  int height = 0;
  std::vector<GroundTruthBox> boxes;
};

/// Every PPM/PNG image in `images_dir` paired with `labels_dir/<stem>.txt`;
/// images without a label file are negatives. Sorted by id.
std::vector<DatasetImage> load_dataset(const std::filesystem::path& images_dir,
                                       const std::filesystem::path& labels_dir);

/// Label files only, every image assumed to be width x height.
std::vector<DatasetImage> load_labels(const std::filesystem::path& labels_dir, int width, int height);

struct PrecisionRecall {
  double precision;
  double recall;
};

/// P = TP / (TP + FP), R = TP / (TP + FN). A 0/0 ratio evaluates to
/// `empty_value` (1.0 by default).
PrecisionRecall precision_recall(std::int64_t tp, std::int64_t fp, std::int64_t fn, double empty_value = 1.0);

enum class Interpolation { kPoint101, kAllPoint };

struct EvalOptions {
  Interpolation interpolation = Interpolation::kPoint101;
  double empty_precision = 1.0;
  std::optional<double> wrap_width;
};

struct EvalImage {
  std::string id;
  std::vector<GroundTruthBox> ground_truth;
  std::vector<Detection> detections;
};

struct ClassResult {
  int class_id = 0;
  std::int64_t n_gt = 0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  double ap = 0;
};

/// Per-class AP at one IoU threshold, for every class that appears in the
/// ground truth or the detections (AP of a class without ground truth is 0
/// and it is excluded from mAP).
std::map<int, ClassResult> average_precision(std::span<const EvalImage> images, double iou_threshold,
                                             const EvalOptions& options = {});

/// AP of one precision/recall curve; points ordered by descending confidence.
double curve_ap(std::span<const double> recall, std::span<const double> precision, Interpolation interpolation);

/// 0.50, 0.55, ..., 0.95.
std::vector<double> coco_thresholds();

struct MapResult {
  double map50 = 0;
  double map50_95 = 0;
  std::vector<double> thresholds;
  std::vector<double> map_per_threshold;
  std::map<int, std::vector<double>> ap_per_class;  // indexed like thresholds
};

/// mAP averaged over classes with at least one ground-truth box.
MapResult map_range(std::span<const EvalImage> images, std::span<const double> thresholds = {},
                    const EvalOptions& options = {});

struct KFoldIteration {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

struct KFoldSplit {
  std::uint64_t seed = 0;
  std::vector<std::vector<std::string>> folds;
  std::vector<KFoldIteration> iterations;
};

/// SplitMix64 Fisher-Yates shuffle, then contiguous folds whose sizes differ
/// by at most one (the first |ids| mod k folds take the extra id). Iteration
/// i tests on fold i; the remaining ids, in fold order, go 80% to train
/// (floor) and the rest to val.
KFoldSplit kfold_split(std::span<const std::string> ids, int k, std::uint64_t seed);
std::string kfold_json(const KFoldSplit& split);

struct Quartiles {
  double q1 = 0, median = 0, q3 = 0;
};

struct BoxStats {
  std::int64_t count = 0;
  double min_w = 0, mean_w = 0, max_w = 0;
  double min_h = 0, mean_h = 0, max_h = 0;
  Quartiles width_q, height_q;
  std::vector<std::pair<double, double>> sizes;  // (width, height) per box
};

/// Linear-interpolated quantile of sorted values, q in [0, 1].
double quantile(std::span<const double> sorted, double q);
BoxStats bbox_stats(std::span<const Box> boxes);
std::string bbox_stats_csv(const BoxStats& stats);
std::string bbox_stats_json(const BoxStats& stats);
std::string bbox_stats_text(const BoxStats& stats);

struct EvalReport {
  std::vector<ClassResult> classes;  // at IoU 0.50
  std::map<int, std::vector<double>> ap_per_class;
  std::int64_t tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0;
  MapResult map;
  BoxStats gt_stats;
  std::int64_t images = 0;
};

EvalReport evaluate(std::span<const EvalImage> images, const EvalOptions& options = {});
std::string eval_report_text(const EvalReport& report);
std::string eval_report_json(const EvalReport& report);

}  // namespace y4k
