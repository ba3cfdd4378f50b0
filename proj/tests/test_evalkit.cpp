// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "oracles.hpp"
#include "y4k/error.hpp"
#include "y4k/evalkit.hpp"
#include "y4k/image.hpp"

namespace {

using namespace y4k;
namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("y4k-evalkit-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  void write(const std::string& name, const std::string& text) const {
    fs::create_directories((path_ / name).parent_path());
    std::ofstream(path_ / name) << text;
  }

 private:
  fs::path path_;
};

TEST(Labels, Denormalize) {
  const auto boxes = parse_labels("0 0.5 0.5 0.1 0.2\n", 100, 200);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].class_id, 0);
  EXPECT_DOUBLE_EQ(boxes[0].box.x1, 45);
  EXPECT_DOUBLE_EQ(boxes[0].box.y1, 80);
  EXPECT_DOUBLE_EQ(boxes[0].box.x2, 55);
  EXPECT_DOUBLE_EQ(boxes[0].box.y2, 120);
}

TEST(Labels, EmptyAndBlankLines) {
  EXPECT_TRUE(parse_labels("", 10, 10).empty());
  EXPECT_EQ(parse_labels("\n1 0.5 0.5 0.2 0.2\n\n", 10, 10).size(), 1u);
}

TEST(Labels, OutOfRangeNamesFileAndLine) {
  try {
    parse_labels("0 0.5 0.5 0.1 0.1\n0 1.5 0.5 0.1 0.1\n", 10, 10, "a.txt");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("a.txt:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_labels("0 0.5 0.5 0.1\n", 10, 10), DataError);
  EXPECT_THROW(parse_labels("-1 0.5 0.5 0.1 0.1\n", 10, 10), DataError);
  EXPECT_THROW(parse_labels("0 0.5 0.5 0 0.1\n", 10, 10), DataError);
  EXPECT_THROW(parse_labels("x 0.5 0.5 0.1 0.1\n", 10, 10), DataError);
}

TEST(Labels, LoadDirectory) {
  TempDir dir;
  dir.write("labels/b.txt", "0 0.5 0.5 0.5 0.5\n");
  dir.write("labels/a.txt", "1 0.5 0.5 0.5 0.5\n0 0.1 0.1 0.1 0.1\n");
  dir.write("labels/classes.txt", "person\n");
  const auto set = load_labels(dir.path() / "labels", 40, 20);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set[0].id, "a");
  EXPECT_EQ(set[0].boxes.size(), 2u);
  EXPECT_EQ(set[1].boxes[0].box, (Box{10, 5, 30, 15}));
}

TEST(Labels, DatasetPairsImagesWithLabels) {
  TempDir dir;
  fs::create_directories(dir.path() / "images");
  write_ppm(Image(40, 20), dir.path() / "images" / "pos.ppm");
  write_ppm(Image(8, 8), dir.path() / "images" / "neg.ppm");
  dir.write("labels/pos.txt", "0 0.5 0.5 0.5 0.5\n");
  const auto set = load_dataset(dir.path() / "images", dir.path() / "labels");
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set[0].id, "neg");
  EXPECT_TRUE(set[0].boxes.empty());
  EXPECT_EQ(set[1].width, 40);
  EXPECT_EQ(set[1].boxes[0].box, (Box{10, 5, 30, 15}));
}

TEST(Iou, OneSeventh) { EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {1, 1, 3, 3}), 1.0 / 7); }

TEST(PrecisionRecall, Examples) {
  const auto pr = precision_recall(3, 1, 2);
  EXPECT_DOUBLE_EQ(pr.precision, 0.75);
  EXPECT_DOUBLE_EQ(pr.recall, 0.6);
  const auto empty = precision_recall(0, 0, 0);
  EXPECT_EQ(empty.precision, 1.0);
  EXPECT_EQ(empty.recall, 1.0);
  EXPECT_EQ(precision_recall(0, 0, 0, 0.0).precision, 0.0);
}

TEST(AveragePrecision, PerfectDetectorScoresOne) {
  SplitMix64 rng(10);
  auto images = oracle::random_scenes(rng, 20, 3);
  for (auto& img : images) {
    img.detections.clear();
    for (const auto& g : img.ground_truth) img.detections.push_back({g.class_id, 0.9, g.box});
  }
  for (auto interp : {Interpolation::kPoint101, Interpolation::kAllPoint}) {
    const auto m = map_range(images, {}, {interp});
    EXPECT_DOUBLE_EQ(m.map50, 1.0);
    EXPECT_DOUBLE_EQ(m.map50_95, 1.0);
  }
}

TEST(AveragePrecision, NoDetectionsScoresZero) {
  SplitMix64 rng(11);
  auto images = oracle::random_scenes(rng, 10, 2);
  for (auto& img : images) img.detections.clear();
  const auto m = map_range(images);
  EXPECT_EQ(m.map50, 0.0);
  EXPECT_EQ(m.map50_95, 0.0);
}

TEST(AveragePrecision, MatchesCurveEnumeration) {
  SplitMix64 rng(12);
  for (int scene = 0; scene < 100; ++scene) {
    const auto images = oracle::random_scenes(rng, 8, 3);
    for (double thr : {0.5, 0.75}) {
      const auto want = oracle::average_precision(images, thr);
      const auto got101 = average_precision(images, thr, {Interpolation::kPoint101});
      const auto got_all = average_precision(images, thr, {Interpolation::kAllPoint});
      for (const auto& [cls, ap] : want.ap101) {
        EXPECT_NEAR(got101.at(cls).ap, ap, 1e-9) << scene << " class " << cls;
        EXPECT_NEAR(got_all.at(cls).ap, want.ap_all.at(cls), 1e-9) << scene << " class " << cls;
      }
    }
    const auto thresholds = coco_thresholds();
    double sum = 0;
    for (double t : thresholds) sum += oracle::mean_of(oracle::average_precision(images, t).ap101);
    const auto m = map_range(images);
    if (oracle::average_precision(images, 0.5).ap101.empty()) continue;
    EXPECT_NEAR(m.map50, oracle::mean_of(oracle::average_precision(images, 0.5).ap101), 1e-9);
    EXPECT_NEAR(m.map50_95, sum / static_cast<double>(thresholds.size()), 1e-9);
  }
}

TEST(AveragePrecision, OffsetDetectionFixture) {
  // 3.2 px horizontal offset on a 10x10 box: IoU 68/132, above 0.50 only.
  const std::vector<EvalImage> images{{"a", {{0, {0, 0, 10, 10}}}, {{0, 0.9, {3.2, 0, 13.2, 10}}}}};
  const auto m = map_range(images);
  EXPECT_EQ(m.map50, 1.0);
  EXPECT_DOUBLE_EQ(m.map50_95, 0.1);
  ASSERT_EQ(m.map_per_threshold.size(), 10u);
  EXPECT_EQ(m.map_per_threshold[1], 0.0);
}

TEST(AveragePrecision, WrappedDetectionMatchesAcrossSeam) {
  const std::vector<EvalImage> images{{"a", {{0, {95, 0, 105, 10}}}, {{0, 0.9, {95, 0, 5, 10}, true}}}};
  EXPECT_EQ(map_range(images, {}, {Interpolation::kPoint101, 1.0, 100.0}).map50, 1.0);
}

TEST(AveragePrecision, ClassesWithoutGroundTruthExcluded) {
  const std::vector<EvalImage> images{{"a", {{0, {0, 0, 10, 10}}}, {{0, 0.9, {0, 0, 10, 10}}, {1, 0.9, {50, 50, 60, 60}}}}};
  EXPECT_EQ(map_range(images).map50, 1.0);
}

TEST(Thresholds, Coco) {
  const auto t = coco_thresholds();
  ASSERT_EQ(t.size(), 10u);
  EXPECT_EQ(t.front(), 0.5);
  EXPECT_EQ(t.back(), 0.95);
}

std::vector<std::string> ids(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("img" + std::to_string(i));
  return out;
}

TEST(KFold, FoldSizesAndPartition) {
  const auto all = ids(6876);
  const KFoldSplit split = kfold_split(all, 5, 42);
  ASSERT_EQ(split.folds.size(), 5u);
  const std::vector<std::size_t> want{1376, 1375, 1375, 1375, 1375};
  std::set<std::string> seen;
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_EQ(split.folds[f].size(), want[f]);
    seen.insert(split.folds[f].begin(), split.folds[f].end());
  }
  EXPECT_EQ(seen.size(), all.size());
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& it = split.iterations[i];
    EXPECT_EQ(it.test, split.folds[i]);
    const std::size_t rest = all.size() - it.test.size();
    EXPECT_EQ(it.train.size(), rest * 8 / 10);
    EXPECT_EQ(it.train.size() + it.val.size(), rest);
    std::set<std::string> u(it.train.begin(), it.train.end());
    u.insert(it.val.begin(), it.val.end());
    u.insert(it.test.begin(), it.test.end());
    EXPECT_EQ(u.size(), all.size());
  }
}

TEST(KFold, DeterministicPerSeed) {
  const auto all = ids(50);
  EXPECT_EQ(kfold_json(kfold_split(all, 5, 1)), kfold_json(kfold_split(all, 5, 1)));
  EXPECT_NE(kfold_json(kfold_split(all, 5, 1)), kfold_json(kfold_split(all, 5, 2)));
}

TEST(KFold, ShuffleIsFisherYates) {
  const auto all = ids(7);
  std::vector<std::string> want = all;
  SplitMix64 rng(9);
  for (std::size_t i = want.size() - 1; i > 0; --i) std::swap(want[i], want[rng.below(i + 1)]);
  const KFoldSplit split = kfold_split(all, 2, 9);
  std::vector<std::string> got = split.folds[0];
  got.insert(got.end(), split.folds[1].begin(), split.folds[1].end());
  EXPECT_EQ(split.folds[0].size(), 4u);
  EXPECT_EQ(got, want);
}

TEST(KFold, Errors) {
  EXPECT_THROW(kfold_split(ids(3), 5, 0), DataError);
  EXPECT_THROW(kfold_split(ids(3), 1, 0), DataError);
}

TEST(KFold, JsonShape) {
  const auto doc = nlohmann::json::parse(kfold_json(kfold_split(ids(10), 5, 42)));
  EXPECT_EQ(doc["k"], 5);
  EXPECT_EQ(doc["seed"], 42);
  EXPECT_EQ(doc["fold_sizes"], nlohmann::json::array({2, 2, 2, 2, 2}));
  EXPECT_EQ(doc["iterations"].size(), 5u);
  EXPECT_EQ(doc["iterations"][0]["test"].size(), 2u);
}

TEST(BoxStats, MeansAndExtremes) {
  const std::vector<Box> boxes{{0, 0, 2, 4}, {10, 10, 16, 18}};
  const BoxStats s = bbox_stats(boxes);
  EXPECT_EQ(s.count, 2);
  EXPECT_DOUBLE_EQ(s.mean_w, 4);
  EXPECT_DOUBLE_EQ(s.mean_h, 6);
  EXPECT_DOUBLE_EQ(s.min_w, 2);
  EXPECT_DOUBLE_EQ(s.max_h, 8);
  EXPECT_DOUBLE_EQ(s.width_q.median, 4);
}

TEST(BoxStats, SingleAndEmpty) {
  const std::vector<Box> one{{1, 1, 4, 6}};
  const BoxStats s = bbox_stats(one);
  EXPECT_EQ(s.min_w, 3);
  EXPECT_EQ(s.max_w, 3);
  EXPECT_EQ(s.width_q.q1, 3);
  EXPECT_EQ(s.height_q.q3, 5);
  EXPECT_EQ(bbox_stats({}).count, 0);
  EXPECT_NO_THROW(bbox_stats_text(bbox_stats({})));
}

TEST(BoxStats, Quantile) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4);
}

TEST(BoxStats, CsvHasOneRowPerBox) {
  const std::vector<Box> boxes{{0, 0, 2, 4}, {10, 10, 16, 18}};
  const std::string csv = bbox_stats_csv(bbox_stats(boxes));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Evaluate, ReportJson) {
  SplitMix64 rng(13);
  const auto images = oracle::random_scenes(rng, 6, 2);
  const EvalReport r = evaluate(images);
  EXPECT_EQ(r.images, 6);
  std::int64_t gt = 0;
  for (const auto& img : images) gt += static_cast<std::int64_t>(img.ground_truth.size());
  EXPECT_EQ(r.tp + r.fn, gt);
  const auto doc = nlohmann::json::parse(eval_report_json(r));
  for (const char* key : {"images", "thresholds", "classes", "all", "box_stats"}) EXPECT_TRUE(doc.contains(key)) << key;
  EXPECT_DOUBLE_EQ(doc["all"]["map50"].get<double>(), r.map.map50);
  EXPECT_EQ(doc["all"]["map_per_threshold"].size(), 10u);
  EXPECT_FALSE(eval_report_text(r).empty());
}

}  // namespace
