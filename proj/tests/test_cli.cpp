// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "y4k/cli.hpp"
#include "y4k/graph.hpp"
#include "y4k/image.hpp"
#include "y4k/weights.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = y4k::cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("y4k-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    fs::create_directories((dir_ / name).parent_path());
    std::ofstream(dir_ / name) << text;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

TEST(Cli, NoSubcommandIsUsageError) {
  const Outcome r = run({});
  EXPECT_EQ(r.code, y4k::cli::kExitUsage);
  EXPECT_NE(r.err.find("error (usage)"), std::string::npos);
}

TEST(Cli, HelpListsExitCodes) {
  const Outcome r = run({"--help"});
  EXPECT_EQ(r.code, y4k::cli::kExitOk);
  EXPECT_NE(r.out.find("Exit codes"), std::string::npos);
  for (const char* sub : {"analyze", "detect", "eval", "splits", "stats", "gradcheck", "bench"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST(Cli, HelpShowsDefaultProvenance) {
  const Outcome detect = run({"detect", "--help"});
  EXPECT_EQ(detect.code, 0);
  EXPECT_NE(detect.out.find("default: 0.25; framework default"), std::string::npos);
  EXPECT_NE(detect.out.find("default: 0.45; framework default"), std::string::npos);
  EXPECT_NE(detect.out.find("repo decision"), std::string::npos);
  const Outcome splits = run({"splits", "--help"});
  EXPECT_NE(splits.out.find("default: 5; paper value"), std::string::npos);
}

TEST(Cli, UnknownFlagIsUsageError) {
  const Outcome r = run({"analyze", "--nope"});
  EXPECT_EQ(r.code, y4k::cli::kExitUsage);
  EXPECT_NE(r.err.find("--nope"), std::string::npos);
}

TEST(Cli, UnknownModelIsUsageError) { EXPECT_EQ(run({"analyze", "--model", "nonesuch"}).code, y4k::cli::kExitUsage); }

TEST(Cli, AnalyzeJsonScalesAt3840) {
  const Outcome r = run({"analyze", "--model", "yolo11-4k", "--imgsz", "3840", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  std::vector<int> heights;
  for (const auto& s : doc["detect_scales"]) heights.push_back(s["shape"][2]);
  EXPECT_EQ(heights, (std::vector<int>{960, 480, 240, 120}));
  EXPECT_EQ(doc["reference"]["params"], 1377444);
}

TEST(Cli, AnalyzeTableAndComparison) {
  const Outcome table = run({"analyze", "--model", "baseline"});
  ASSERT_EQ(table.code, 0) << table.err;
  EXPECT_NE(table.out.find("total params"), std::string::npos);
  EXPECT_NE(table.out.find("paper-reported"), std::string::npos);
  const Outcome cmp = run({"analyze", "--compare", "baseline,yolo11-4k"});
  ASSERT_EQ(cmp.code, 0) << cmp.err;
  EXPECT_NE(cmp.out.find("yolo11-4k"), std::string::npos);
  EXPECT_NE(cmp.out.find("1,377,444"), std::string::npos);
}

TEST_F(CliTest, EmitConfigRoundTrips) {
  const Outcome r = run({"analyze", "--model", "hybrid", "--emit-config", "--out", path("hybrid.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const y4k::ModelConfig cfg = y4k::parse_config(read("hybrid.json"));
  EXPECT_EQ(y4k::serialize_config(cfg), y4k::serialize_config(y4k::builtin_variant("hybrid")));
  const Outcome again = run({"analyze", "--model", path("hybrid.json"), "--format", "json"});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(json::parse(again.out)["model"], "hybrid");
}

TEST_F(CliTest, SplitsOnTenLabels) {
  for (int i = 0; i < 10; ++i) write("labels/f" + std::to_string(i) + ".txt", "0 0.5 0.5 0.1 0.1\n");
  const Outcome r = run({"splits", "--labels", path("labels"), "--k", "5", "--seed", "42", "--out", path("splits.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(read("splits.json"));
  ASSERT_EQ(doc["folds"].size(), 5u);
  for (const auto& f : doc["folds"]) EXPECT_EQ(f.size(), 2u);
  const Outcome same = run({"splits", "--labels", path("labels")});
  EXPECT_EQ(json::parse(same.out), doc);
}

TEST_F(CliTest, SplitsRequiresExactlyOneSource) {
  EXPECT_EQ(run({"splits"}).code, y4k::cli::kExitUsage);
  EXPECT_EQ(run({"splits", "--labels", path("missing")}).code, y4k::cli::kExitData);
}

TEST(Cli, GradcheckReportsPass) {
  const Outcome r = run({"gradcheck", "--block", "GhostConv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("PASS GhostConv", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("(< 1e-06)"), std::string::npos) << r.out;
}

TEST(Cli, GradcheckUnsupportedBlock) {
  const Outcome r = run({"gradcheck", "--block", "C2PSA"});
  EXPECT_EQ(r.code, y4k::cli::kExitUsage);
  EXPECT_EQ(run({"gradcheck", "--block", "Nope"}).code, y4k::cli::kExitUsage);
}

TEST_F(CliTest, DetectWritesJson) {
  y4k::Image img(96, 48);
  for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = static_cast<std::uint8_t>(i * 37);
  y4k::write_ppm(img, dir_ / "frame.ppm");
  const Outcome r = run({"detect", "--image", path("frame.ppm"), "--imgsz", "64", "--conf", "0.01", "--max-det", "5",
                     "--out", path("det.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("random"), std::string::npos);
  const json doc = json::parse(read("det.json"));
  EXPECT_EQ(doc["image"], "frame.ppm");
  EXPECT_LE(doc["detections"].size(), 5u);
  EXPECT_TRUE(doc.contains("timing_ms"));
}

TEST_F(CliTest, DetectWithWeightFile) {
  const y4k::ModelGraph g = y4k::build(y4k::builtin_variant("yolo11-4k"), std::pair{64, 64});
  y4k::save_weights(y4k::random_init(g, 3), dir_ / "w.y4kw");
  y4k::write_ppm(y4k::Image(64, 64), dir_ / "frame.ppm");
  const Outcome a = run({"detect", "--image", path("frame.ppm"), "--imgsz", "64", "--weights", path("w.y4kw")});
  ASSERT_EQ(a.code, 0) << a.err;
  const Outcome b = run({"detect", "--image", path("frame.ppm"), "--imgsz", "64", "--seed", "3"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(json::parse(a.out)["detections"], json::parse(b.out)["detections"]);
  write("bad.y4kw", "not a weight file");
  EXPECT_EQ(run({"detect", "--image", path("frame.ppm"), "--imgsz", "64", "--weights", path("bad.y4kw")}).code,
            y4k::cli::kExitData);
}

TEST_F(CliTest, DetectMissingImageIsDataError) {
  const Outcome r = run({"detect", "--image", path("absent.ppm"), "--imgsz", "64"});
  EXPECT_EQ(r.code, y4k::cli::kExitData);
  EXPECT_NE(r.err.find("error (data)"), std::string::npos);
  EXPECT_EQ(run({"detect"}).code, y4k::cli::kExitUsage);
}

TEST_F(CliTest, EvalPerfectDetections) {
  write("labels/a.txt", "0 0.5 0.5 0.1 0.2\n");
  write("labels/b.txt", "1 0.25 0.25 0.1 0.1\n");
  write("dets/a.json", R"({"image": "a", "detections": [{"class_id": 0, "confidence": 0.9, "box": [45, 80, 55, 120]}]})");
  write("dets/b.json", R"({"image": "b", "detections": [{"class_id": 1, "confidence": 0.8, "box": [20, 40, 30, 60]}]})");
  const Outcome r = run({"eval", "--detections", path("dets"), "--labels", path("labels"), "--image-size", "100x200",
                     "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["all"]["map50"], 1.0);
  EXPECT_EQ(doc["all"]["tp"], 2);
  const Outcome text = run({"eval", "--detections", path("dets"), "--labels", path("labels"), "--image-size", "100x200"});
  EXPECT_EQ(text.code, 0);
  EXPECT_NE(text.out.find("mAP"), std::string::npos);
}

TEST_F(CliTest, EvalErrors) {
  write("labels/a.txt", "0 0.5 0.5 0.1 0.2\n");
  write("dets.json", R"([{"image": "zzz", "detections": []}])");
  EXPECT_EQ(run({"eval", "--detections", path("dets.json"), "--labels", path("labels")}).code, y4k::cli::kExitData);
  EXPECT_EQ(run({"eval", "--detections", path("none.json"), "--labels", path("labels")}).code, y4k::cli::kExitData);
  write("labels/bad.txt", "0 1.5 0.5 0.1 0.2\n");
  write("ok.json", "[]");
  const Outcome r = run({"eval", "--detections", path("ok.json"), "--labels", path("labels")});
  EXPECT_EQ(r.code, y4k::cli::kExitData);
  EXPECT_NE(r.err.find("bad.txt:1"), std::string::npos) << r.err;
}

TEST_F(CliTest, StatsCsv) {
  write("labels/a.txt", "0 0.5 0.5 0.1 0.2\n0 0.5 0.5 0.2 0.4\n");
  const Outcome r = run({"stats", "--labels", path("labels"), "--image-size", "100x100", "--csv", path("s.csv"),
                     "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["count"], 2);
  EXPECT_DOUBLE_EQ(doc["width"]["mean"].get<double>(), 15.0);
  const std::string csv = read("s.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Cli, BenchSmallInput) {
  const Outcome r = run({"bench", "--imgsz", "64", "--repeat", "2", "--warmup", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("forward"), std::string::npos);
  EXPECT_NE(r.out.find("p50"), std::string::npos);
}

}  // namespace
