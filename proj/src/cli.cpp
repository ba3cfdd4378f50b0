// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "y4k/analysis.hpp"
#include "y4k/error.hpp"
#include "y4k/evalkit.hpp"
#include "y4k/gradcheck.hpp"
#include "y4k/graph.hpp"
#include "y4k/image.hpp"
#include "y4k/infer.hpp"
#include "y4k/parallel.hpp"
#include "y4k/rng.hpp"
#include "y4k/weights.hpp"

namespace y4k::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string dflt(const std::string& value, const char* provenance) {
  return " [default: " + value + "; " + provenance + "]";
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw DataError("cannot write '" + path + "'");
}

ModelConfig resolve_model(const std::string& spec) {
  if (fs::is_regular_file(spec)) return parse_config(read_file(spec));
  const auto names = builtin_variant_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) return builtin_variant(spec);
  std::string valid;
  for (auto n : names) valid += (valid.empty() ? "" : ", ") + std::string(n);
  throw UsageError("--model '" + spec + "' is neither a config file nor a built-in variant (" + valid + ")");
}

int parse_positive(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || v < 1) throw UsageError(what + ": '" + s + "' is not a positive integer");
  return v;
}

// "H" or "HxW".
std::optional<std::pair<int, int>> parse_imgsz(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto x = s.find('x');
  if (x == std::string::npos) {
    const int v = parse_positive(s, "--imgsz");
    return std::pair{v, v};
  }
  return std::pair{parse_positive(s.substr(0, x), "--imgsz"), parse_positive(s.substr(x + 1), "--imgsz")};
}

// "WxH".
ImageSize parse_image_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw UsageError("--image-size must look like WIDTHxHEIGHT, got '" + s + "'");
  return {parse_positive(s.substr(0, x), "--image-size"), parse_positive(s.substr(x + 1), "--image-size")};
}

WeightStore weights_for(const ModelGraph& graph, const std::string& path, std::uint64_t seed, std::ostream& err) {
  if (path.empty()) {
    err << "note: no --weights given, using random weights (seed " << seed << ")\n";
    return random_init(graph, seed);
  }
  WeightStore store = load_weights(path);
  check_weights(graph, store);
  return store;
}

std::vector<Detection> detections_from(const json& arr) { return parse_detections(arr.dump()); }

// id -> detections, from one detect output, a JSON array of such records, or
// a directory of them.
std::map<std::string, std::vector<Detection>> load_detection_records(const fs::path& path) {
  std::map<std::string, std::vector<Detection>> out;
  const auto add_record = [&](const json& rec, const fs::path& file) {
    if (!rec.is_object() || !rec.contains("detections")) {
      throw DataError("'" + file.string() + "': detection record needs a \"detections\" array");
    }
    const std::string id =
        rec.contains("image") ? fs::path(rec.at("image").get<std::string>()).stem().string() : file.stem().string();
    auto dets = detections_from(rec.at("detections"));
    auto& slot = out[id];
    slot.insert(slot.end(), dets.begin(), dets.end());
  };
  const auto add_file = [&](const fs::path& file) {
    json doc;
    try {
      doc = json::parse(read_file(file));
    } catch (const json::exception& e) {
      throw DataError("'" + file.string() + "' is not valid JSON: " + e.what());
    }
    try {
      if (doc.is_array() && !doc.empty() && doc.front().is_object() && doc.front().contains("box")) {
        auto dets = detections_from(doc);
        auto& slot = out[file.stem().string()];
        slot.insert(slot.end(), dets.begin(), dets.end());
      } else if (doc.is_array()) {
        for (const auto& rec : doc) add_record(rec, file);
      } else {
        add_record(doc, file);
      }
    } catch (const json::exception& e) {
      throw DataError("'" + file.string() + "': " + e.what());
    }
  };

  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) add_file(f);
  } else if (fs::is_regular_file(path)) {
    add_file(path);
  } else {
    throw DataError("detections path '" + path.string() + "' not found");
  }
  return out;
}

std::vector<DatasetImage> load_ground_truth(const std::string& labels, const std::string& images,
                                            const std::string& image_size) {
  if (!images.empty()) return load_dataset(images, labels);
  const ImageSize size = parse_image_size(image_size);
  return load_labels(labels, size.width, size.height);
}

std::vector<std::string> list_ids(const fs::path& dir, bool labels) {
  if (!fs::is_directory(dir)) throw DataError("directory '" + dir.string() + "' not found");
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const fs::path& p = e.path();
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    const bool keep = labels ? ext == ".txt" && p.filename() != "classes.txt"
                             : ext == ".ppm" || ext == ".pnm" || ext == ".png" || ext == ".jpg" || ext == ".jpeg";
    if (keep) ids.push_back(p.stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

Image load_detect_image(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") throw DataError("'" + path.string() + "': PNG decoding is not supported, convert to binary PPM");
  return read_ppm(path);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Subcommands ------------------------------------------------------------------

struct AnalyzeArgs {
  std::string model = "yolo11-4k";
  std::string imgsz;
  std::string format = "table";
  bool emit_config = false;
  std::vector<std::string> compare;
  std::string out;
};

int do_analyze(const AnalyzeArgs& a, std::ostream& out) {
  if (!a.compare.empty()) {
    std::vector<std::string> names = a.compare;
    if (names.size() == 1 && names[0] == "all") {
      names.clear();
      for (auto n : builtin_variant_names()) names.emplace_back(n);
    }
    std::vector<std::string_view> views(names.begin(), names.end());
    std::vector<VariantRow> rows;
    try {
      rows = compare_variants(views);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    emit(a.format == "json" ? comparison_json(rows) : format_comparison(rows), a.out, out);
    return kExitOk;
  }
  ModelConfig config = resolve_model(a.model);
  if (a.emit_config) {
    if (const auto hw = parse_imgsz(a.imgsz)) std::tie(config.input_h, config.input_w) = *hw;
    emit(serialize_config(config), a.out, out);
    return kExitOk;
  }
  const ModelGraph graph = build(config, parse_imgsz(a.imgsz));
  const AnalysisReport report = analyze(graph);
  emit(a.format == "json" ? to_json(report) : format_table(report), a.out, out);
  return kExitOk;
}

struct DetectArgs {
  std::string model = "yolo11-4k";
  std::string weights;
  std::uint64_t seed = 0;
  std::string image;
  std::string imgsz;
  double conf = 0.25;
  double iou = 0.45;
  int max_det = 300;
  bool wrap_seam = false;
  std::string out;
};

int do_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
  const ModelGraph graph = build(resolve_model(a.model), parse_imgsz(a.imgsz));
  const WeightStore store = weights_for(graph, a.weights, a.seed, err);
  const Image image = load_detect_image(a.image);
  const InferConfig cfg{a.conf, a.iou, a.wrap_seam, a.max_det};
  const DetectResult result = detect_image(graph, store, image, cfg);
  emit(detect_result_json(result, fs::path(a.image).filename().string()), a.out, out);
  return kExitOk;
}

struct EvalArgs {
  std::string detections;
  std::string labels;
  std::string images;
  std::string image_size = "3840x1920";
  double wrap_width = 0;
  std::string interp = "101";
  std::string format = "text";
  std::string out;
};

int do_eval(const EvalArgs& a, std::ostream& out) {
  const auto dataset = load_ground_truth(a.labels, a.images, a.image_size);
  auto records = load_detection_records(a.detections);
  std::vector<EvalImage> images;
  for (const auto& img : dataset) {
    EvalImage e{img.id, img.boxes, {}};
    if (auto it = records.find(img.id); it != records.end()) {
      e.detections = std::move(it->second);
      records.erase(it);
    }
    images.push_back(std::move(e));
  }
  if (!records.empty()) {
    throw DataError("detections reference image '" + records.begin()->first + "' which has no label file or image");
  }
  EvalOptions options;
  options.interpolation = a.interp == "all" ? Interpolation::kAllPoint : Interpolation::kPoint101;
  if (a.wrap_width > 0) options.wrap_width = a.wrap_width;
  const EvalReport report = evaluate(images, options);
  emit(a.format == "json" ? eval_report_json(report) : eval_report_text(report), a.out, out);
  return kExitOk;
}

struct SplitsArgs {
  std::string labels;
  std::string images;
  int k = 5;
  std::uint64_t seed = 42;
  std::string out;
};

int do_splits(const SplitsArgs& a, std::ostream& out) {
  if (a.labels.empty() == a.images.empty()) throw UsageError("splits needs exactly one of --labels or --images");
  if (a.k < 2) throw UsageError("--k must be at least 2");
  const auto ids = a.labels.empty() ? list_ids(a.images, false) : list_ids(a.labels, true);
  const KFoldSplit split = kfold_split(ids, a.k, a.seed);
  const std::string text = kfold_json(split);
  if (a.out.empty()) {
    out << text;
    return kExitOk;
  }
  emit(text, a.out, out);
  out << ids.size() << " ids, " << a.k << " folds, sizes";
  for (const auto& f : split.folds) out << ' ' << f.size();
  out << " -> " << a.out << "\n";
  return kExitOk;
}

struct StatsArgs {
  std::string labels;
  std::string images;
  std::string image_size = "3840x1920";
  std::string csv;
  std::string format = "text";
};

int do_stats(const StatsArgs& a, std::ostream& out) {
  const auto dataset = load_ground_truth(a.labels, a.images, a.image_size);
  std::vector<Box> boxes;
  for (const auto& img : dataset) {
    for (const auto& b : img.boxes) boxes.push_back(b.box);
  }
  const BoxStats stats = bbox_stats(boxes);
  if (!a.csv.empty()) emit(bbox_stats_csv(stats), a.csv, out);
  out << (a.format == "json" ? bbox_stats_json(stats) : bbox_stats_text(stats));
  return kExitOk;
}

struct GradcheckArgs {
  std::string block = "all";
  double eps = 1e-5;
  double tol = 1e-6;
  std::uint64_t seed = 7;
};

int do_gradcheck(const GradcheckArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> blocks;
  if (a.block == "all") {
    blocks = {"GhostConv", "C3k2", "SPPF"};
  } else {
    blocks = {a.block};
  }
  bool ok = true;
  for (const auto& name : blocks) {
    std::unique_ptr<Block> block;
    try {
      block = make_gradcheck_block(name, 4);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    GradCheckOptions opts;
    opts.eps = a.eps;
    opts.tolerance = a.tol;
    opts.seed = a.seed;
    const GradCheckResult r = gradcheck(*block, opts);
    out << (r.passed() ? "PASS " : "FAIL ") << name << " max_rel_err=" << fmt("%.3g", r.max_rel_err)
        << (r.passed() ? " (< " : " (>= ") << fmt("%g", r.tolerance) << ") checked=" << r.checked
        << " worst=" << r.worst << "\n";
    ok = ok && r.passed();
  }
  if (!ok) {
    err << "error (internal): gradient check failed\n";
    return kExitInternal;
  }
  return kExitOk;
}

struct BenchArgs {
  std::string model = "yolo11-4k";
  std::string weights;
  std::uint64_t seed = 0;
  std::string imgsz;
  int repeat = 10;
  int warmup = 1;
  std::string format = "text";
};

int do_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.repeat < 1) throw UsageError("--repeat must be at least 1");
  const ModelGraph graph = build(resolve_model(a.model), parse_imgsz(a.imgsz));
  const WeightStore store = weights_for(graph, a.weights, a.seed, err);
  Image image(graph.config().input_w, graph.config().input_h);
  SplitMix64 rng(a.seed);
  for (auto& px : image.rgb) px = static_cast<std::uint8_t>(rng.below(256));

  for (int i = 0; i < a.warmup; ++i) detect_image(graph, store, image, {});
  std::map<std::string, std::vector<double>> samples;
  std::size_t n_det = 0;
  for (int i = 0; i < a.repeat; ++i) {
    const DetectResult r = detect_image(graph, store, image, {});
    samples["preprocess"].push_back(r.timing.preprocess_ms);
    samples["forward"].push_back(r.timing.forward_ms);
    samples["decode"].push_back(r.timing.decode_ms);
    samples["nms"].push_back(r.timing.nms_ms);
    samples["total"].push_back(r.timing.preprocess_ms + r.timing.forward_ms + r.timing.decode_ms + r.timing.nms_ms);
    n_det = r.detections.size();
  }

  const std::vector<std::string> order = {"preprocess", "forward", "decode", "nms", "total"};
  json stages = json::object();
  std::ostringstream table;
  table << "model " << graph.config().name << "  input " << graph.config().input_h << "x" << graph.config().input_w
        << "  threads " << thread_count() << "  repeat " << a.repeat << "\n\n";
  table << "stage            p50 ms    p90 ms    max ms\n";
  for (const auto& stage : order) {
    auto v = samples[stage];
    std::sort(v.begin(), v.end());
    const double p50 = quantile(v, 0.5), p90 = quantile(v, 0.9), mx = v.back();
    stages[stage] = {{"p50", p50}, {"p90", p90}, {"max", mx}};
    char line[96];
    std::snprintf(line, sizeof line, "%-12s %9.2f %9.2f %9.2f\n", stage.c_str(), p50, p90, mx);
    table << line;
  }
  table << "\ndetections " << n_det << "\n";
  if (a.format == "json") {
    out << json{{"model", graph.config().name},
                {"input", {graph.config().input_h, graph.config().input_w}},
                {"threads", thread_count()},
                {"repeat", a.repeat},
                {"stages_ms", stages},
                {"detections", n_det}}
               .dump(2)
        << "\n";
  } else {
    out << table.str();
  }
  return kExitOk;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"y4k: build, analyze, run and evaluate 4K panoramic object detectors"};
  app.name("y4k");
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 1 usage error, 2 data error, 3 internal error.\n"
             "Y4K_THREADS caps worker threads (0 = auto).");
  std::string models;
  for (auto n : builtin_variant_names()) models += (models.empty() ? "" : ", ") + std::string(n);
  const std::string model_help = "Built-in variant (" + models + ") or config JSON path";

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Per-layer parameter and FLOP report");
  analyze_cmd->add_option("--model", analyze_args.model, model_help + dflt("yolo11-4k", "repo decision"));
  analyze_cmd->add_option("--imgsz", analyze_args.imgsz, "Input size H or HxW" + dflt("config input_size", "repo decision"));
  analyze_cmd->add_option("--format", analyze_args.format, "table or json" + dflt("table", "repo decision"))
      ->check(CLI::IsMember({"table", "json"}));
  analyze_cmd->add_flag("--emit-config", analyze_args.emit_config, "Print the model config JSON instead of a report");
  analyze_cmd->add_option("--compare", analyze_args.compare,
                          "Compare built-in variants side by side ('all' for every variant)")
      ->delimiter(',');
  analyze_cmd->add_option("--out", analyze_args.out, "Write to this file instead of stdout");

  DetectArgs detect_args;
  auto* detect_cmd = app.add_subcommand("detect", "Run detection on one PPM image");
  detect_cmd->add_option("--model", detect_args.model, model_help + dflt("yolo11-4k", "repo decision"));
  detect_cmd->add_option("--weights", detect_args.weights, "Weight file (.y4kw)" + dflt("random weights", "repo decision"));
  detect_cmd->add_option("--seed", detect_args.seed, "Seed for random weights" + dflt("0", "repo decision"));
  detect_cmd->add_option("--image", detect_args.image, "Input image (binary PPM)")->required();
  detect_cmd->add_option("--imgsz", detect_args.imgsz, "Network input H or HxW" + dflt("config input_size", "repo decision"));
  detect_cmd->add_option("--conf", detect_args.conf, "Confidence threshold" + dflt("0.25", "framework default"))
      ->check(CLI::Range(0.0, 1.0));
  detect_cmd->add_option("--iou", detect_args.iou, "NMS IoU threshold" + dflt("0.45", "framework default"))
      ->check(CLI::Range(0.0, 1.0));
  detect_cmd->add_option("--max-det", detect_args.max_det, "Maximum detections" + dflt("300", "framework default"))
      ->check(CLI::PositiveNumber);
  detect_cmd->add_flag("--wrap-seam", detect_args.wrap_seam,
                       "Treat the left and right image edges as adjacent during NMS" + dflt("off", "repo decision"));
  detect_cmd->add_option("--out", detect_args.out, "Write detections JSON to this file");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Precision, recall and mAP against YOLO labels");
  eval_cmd->add_option("--detections", eval_args.detections, "Detection JSON file or directory")->required();
  eval_cmd->add_option("--labels", eval_args.labels, "Directory of YOLO label files")->required();
  eval_cmd->add_option("--images", eval_args.images, "Image directory (sizes read from headers)");
  eval_cmd->add_option("--image-size", eval_args.image_size,
                       "WIDTHxHEIGHT used when --images is absent" + dflt("3840x1920", "paper value"));
  eval_cmd->add_option("--wrap-width", eval_args.wrap_width, "Match across the horizontal seam of this width")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--interp", eval_args.interp, "AP interpolation: 101 or all" + dflt("101", "repo decision"))
      ->check(CLI::IsMember({"101", "all"}));
  eval_cmd->add_option("--format", eval_args.format, "text or json" + dflt("text", "repo decision"))
      ->check(CLI::IsMember({"text", "json"}));
  eval_cmd->add_option("--out", eval_args.out, "Write the report to this file");

  SplitsArgs splits_args;
  auto* splits_cmd = app.add_subcommand("splits", "Seeded k-fold train/val/test assignment");
  splits_cmd->add_option("--labels", splits_args.labels, "Label directory (ids are file stems)");
  splits_cmd->add_option("--images", splits_args.images, "Image directory (ids are file stems)");
  splits_cmd->add_option("--k", splits_args.k, "Number of folds" + dflt("5", "paper value"));
  splits_cmd->add_option("--seed", splits_args.seed, "Shuffle seed" + dflt("42", "repo decision"));
  splits_cmd->add_option("--out", splits_args.out, "Write splits JSON to this file");

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("stats", "Bounding-box size statistics");
  stats_cmd->add_option("--labels", stats_args.labels, "Directory of YOLO label files")->required();
  stats_cmd->add_option("--images", stats_args.images, "Image directory (sizes read from headers)");
  stats_cmd->add_option("--image-size", stats_args.image_size,
                        "WIDTHxHEIGHT used when --images is absent" + dflt("3840x1920", "paper value"));
  stats_cmd->add_option("--csv", stats_args.csv, "Write width,height pairs to this CSV file");
  stats_cmd->add_option("--format", stats_args.format, "text or json" + dflt("text", "repo decision"))
      ->check(CLI::IsMember({"text", "json"}));

  GradcheckArgs grad_args;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of block gradients");
  std::string blocks = "all";
  for (const auto& t : gradcheck_block_types()) blocks += ", " + t;
  grad_cmd->add_option("--block", grad_args.block,
                       "Block type (" + blocks + "); all = GhostConv, C3k2, SPPF" + dflt("all", "repo decision"));
  grad_cmd->add_option("--eps", grad_args.eps, "Central difference step" + dflt("1e-5", "repo decision"))
      ->check(CLI::PositiveNumber);
  grad_cmd->add_option("--tol", grad_args.tol, "Maximum relative error" + dflt("1e-6", "repo decision"))
      ->check(CLI::PositiveNumber);
  grad_cmd->add_option("--seed", grad_args.seed, "Seed for inputs and parameters" + dflt("7", "repo decision"));

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Per-stage latency of the detection pipeline");
  bench_cmd->add_option("--model", bench_args.model, model_help + dflt("yolo11-4k", "repo decision"));
  bench_cmd->add_option("--weights", bench_args.weights, "Weight file (.y4kw)" + dflt("random weights", "repo decision"));
  bench_cmd->add_option("--seed", bench_args.seed, "Seed for random weights and image" + dflt("0", "repo decision"));
  bench_cmd->add_option("--imgsz", bench_args.imgsz, "Network input H or HxW" + dflt("config input_size", "repo decision"));
  bench_cmd->add_option("--repeat", bench_args.repeat, "Timed runs" + dflt("10", "repo decision"));
  bench_cmd->add_option("--warmup", bench_args.warmup, "Untimed runs first" + dflt("1", "repo decision"))
      ->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--format", bench_args.format, "text or json" + dflt("text", "repo decision"))
      ->check(CLI::IsMember({"text", "json"}));

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error (usage): " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (analyze_cmd->parsed()) return do_analyze(analyze_args, out);
    if (detect_cmd->parsed()) return do_detect(detect_args, out, err);
    if (eval_cmd->parsed()) return do_eval(eval_args, out);
    if (splits_cmd->parsed()) return do_splits(splits_args, out);
    if (stats_cmd->parsed()) return do_stats(stats_args, out);
    if (grad_cmd->parsed()) return do_gradcheck(grad_args, out, err);
    if (bench_cmd->parsed()) return do_bench(bench_args, out, err);
  } catch (const UsageError& e) {
    err << "error (usage): " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnsupportedOpError& e) {
    err << "error (usage): " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error (data): " << e.what() << "\n";
    return kExitData;
  } catch (const FormatError& e) {
    err << "error (data): " << e.what() << "\n";
    return kExitData;
  } catch (const ConfigError& e) {
    err << "error (data): " << e.what() << "\n";
    return kExitData;
  } catch (const ShapeError& e) {
    err << "error (data): " << e.what() << "\n";
    return kExitData;
  } catch (const MissingWeightError& e) {
    err << "error (data): " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error (data): " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error (internal): " << e.what() << "\n";
    return kExitInternal;
  }
  err << "error (usage): no subcommand\n";
  return kExitUsage;
}

}  // namespace y4k::cli
