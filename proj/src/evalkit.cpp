// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/evalkit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "y4k/error.hpp"
#include "y4k/image.hpp"
#include "y4k/rng.hpp"

namespace y4k {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <class T>
bool parse_number(std::string_view tok, T& out) {
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && ptr == tok.data() + tok.size();
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ppm" || ext == ".pnm" || ext == ".png";
}

void require_dir(const fs::path& dir, const char* what) {
  if (!fs::is_directory(dir)) throw DataError(std::string(what) + " directory '" + dir.string() + "' not found");
}

struct Scored {
  double confidence;
  bool tp;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

json stats_json(const BoxStats& s) {
  return {{"count", s.count},
          {"width", {{"min", s.min_w}, {"mean", s.mean_w}, {"max", s.max_w},
                     {"q1", s.width_q.q1}, {"median", s.width_q.median}, {"q3", s.width_q.q3}}},
          {"height", {{"min", s.min_h}, {"mean", s.mean_h}, {"max", s.max_h},
                      {"q1", s.height_q.q1}, {"median", s.height_q.median}, {"q3", s.height_q.q3}}}};
}

}  // namespace

// Labels -----------------------------------------------------------------------

std::vector<GroundTruthBox> parse_labels(std::string_view text, int width, int height, const std::string& source) {
  std::vector<GroundTruthBox> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (tok.size() != 5) {
      throw DataError(where + ": expected 'class cx cy w h', got " + std::to_string(tok.size()) + " fields");
    }
    int cls = 0;
    if (!parse_number(tok[0], cls) || cls < 0) throw DataError(where + ": bad class id '" + std::string(tok[0]) + "'");
    double v[4];
    for (int i = 0; i < 4; ++i) {
      if (!parse_number(tok[i + 1], v[i])) throw DataError(where + ": bad number '" + std::string(tok[i + 1]) + "'");
      if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
        throw DataError(where + ": normalized value " + std::string(tok[i + 1]) + " outside [0, 1]");
      }
    }
    if (v[2] <= 0.0 || v[3] <= 0.0) throw DataError(where + ": box width and height must be positive");
    const double cx = v[0] * width, cy = v[1] * height;
    const double bw = v[2] * width, bh = v[3] * height;
    out.push_back({cls, {cx - 0.5 * bw, cy - 0.5 * bh, cx + 0.5 * bw, cy + 0.5 * bh}});
  }
  return out;
}

std::vector<DatasetImage> load_dataset(const fs::path& images_dir, const fs::path& labels_dir) {
  require_dir(images_dir, "images");
  require_dir(labels_dir, "labels");
  std::vector<DatasetImage> out;
  for (const auto& entry : fs::directory_iterator(images_dir)) {
    if (!entry.is_regular_file() || !is_image_file(entry.path())) continue;
    DatasetImage img;
    img.id = entry.path().stem().string();
    img.path = entry.path();
    const ImageSize size = read_image_size(entry.path());
    img.width = size.width;
    img.height = size.height;
    const fs::path label = labels_dir / (img.id + ".txt");
    if (fs::exists(label)) img.boxes = parse_labels(read_text(label), img.width, img.height, label.string());
    out.push_back(std::move(img));
  }
  std::sort(out.begin(), out.end(), [](const DatasetImage& a, const DatasetImage& b) { return a.id < b.id; });
  return out;
}

std::vector<DatasetImage> load_labels(const fs::path& labels_dir, int width, int height) {
  require_dir(labels_dir, "labels");
  std::vector<DatasetImage> out;
  for (const auto& entry : fs::directory_iterator(labels_dir)) {
    const fs::path& p = entry.path();
    if (!entry.is_regular_file() || p.extension() != ".txt" || p.filename() == "classes.txt") continue;
    DatasetImage img;
    img.id = p.stem().string();
    img.width = width;
    img.height = height;
    img.boxes = parse_labels(read_text(p), width, height, p.string());
    out.push_back(std::move(img));
  }
  std::sort(out.begin(), out.end(), [](const DatasetImage& a, const DatasetImage& b) { return a.id < b.id; });
  return out;
}

// Metrics ----------------------------------------------------------------------

PrecisionRecall precision_recall(std::int64_t tp, std::int64_t fp, std::int64_t fn, double empty_value) {
  const auto ratio = [&](std::int64_t num, std::int64_t den) {
    return den == 0 ? empty_value : static_cast<double>(num) / static_cast<double>(den);
  };
  return {ratio(tp, tp + fp), ratio(tp, tp + fn)};
}

double curve_ap(std::span<const double> recall, std::span<const double> precision, Interpolation interpolation) {
  const std::size_t n = recall.size();
  if (n == 0) return 0.0;
  std::vector<double> env(precision.begin(), precision.end());
  for (std::size_t i = n - 1; i-- > 0;) env[i] = std::max(env[i], env[i + 1]);

  if (interpolation == Interpolation::kAllPoint) {
    double ap = 0;
    double prev = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ap += (recall[i] - prev) * env[i];
      prev = recall[i];
    }
    return ap;
  }
  double sum = 0;
  for (int t = 0; t <= 100; ++t) {
    const double r = t / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += env[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

std::map<int, ClassResult> average_precision(std::span<const EvalImage> images, double iou_threshold,
                                             const EvalOptions& options) {
  std::map<int, std::vector<Scored>> scored;
  std::map<int, ClassResult> result;
  for (const EvalImage& img : images) {
    for (const auto& gt : img.ground_truth) {
      auto& r = result[gt.class_id];
      r.class_id = gt.class_id;
      ++r.n_gt;
    }
    std::vector<std::size_t> order(img.detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return nms_before(img.detections[a], img.detections[b]);
    });
    std::vector<bool> matched(img.ground_truth.size(), false);
    for (std::size_t idx : order) {
      const Detection& d = img.detections[idx];
      Box box = d.box;
      if (d.wrapped && options.wrap_width) box.x2 += *options.wrap_width;
      int best = -1;
      double best_iou = -1.0;
      for (std::size_t g = 0; g < img.ground_truth.size(); ++g) {
        const auto& gt = img.ground_truth[g];
        if (matched[g] || gt.class_id != d.class_id) continue;
        const double v = iou(gt.box, box, options.wrap_width);
        if (v >= iou_threshold && v > best_iou) {
          best_iou = v;
          best = static_cast<int>(g);
        }
      }
      if (best >= 0) matched[static_cast<std::size_t>(best)] = true;
      scored[d.class_id].push_back({d.confidence, best >= 0});
    }
  }

  for (auto& [cls, list] : scored) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Scored& a, const Scored& b) { return a.confidence > b.confidence; });
    ClassResult& r = result[cls];
    r.class_id = cls;
    std::vector<double> rec, prec;
    for (const Scored& s : list) {
      (s.tp ? r.tp : r.fp) += 1;
      if (r.n_gt > 0) {
        rec.push_back(static_cast<double>(r.tp) / static_cast<double>(r.n_gt));
        prec.push_back(static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp));
      }
    }
    r.ap = r.n_gt > 0 ? curve_ap(rec, prec, options.interpolation) : 0.0;
  }
  return result;
}

std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

MapResult map_range(std::span<const EvalImage> images, std::span<const double> thresholds, const EvalOptions& options) {
  MapResult out;
  out.thresholds = thresholds.empty() ? coco_thresholds() : std::vector<double>(thresholds.begin(), thresholds.end());
  const auto mean_ap = [](const std::map<int, ClassResult>& per_class) {
    double sum = 0;
    int n = 0;
    for (const auto& [cls, r] : per_class) {
      if (r.n_gt == 0) continue;
      sum += r.ap;
      ++n;
    }
    return n > 0 ? sum / n : 0.0;
  };

  bool have50 = false;
  for (double t : out.thresholds) {
    const auto per_class = average_precision(images, t, options);
    const double m = mean_ap(per_class);
    out.map_per_threshold.push_back(m);
    for (const auto& [cls, r] : per_class) {
      if (r.n_gt > 0) out.ap_per_class[cls].push_back(r.ap);
    }
    if (t == 0.5) {
      out.map50 = m;
      have50 = true;
    }
  }
  if (!have50) out.map50 = mean_ap(average_precision(images, 0.5, options));
  out.map50_95 = out.map_per_threshold.empty()
                     ? 0.0
                     : std::accumulate(out.map_per_threshold.begin(), out.map_per_threshold.end(), 0.0) /
                           static_cast<double>(out.map_per_threshold.size());
  return out;
}

// Splits -----------------------------------------------------------------------

KFoldSplit kfold_split(std::span<const std::string> ids, int k, std::uint64_t seed) {
  if (k < 2) throw DataError("k must be at least 2, got " + std::to_string(k));
  if (ids.size() < static_cast<std::size_t>(k)) {
    throw DataError("cannot split " + std::to_string(ids.size()) + " ids into " + std::to_string(k) + " folds");
  }
  std::vector<std::string> shuffled(ids.begin(), ids.end());
  SplitMix64 rng(seed);
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
    std::swap(shuffled[i], shuffled[static_cast<std::size_t>(rng.below(i + 1))]);
  }

  KFoldSplit out;
  out.seed = seed;
  const std::size_t base = shuffled.size() / k;
  const std::size_t extra = shuffled.size() % k;
  std::size_t at = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    out.folds.emplace_back(shuffled.begin() + static_cast<std::ptrdiff_t>(at),
                           shuffled.begin() + static_cast<std::ptrdiff_t>(at + size));
    at += size;
  }
  for (int f = 0; f < k; ++f) {
    KFoldIteration it;
    it.test = out.folds[f];
    std::vector<std::string> rest;
    for (int g = 0; g < k; ++g) {
      if (g != f) rest.insert(rest.end(), out.folds[g].begin(), out.folds[g].end());
    }
    const std::size_t n_train = rest.size() * 8 / 10;
    it.train.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_train));
    it.val.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_train), rest.end());
    out.iterations.push_back(std::move(it));
  }
  return out;
}

std::string kfold_json(const KFoldSplit& split) {
  json iterations = json::array();
  for (const auto& it : split.iterations) {
    iterations.push_back({{"train", it.train}, {"val", it.val}, {"test", it.test}});
  }
  std::vector<std::size_t> sizes;
  for (const auto& f : split.folds) sizes.push_back(f.size());
  return json{{"k", split.folds.size()},
              {"seed", split.seed},
              {"fold_sizes", sizes},
              {"folds", split.folds},
              {"iterations", iterations}}
             .dump(2) +
         "\n";
}

// Box statistics ---------------------------------------------------------------

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

BoxStats bbox_stats(std::span<const Box> boxes) {
  BoxStats s;
  if (boxes.empty()) return s;
  s.count = static_cast<std::int64_t>(boxes.size());
  std::vector<double> ws, hs;
  for (const Box& b : boxes) {
    ws.push_back(b.width());
    hs.push_back(b.height());
    s.sizes.emplace_back(b.width(), b.height());
  }
  s.mean_w = std::accumulate(ws.begin(), ws.end(), 0.0) / static_cast<double>(ws.size());
  s.mean_h = std::accumulate(hs.begin(), hs.end(), 0.0) / static_cast<double>(hs.size());
  std::sort(ws.begin(), ws.end());
  std::sort(hs.begin(), hs.end());
  s.min_w = ws.front();
  s.max_w = ws.back();
  s.min_h = hs.front();
  s.max_h = hs.back();
  s.width_q = {quantile(ws, 0.25), quantile(ws, 0.5), quantile(ws, 0.75)};
  s.height_q = {quantile(hs, 0.25), quantile(hs, 0.5), quantile(hs, 0.75)};
  return s;
}

std::string bbox_stats_csv(const BoxStats& stats) {
  std::string out = "width,height\n";
  for (const auto& [w, h] : stats.sizes) out += fmt("%.6g", w) + "," + fmt("%.6g", h) + "\n";
  return out;
}

std::string bbox_stats_json(const BoxStats& stats) { return stats_json(stats).dump(2) + "\n"; }

std::string bbox_stats_text(const BoxStats& s) {
  std::ostringstream out;
  out << "boxes  " << s.count << "\n";
  out << "         min      q1  median      q3     max    mean\n";
  out << "width  " << fmt("%6.2f", s.min_w) << "  " << fmt("%6.2f", s.width_q.q1) << "  "
      << fmt("%6.2f", s.width_q.median) << "  " << fmt("%6.2f", s.width_q.q3) << "  " << fmt("%6.2f", s.max_w)
      << "  " << fmt("%6.2f", s.mean_w) << "\n";
  out << "height " << fmt("%6.2f", s.min_h) << "  " << fmt("%6.2f", s.height_q.q1) << "  "
      << fmt("%6.2f", s.height_q.median) << "  " << fmt("%6.2f", s.height_q.q3) << "  " << fmt("%6.2f", s.max_h)
      << "  " << fmt("%6.2f", s.mean_h) << "\n";
  return out.str();
}

// Report -----------------------------------------------------------------------

EvalReport evaluate(std::span<const EvalImage> images, const EvalOptions& options) {
  EvalReport r;
  r.images = static_cast<std::int64_t>(images.size());
  r.map = map_range(images, {}, options);
  r.ap_per_class = r.map.ap_per_class;
  for (const auto& [cls, c] : average_precision(images, 0.5, options)) {
    r.classes.push_back(c);
    r.tp += c.tp;
    r.fp += c.fp;
    r.fn += c.n_gt - c.tp;
  }
  const auto pr = precision_recall(r.tp, r.fp, r.fn, options.empty_precision);
  r.precision = pr.precision;
  r.recall = pr.recall;
  std::vector<Box> gt;
  for (const auto& img : images) {
    for (const auto& g : img.ground_truth) gt.push_back(g.box);
  }
  r.gt_stats = bbox_stats(gt);
  return r;
}

std::string eval_report_text(const EvalReport& r) {
  std::ostringstream out;
  out << "images " << r.images << "  ground truth " << r.gt_stats.count << "\n\n";
  out << "class      gt     tp     fp     fn       P       R   AP@50  AP@50:95\n";
  for (const auto& c : r.classes) {
    const auto pr = precision_recall(c.tp, c.fp, c.n_gt - c.tp);
    const auto it = r.ap_per_class.find(c.class_id);
    const double ap5095 = it == r.ap_per_class.end() ? 0.0
                                                     : std::accumulate(it->second.begin(), it->second.end(), 0.0) /
                                                           static_cast<double>(it->second.size());
    char line[160];
    std::snprintf(line, sizeof line, "%5d  %6lld %6lld %6lld %6lld  %6.3f  %6.3f  %6.3f  %8.3f%s\n", c.class_id,
                  static_cast<long long>(c.n_gt), static_cast<long long>(c.tp), static_cast<long long>(c.fp),
                  static_cast<long long>(c.n_gt - c.tp), pr.precision, pr.recall, c.ap, ap5095,
                  c.n_gt == 0 ? "  (no ground truth)" : "");
    out << line;
  }
  char line[160];
  std::snprintf(line, sizeof line, "all    %6lld %6lld %6lld %6lld  %6.3f  %6.3f  %6.3f  %8.3f\n",
                static_cast<long long>(r.tp + r.fn), static_cast<long long>(r.tp), static_cast<long long>(r.fp),
                static_cast<long long>(r.fn), r.precision, r.recall, r.map.map50, r.map.map50_95);
  out << line << "\nmAP@50 " << fmt("%.4f", r.map.map50) << "  mAP@50:95 " << fmt("%.4f", r.map.map50_95) << "\n";
  out << "\nground-truth box sizes (px)\n" << bbox_stats_text(r.gt_stats);
  return out.str();
}

std::string eval_report_json(const EvalReport& r) {
  json classes = json::array();
  for (const auto& c : r.classes) {
    const auto pr = precision_recall(c.tp, c.fp, c.n_gt - c.tp);
    const auto it = r.ap_per_class.find(c.class_id);
    classes.push_back({{"class_id", c.class_id},
                       {"gt", c.n_gt},
                       {"tp", c.tp},
                       {"fp", c.fp},
                       {"fn", c.n_gt - c.tp},
                       {"precision", pr.precision},
                       {"recall", pr.recall},
                       {"ap50", c.ap},
                       {"ap_per_threshold", it == r.ap_per_class.end() ? json::array() : json(it->second)}});
  }
  const json doc{{"images", r.images},
                 {"thresholds", r.map.thresholds},
                 {"classes", classes},
                 {"all",
                  {{"tp", r.tp},
                   {"fp", r.fp},
                   {"fn", r.fn},
                   {"precision", r.precision},
                   {"recall", r.recall},
                   {"map50", r.map.map50},
                   {"map50_95", r.map.map50_95},
                   {"map_per_threshold", r.map.map_per_threshold}}},
                 {"box_stats", stats_json(r.gt_stats)}};
  return doc.dump(2) + "\n";
}

}  // namespace y4k
