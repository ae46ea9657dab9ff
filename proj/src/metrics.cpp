#include "plidar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"
#include "plidar/geometry.hpp"

namespace plidar {

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "Easy";
    case Difficulty::Moderate: return "Moderate";
    case Difficulty::Hard: return "Hard";
  }
  return "?";
}

std::string_view to_string(BoxMetric m) { return m == BoxMetric::Bev ? "bev" : "3d"; }

std::string_view to_string(DontCareMode m) {
  return m == DontCareMode::Official ? "official" : "simple";
}

DifficultyCriteria DifficultyCriteria::kitti() {
  return {{{{40, 0, 0.15}, {25, 1, 0.30}, {25, 2, 0.50}}}};
}

void DifficultyCriteria::validate() const {
  for (int i = 0; i + 1 < 3; ++i) {
    const auto& stricter = levels[i];
    const auto& looser = levels[i + 1];
    if (stricter.min_height < looser.min_height || stricter.max_occlusion > looser.max_occlusion ||
        stricter.max_truncation > looser.max_truncation) {
      throw Error(ErrorCode::InvalidArgument, "difficulty thresholds must loosen from Easy to Hard");
    }
  }
}

DifficultySet assign_difficulty(const LabelRecord& label, const DifficultyCriteria& criteria) {
  DifficultySet set;
  if (label.class_name == ObjectClass::DontCare) return set;
  const double h = label.bbox2d.height();
  for (Difficulty d : kDifficulties) {
    const DifficultyLevel& lvl = criteria[d];
    if (h >= lvl.min_height && label.occlusion <= lvl.max_occlusion &&
        label.truncation <= lvl.max_truncation) {
      set.insert(d);
    }
  }
  return set;
}

namespace {

bool is_neighbor_class(ObjectClass target, ObjectClass other) {
  return (target == ObjectClass::Car && other == ObjectClass::Van) ||
         (target == ObjectClass::Pedestrian && other == ObjectClass::PersonSitting);
}

double image_ioa(const BBox2D& det, const BBox2D& region) {
  const double w = std::min(det.right, region.right) - std::max(det.left, region.left);
  const double h = std::min(det.bottom, region.bottom) - std::max(det.top, region.top);
  const double area = det.width() * det.height();
  if (w <= 0 || h <= 0 || area <= 0) return 0;
  return (w * h) / area;
}

}  // namespace

FrameMatches match_frame(const FrameData& frame, const MatchQuery& query,
                         const EvalOptions& options) {
  const bool official = options.mode == DontCareMode::Official;
  std::vector<Box3D> valid_gt, ignored_gt;
  std::vector<BBox2D> dontcare;
  for (const auto& g : frame.gt) {
    if (g.class_name == query.cls) {
      if (assign_difficulty(g, options.criteria).contains(query.difficulty)) {
        valid_gt.push_back(box_from_label(g));
      } else if (official) {
        ignored_gt.push_back(box_from_label(g));
      }
    } else if (official && is_neighbor_class(query.cls, g.class_name)) {
      ignored_gt.push_back(box_from_label(g));
    } else if (official && g.class_name == ObjectClass::DontCare) {
      dontcare.push_back(g.bbox2d);
    }
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < frame.det.size(); ++i) {
    const LabelRecord& d = frame.det[i];
    if (d.class_name != query.cls) continue;
    if (official && d.bbox2d.height() < options.criteria[query.difficulty].min_height) continue;
    order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frame.det[a].score.value_or(0) > frame.det[b].score.value_or(0);
  });

  auto iou = [&](const Box3D& a, const Box3D& b) {
    return query.metric == BoxMetric::Bev ? iou_bev(a, b) : iou_3d(a, b);
  };
  // Returns the index of the unused box with the highest IoU >= threshold.
  auto best_match = [&](const Box3D& det, const std::vector<Box3D>& pool,
                        const std::vector<bool>& used) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    double best_iou = -1;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (used[j]) continue;
      const double v = iou(det, pool[j]);
      if (v >= query.iou_threshold && v > best_iou) {
        best = j;
        best_iou = v;
      }
    }
    return best;
  };

  FrameMatches out;
  out.num_gt = valid_gt.size();
  std::vector<bool> valid_used(valid_gt.size(), false), ignored_used(ignored_gt.size(), false);
  for (std::size_t i : order) {
    const LabelRecord& d = frame.det[i];
    const Box3D box = box_from_label(d);
    const double score = d.score.value_or(0);
    if (auto j = best_match(box, valid_gt, valid_used)) {
      valid_used[*j] = true;
      out.detections.push_back({score, true});
      continue;
    }
    if (auto j = best_match(box, ignored_gt, ignored_used)) {
      ignored_used[*j] = true;
      continue;
    }
    const bool in_dontcare = std::any_of(dontcare.begin(), dontcare.end(), [&](const BBox2D& r) {
      return image_ioa(d.bbox2d, r) > options.dontcare_ioa;
    });
    if (in_dontcare) continue;
    out.detections.push_back({score, false});
  }
  return out;
}

std::optional<ApResult> ap40_from_matches(std::span<const FrameMatches> frames) {
  ApResult result;
  std::vector<ScoredMatch> pooled;
  for (const auto& f : frames) {
    result.num_gt += f.num_gt;
    pooled.insert(pooled.end(), f.detections.begin(), f.detections.end());
  }
  if (result.num_gt == 0) return std::nullopt;
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const ScoredMatch& a, const ScoredMatch& b) { return a.score > b.score; });

  struct OperatingPoint {
    std::size_t tp, fp;
  };
  std::vector<OperatingPoint> points;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < pooled.size();) {
    const double s = pooled[i].score;
    for (; i < pooled.size() && pooled[i].score == s; ++i) {
      (pooled[i].true_positive ? tp : fp) += 1;
    }
    points.push_back({tp, fp});
  }
  result.num_tp = tp;
  result.num_fp = fp;

  // suffix_max[i] = best precision at operating points i.. (recall is
  // non-decreasing along the sweep).
  std::vector<double> suffix_max(points.size() + 1, 0.0);
  for (std::size_t i = points.size(); i-- > 0;) {
    const double precision =
        static_cast<double>(points[i].tp) / static_cast<double>(points[i].tp + points[i].fp);
    suffix_max[i] = std::max(suffix_max[i + 1], precision);
  }
  std::size_t first = 0;
  double sum = 0;
  for (int k = 1; k <= kRecallSamples; ++k) {
    // recall >= k/40  <=>  40 tp >= k N
    while (first < points.size() &&
           points[first].tp * kRecallSamples < static_cast<std::size_t>(k) * result.num_gt) {
      ++first;
    }
    result.precision[k - 1] = suffix_max[first];
    sum += suffix_max[first];
  }
  result.ap = sum / kRecallSamples * 100.0;
  return result;
}

std::optional<ApResult> ap40(std::span<const FrameData> frames, const MatchQuery& query,
                             const EvalOptions& options) {
  std::vector<FrameMatches> matches;
  matches.reserve(frames.size());
  for (const auto& f : frames) matches.push_back(match_frame(f, query, options));
  return ap40_from_matches(matches);
}

const EvalEntry* EvalReport::find(ObjectClass cls, Difficulty d, double iou, BoxMetric m) const {
  for (const auto& e : entries) {
    if (e.cls == cls && e.difficulty == d && e.iou_threshold == iou && e.metric == m) return &e;
  }
  return nullptr;
}

EvalReport evaluate(std::span<const FrameData> frames, std::span<const ObjectClass> classes,
                    std::span<const double> iou_thresholds, const EvalOptions& options) {
  options.criteria.validate();
  EvalReport report;
  report.mode = options.mode;
  for (ObjectClass cls : classes) {
    for (double iou : iou_thresholds) {
      for (Difficulty d : kDifficulties) {
        for (BoxMetric m : {BoxMetric::Bev, BoxMetric::Box3D}) {
          report.entries.push_back({cls, d, iou, m, ap40(frames, {cls, d, iou, m}, options)});
        }
      }
    }
  }
  return report;
}

namespace {

std::string format_ap(const EvalEntry* e) {
  if (!e || !e->result) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", e->result->ap);
  return buf;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string format_eval_table(const EvalReport& report) {
  std::vector<ObjectClass> classes;
  std::vector<double> ious;
  for (const auto& e : report.entries) {
    if (std::find(classes.begin(), classes.end(), e.cls) == classes.end()) classes.push_back(e.cls);
    if (std::find(ious.begin(), ious.end(), e.iou_threshold) == ious.end()) ious.push_back(e.iou_threshold);
  }
  std::string out = "AP40 evaluation (mode=" + std::string(to_string(report.mode)) +
                    ", config=" + report.config_hash + ")\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s", "");
  out += line;
  for (double iou : ious) {
    std::snprintf(line, sizeof(line), "| %-44s", ("AP_BEV/AP_3D (%), IoU=" + fixed(iou, 2)).c_str());
    out += line;
  }
  out += "\n";
  std::snprintf(line, sizeof(line), "%-14s", "Class");
  out += line;
  for (std::size_t i = 0; i < ious.size(); ++i) {
    std::snprintf(line, sizeof(line), "| %-14s %-14s %-14s", "Easy", "Moderate", "Hard");
    out += line;
  }
  out += "\n";
  for (ObjectClass cls : classes) {
    std::snprintf(line, sizeof(line), "%-14s", std::string(to_string(cls)).c_str());
    out += line;
    for (double iou : ious) {
      out += "| ";
      for (Difficulty d : kDifficulties) {
        const std::string cell = format_ap(report.find(cls, d, iou, BoxMetric::Bev)) + "/" +
                                 format_ap(report.find(cls, d, iou, BoxMetric::Box3D));
        std::snprintf(line, sizeof(line), "%-15s", cell.c_str());
        out += line;
      }
    }
    out += "\n";
  }
  return out;
}

std::string format_eval_jsonl(const EvalReport& report) {
  std::string out;
  for (const auto& e : report.entries) {
    nlohmann::ordered_json j;
    j["class"] = to_string(e.cls);
    j["difficulty"] = to_string(e.difficulty);
    j["iou"] = e.iou_threshold;
    j["metric"] = to_string(e.metric);
    j["mode"] = to_string(report.mode);
    j["config_hash"] = report.config_hash;
    if (e.result) {
      j["ap"] = e.result->ap;
      j["num_gt"] = e.result->num_gt;
      j["num_tp"] = e.result->num_tp;
      j["num_fp"] = e.result->num_fp;
      j["precision"] = e.result->precision;
    } else {
      j["ap"] = nullptr;
      j["num_gt"] = 0;
    }
    out += j.dump() + "\n";
  }
  return out;
}

void DepthDiagReport::merge(const DepthDiagReport& other) {
  if (buckets.empty() && cells.empty()) {
    buckets = other.buckets;
  } else if (other.buckets != buckets) {
    throw Error(ErrorCode::InvalidArgument, "cannot merge depth reports with different buckets");
  }
  for (const auto& [cls, row] : other.cells) {
    auto& mine = cells[cls];
    mine.resize(buckets.size());
    for (std::size_t b = 0; b < row.size(); ++b) {
      mine[b].correct += row[b].correct;
      mine[b].count += row[b].count;
    }
  }
}

std::optional<double> median_depth_in_box(const ScalarRaster& depth, const BBox2D& box,
                                          double depth_min, double depth_max) {
  const int u0 = std::max(0, static_cast<int>(std::floor(box.left)));
  const int v0 = std::max(0, static_cast<int>(std::floor(box.top)));
  const int u1 = std::min(depth.width, static_cast<int>(std::ceil(box.right)));
  const int v1 = std::min(depth.height, static_cast<int>(std::ceil(box.bottom)));
  std::vector<double> values;
  for (int v = v0; v < v1; ++v) {
    for (int u = u0; u < u1; ++u) {
      const double d = depth.at(u, v);
      if (d > depth_min && d < depth_max) values.push_back(d);
    }
  }
  if (values.empty()) return std::nullopt;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  if (values.size() % 2 == 1) return values[mid];
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return (lower + values[mid]) / 2;
}

DepthDiagReport depth_diagnostic(std::span<const LabelRecord> gt, const ScalarRaster& depth,
                                 const DepthDiagOptions& options) {
  DepthDiagReport report;
  report.buckets = options.buckets;
  for (ObjectClass cls : options.classes) report.cells[cls].resize(options.buckets.size());
  for (const auto& label : gt) {
    auto row = report.cells.find(label.class_name);
    if (row == report.cells.end()) continue;
    const auto pred =
        median_depth_in_box(depth, label.bbox2d, options.depth_min, options.depth_max);
    const bool correct = pred && std::abs(*pred - label.z) <= options.threshold_m;
    for (std::size_t b = 0; b < options.buckets.size(); ++b) {
      if (label.z <= options.buckets[b]) {
        row->second[b].count += 1;
        row->second[b].correct += correct ? 1 : 0;
      }
    }
  }
  return report;
}

std::string format_depth_table(const DepthDiagReport& report) {
  std::string out = "Depth accuracy vs distance (config=" + report.config_hash + ")\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-12s", "Range (m)");
  out += line;
  for (const auto& [cls, _] : report.cells) {
    std::snprintf(line, sizeof(line), "%-22s", std::string(to_string(cls)).c_str());
    out += line;
  }
  out += "\n";
  for (std::size_t b = 0; b < report.buckets.size(); ++b) {
    std::snprintf(line, sizeof(line), "<= %-9s", fixed(report.buckets[b], 0).c_str());
    out += line;
    for (const auto& [cls, row] : report.cells) {
      const auto acc = row[b].accuracy();
      const std::string cell = (acc ? fixed(*acc, 1) : std::string("-")) + " (" +
                               std::to_string(row[b].correct) + "/" +
                               std::to_string(row[b].count) + ")";
      std::snprintf(line, sizeof(line), "%-22s", cell.c_str());
      out += line;
    }
    out += "\n";
  }
  return out;
}

std::string format_depth_jsonl(const DepthDiagReport& report) {
  std::string out;
  for (const auto& [cls, row] : report.cells) {
    for (std::size_t b = 0; b < report.buckets.size(); ++b) {
      nlohmann::ordered_json j;
      j["class"] = to_string(cls);
      j["max_range_m"] = report.buckets[b];
      j["correct"] = row[b].correct;
      j["count"] = row[b].count;
      const auto acc = row[b].accuracy();
      j["accuracy"] = acc ? nlohmann::ordered_json(*acc) : nlohmann::ordered_json(nullptr);
      j["config_hash"] = report.config_hash;
      out += j.dump() + "\n";
    }
  }
  return out;
}

std::string format_depth_csv(const DepthDiagReport& report) {
  std::string out = "class,max_range_m,correct,count,accuracy\n";
  for (const auto& [cls, row] : report.cells) {
    for (std::size_t b = 0; b < report.buckets.size(); ++b) {
      const auto acc = row[b].accuracy();
      out += std::string(to_string(cls)) + "," + fixed(report.buckets[b], 0) + "," +
             std::to_string(row[b].correct) + "," + std::to_string(row[b].count) + "," +
             (acc ? fixed(*acc, 4) : std::string()) + "\n";
    }
  }
  return out;
}

}  // namespace plidar
