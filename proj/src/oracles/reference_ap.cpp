#include "plidar/oracles/reference_ap.hpp"

#include <algorithm>
#include <set>

#include "plidar/geometry.hpp"

namespace plidar::oracles {

namespace {

enum class GtRole { Scored, Ignored, Region, Absent };

bool qualifies(const LabelRecord& g, const DifficultyLevel& lvl) {
  return g.bbox2d.bottom - g.bbox2d.top >= lvl.min_height && g.occlusion <= lvl.max_occlusion &&
         g.truncation <= lvl.max_truncation;
}

GtRole role_of(const LabelRecord& g, const MatchQuery& q, const EvalOptions& opt) {
  const bool official = opt.mode == DontCareMode::Official;
  if (g.class_name == q.cls) {
    if (qualifies(g, opt.criteria[q.difficulty])) return GtRole::Scored;
    return official ? GtRole::Ignored : GtRole::Absent;
  }
  if (!official) return GtRole::Absent;
  if (q.cls == ObjectClass::Car && g.class_name == ObjectClass::Van) return GtRole::Ignored;
  if (q.cls == ObjectClass::Pedestrian && g.class_name == ObjectClass::PersonSitting) {
    return GtRole::Ignored;
  }
  if (g.class_name == ObjectClass::DontCare) return GtRole::Region;
  return GtRole::Absent;
}

double overlap_of(const LabelRecord& d, const LabelRecord& g, BoxMetric m) {
  const Box3D a = box_from_label(d), b = box_from_label(g);
  return m == BoxMetric::Bev ? iou_bev(a, b) : iou_3d(a, b);
}

bool inside_region(const BBox2D& d, const BBox2D& r, double limit) {
  const double iw = std::min(d.right, r.right) - std::max(d.left, r.left);
  const double ih = std::min(d.bottom, r.bottom) - std::max(d.top, r.top);
  const double area = (d.right - d.left) * (d.bottom - d.top);
  if (iw <= 0 || ih <= 0 || area <= 0) return false;
  return iw * ih / area > limit;
}

struct Counts {
  std::size_t tp = 0, fp = 0;
};

// Matching restricted to detections with score >= t.
Counts count_frame(const FrameData& f, const MatchQuery& q, const EvalOptions& opt, double t) {
  std::vector<GtRole> roles;
  for (const auto& g : f.gt) roles.push_back(role_of(g, q, opt));
  std::vector<bool> taken(f.gt.size(), false);

  std::vector<const LabelRecord*> dets;
  for (const auto& d : f.det) {
    if (d.class_name != q.cls || d.score.value_or(0) < t) continue;
    if (opt.mode == DontCareMode::Official &&
        d.bbox2d.bottom - d.bbox2d.top < opt.criteria[q.difficulty].min_height) {
      continue;
    }
    dets.push_back(&d);
  }
  std::stable_sort(dets.begin(), dets.end(), [](const LabelRecord* a, const LabelRecord* b) {
    return a->score.value_or(0) > b->score.value_or(0);
  });

  Counts c;
  for (const LabelRecord* d : dets) {
    bool handled = false;
    for (GtRole wanted : {GtRole::Scored, GtRole::Ignored}) {
      std::size_t best = f.gt.size();
      double best_overlap = -1;
      for (std::size_t j = 0; j < f.gt.size(); ++j) {
        if (roles[j] != wanted || taken[j]) continue;
        const double o = overlap_of(*d, f.gt[j], q.metric);
        if (o >= q.iou_threshold && o > best_overlap) {
          best = j;
          best_overlap = o;
        }
      }
      if (best < f.gt.size()) {
        taken[best] = true;
        if (wanted == GtRole::Scored) ++c.tp;
        handled = true;
        break;
      }
    }
    if (handled) continue;
    bool in_region = false;
    for (std::size_t j = 0; j < f.gt.size(); ++j) {
      if (roles[j] == GtRole::Region && inside_region(d->bbox2d, f.gt[j].bbox2d, opt.dontcare_ioa)) {
        in_region = true;
      }
    }
    if (!in_region) ++c.fp;
  }
  return c;
}

}  // namespace

std::optional<double> reference_ap40(std::span<const FrameData> frames, const MatchQuery& query,
                                     const EvalOptions& options) {
  std::size_t positives = 0;
  std::set<double, std::greater<>> thresholds;
  for (const auto& f : frames) {
    for (const auto& g : f.gt) positives += role_of(g, query, options) == GtRole::Scored;
    for (const auto& d : f.det) {
      if (d.class_name == query.cls) thresholds.insert(d.score.value_or(0));
    }
  }
  if (positives == 0) return std::nullopt;

  std::vector<std::pair<double, double>> curve;  // (recall, precision)
  for (double t : thresholds) {
    Counts total;
    for (const auto& f : frames) {
      const Counts c = count_frame(f, query, options, t);
      total.tp += c.tp;
      total.fp += c.fp;
    }
    if (total.tp + total.fp == 0) continue;
    curve.emplace_back(static_cast<double>(total.tp) / static_cast<double>(positives),
                       static_cast<double>(total.tp) / static_cast<double>(total.tp + total.fp));
  }

  double sum = 0;
  for (int k = 1; k <= kRecallSamples; ++k) {
    const double r = static_cast<double>(k) / kRecallSamples;
    double best = 0;
    for (const auto& [recall, precision] : curve) {
      if (recall >= r) best = std::max(best, precision);
    }
    sum += best;
  }
  return 100.0 * sum / kRecallSamples;
}

}  // namespace plidar::oracles
