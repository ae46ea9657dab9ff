#include "plidar/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "plidar/simd/kernels.hpp"

namespace plidar {

void SizePriors::set(ObjectClass cls, const ClassPrior& prior) {
  if (!(prior.length > 0 && prior.width > 0 && prior.height > 0)) {
    throw Error(ErrorCode::InvalidArgument, "size prior dims must be positive");
  }
  priors_[cls] = prior;
}

const ClassPrior& SizePriors::at(ObjectClass cls) const {
  auto it = priors_.find(cls);
  if (it == priors_.end()) throw Error(ErrorCode::UnknownClass, std::string(to_string(cls)));
  return it->second;
}

SizePriors compute_size_priors(std::span<const LabelRecord> labels,
                               std::span<const ObjectClass> classes) {
  SizePriors priors;
  for (ObjectClass cls : classes) {
    ClassPrior sum;
    for (const auto& l : labels) {
      if (l.class_name != cls) continue;
      sum.length += l.length;
      sum.width += l.width;
      sum.height += l.height;
      ++sum.count;
    }
    if (sum.count == 0) throw Error(ErrorCode::NoSamplesForClass, std::string(to_string(cls)));
    const double n = static_cast<double>(sum.count);
    priors.set(cls, {sum.length / n, sum.width / n, sum.height / n, sum.count});
  }
  return priors;
}

void FitterConfig::validate() const {
  if (!(cluster_epsilon > 0)) throw Error(ErrorCode::InvalidArgument, "cluster_epsilon must be > 0");
  if (cluster_min_points < 1 || min_frustum_points < 1) {
    throw Error(ErrorCode::InvalidArgument, "point counts must be >= 1");
  }
  if (!(bottom_percentile >= 0 && bottom_percentile <= 100)) {
    throw Error(ErrorCode::InvalidArgument, "bottom_percentile must lie in [0, 100]");
  }
}

PointCloud frustum_points(const PointCloud& cloud, const BBox2D& box, const Calibration& calib,
                          std::optional<ImageSize> image) {
  simd::Window window{box.left, box.top, box.right, box.bottom};
  if (image) {
    window.left = std::max(window.left, 0.0);
    window.top = std::max(window.top, 0.0);
    window.right = std::min(window.right, static_cast<double>(image->width));
    window.bottom = std::min(window.bottom, static_cast<double>(image->height));
  }
  const std::size_t n = cloud.size();
  std::vector<double> buf(6 * n);
  std::span<double> all(buf);
  simd::Soa3 src{all.subspan(0, n), all.subspan(n, n), all.subspan(2 * n, n)};
  simd::Soa3 cam{all.subspan(3 * n, n), all.subspan(4 * n, n), all.subspan(5 * n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    src.x[i] = cloud.points[i].x;
    src.y[i] = cloud.points[i].y;
    src.z[i] = cloud.points[i].z;
  }
  const simd::KernelTable& k = simd::active();
  if (cloud.frame == Frame::Velodyne) {
    k.transform({src.x, src.y, src.z}, velo_to_rect_transform(calib).as_matrix(), cam);
  } else {
    cam = src;
  }
  std::vector<std::uint8_t> inside(n);
  k.project_inside({cam.x, cam.y, cam.z}, {calib.fx(), calib.fy(), calib.cx(), calib.cy()}, window,
                   inside);
  PointCloud out;
  out.frame = cloud.frame;
  for (std::size_t i = 0; i < n; ++i) {
    if (inside[i]) out.points.push_back(cloud.points[i]);
  }
  return out;
}

double forward_depth(const PointXYZI& p, Frame frame) noexcept {
  return frame == Frame::Camera ? p.z : p.x;
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

class NeighborGrid {
 public:
  NeighborGrid(const PointCloud& cloud, double eps) : cloud_(cloud), eps_(eps) {
    for (std::size_t i = 0; i < cloud.size(); ++i) cells_[key(cloud.points[i])].push_back(i);
  }

  void query(std::size_t i, std::vector<std::size_t>& out) const {
    out.clear();
    const PointXYZI& p = cloud_.points[i];
    const CellKey c = key(p);
    const double eps2 = eps_ * eps_;
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::size_t j : it->second) {
            const PointXYZI& q = cloud_.points[j];
            const double ddx = double{p.x} - q.x, ddy = double{p.y} - q.y, ddz = double{p.z} - q.z;
            if (ddx * ddx + ddy * ddy + ddz * ddz <= eps2) out.push_back(j);
          }
        }
      }
    }
  }

 private:
  CellKey key(const PointXYZI& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x / eps_)),
            static_cast<std::int64_t>(std::floor(p.y / eps_)),
            static_cast<std::int64_t>(std::floor(p.z / eps_))};
  }

  const PointCloud& cloud_;
  double eps_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return (lower + upper) / 2;
}

}  // namespace

std::vector<int> density_cluster(const PointCloud& points, double eps, std::size_t min_points) {
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(points.size(), kUnvisited);
  if (points.empty()) return label;
  NeighborGrid grid(points, eps);
  std::vector<std::size_t> neighbors, frontier, more;
  int next_cluster = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] != kUnvisited) continue;
    grid.query(i, neighbors);
    if (neighbors.size() < min_points) {
      label[i] = kNoise;
      continue;
    }
    const int c = next_cluster++;
    label[i] = c;
    frontier = neighbors;
    while (!frontier.empty()) {
      const std::size_t j = frontier.back();
      frontier.pop_back();
      if (label[j] == kNoise) label[j] = c;
      if (label[j] != kUnvisited) continue;
      label[j] = c;
      grid.query(j, more);
      if (more.size() >= min_points) frontier.insert(frontier.end(), more.begin(), more.end());
    }
  }
  return label;
}

std::optional<PointCloud> cluster_and_select(const PointCloud& points, const FitterConfig& cfg) {
  cfg.validate();
  if (points.size() < cfg.min_frustum_points) return std::nullopt;
  const std::vector<int> label = density_cluster(points, cfg.cluster_epsilon, cfg.cluster_min_points);
  const int num_clusters = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
  if (num_clusters <= 0) return std::nullopt;

  std::vector<std::vector<double>> depths(static_cast<std::size_t>(num_clusters));
  std::vector<double> all_depths;
  all_depths.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = forward_depth(points.points[i], points.frame);
    all_depths.push_back(d);
    if (label[i] >= 0) depths[static_cast<std::size_t>(label[i])].push_back(d);
  }

  int best = 0;
  if (cfg.cluster_selection == ClusterSelection::LargestCluster) {
    for (int c = 1; c < num_clusters; ++c) {
      if (depths[c].size() > depths[best].size()) best = c;
    }
  } else {
    const double reference = median_of(all_depths);
    double best_gap = std::numeric_limits<double>::infinity();
    for (int c = 0; c < num_clusters; ++c) {
      const double gap = std::abs(median_of(depths[c]) - reference);
      if (gap < best_gap || (gap == best_gap && depths[c].size() > depths[best].size())) {
        best = c;
        best_gap = gap;
      }
    }
  }

  PointCloud out;
  out.frame = points.frame;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] == best) out.points.push_back(points.points[i]);
  }
  return out;
}

YawEstimate pca_yaw(std::span<const Vec2> points) {
  YawEstimate est;
  if (points.empty()) {
    est.degenerate = true;
    return est;
  }
  double mx = 0, my = 0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  const double n = static_cast<double>(points.size());
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& p : points) {
    const double dx = p.x - mx, dy = p.y - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  sxx /= n;
  syy /= n;
  sxy /= n;
  if (sxx + syy <= 1e-24 * (1 + mx * mx + my * my)) {
    est.degenerate = true;
    return est;
  }
  est.yaw = 0.5 * std::atan2(2 * sxy, sxx - syy);
  const double half_trace = (sxx + syy) / 2;
  const double radius = std::hypot((sxx - syy) / 2, sxy);
  const double major = half_trace + radius, minor = half_trace - radius;
  est.eigen_ratio = minor > 0 ? major / minor : std::numeric_limits<double>::infinity();
  return est;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double t = rank - static_cast<double>(lo);
  return values[lo] + t * (values[hi] - values[lo]);
}

Box3D fit_box(const PointCloud& cluster, ObjectClass cls, const SizePriors& priors, double yaw,
              double bottom_percentile) {
  if (cluster.empty()) throw Error(ErrorCode::InvalidArgument, "fit_box on an empty cluster");
  if (cluster.frame != Frame::Velodyne) {
    throw Error(ErrorCode::FrameMismatch, "fit_box expects a velodyne-frame cluster");
  }
  const ClassPrior& prior = priors.at(cls);
  double sx = 0, sy = 0;
  std::vector<double> zs;
  zs.reserve(cluster.size());
  for (const auto& p : cluster.points) {
    sx += p.x;
    sy += p.y;
    zs.push_back(p.z);
  }
  const double n = static_cast<double>(cluster.size());
  const double bottom = percentile(std::move(zs), bottom_percentile);
  return Box3D({sx / n, sy / n, bottom + prior.height / 2}, {prior.length, prior.width, prior.height},
               yaw, Frame::Velodyne);
}

namespace {

// Wraps to (-pi/2, pi/2].
double wrap_half_turn(double a) {
  a = std::fmod(a, std::numbers::pi);
  if (a <= -std::numbers::pi / 2) a += std::numbers::pi;
  if (a > std::numbers::pi / 2) a -= std::numbers::pi;
  return a;
}

}  // namespace

std::vector<LabelRecord> exp0_detect(const PointCloud& cloud, std::span<const LabelRecord> gt,
                                     const Calibration& calib, const SizePriors& priors,
                                     const FitterConfig& cfg, std::optional<ImageSize> image) {
  cfg.validate();
  if (cloud.frame != Frame::Velodyne) {
    throw Error(ErrorCode::FrameMismatch, "exp0_detect expects a velodyne-frame cloud");
  }
  std::vector<LabelRecord> detections;
  for (const auto& label : gt) {
    if (label.class_name == ObjectClass::DontCare || !priors.contains(label.class_name)) continue;
    const PointCloud frustum = frustum_points(cloud, label.bbox2d, calib, image);
    const std::optional<PointCloud> cluster = cluster_and_select(frustum, cfg);
    if (!cluster) continue;

    std::vector<Vec2> ground;
    std::vector<double> depth;
    ground.reserve(cluster->size());
    double cx = 0, cy = 0;
    for (const auto& p : cluster->points) {
      ground.push_back({p.x, p.y});
      depth.push_back(forward_depth(p, Frame::Velodyne));
      cx += p.x;
      cy += p.y;
    }
    const YawEstimate est = pca_yaw(ground);
    double yaw = est.yaw;
    if (est.degenerate || est.eigen_ratio < cfg.isotropy_ratio) {
      yaw = wrap_half_turn(std::atan2(cy, cx));
    }

    const Box3D velo_box = fit_box(*cluster, label.class_name, priors, yaw, cfg.bottom_percentile);
    const Box3D cam_box = box_velo_to_cam(velo_box, calib);

    LabelRecord det;
    det.class_name = label.class_name;
    det.truncation = label.truncation;
    det.occlusion = label.occlusion;
    det.bbox2d = label.bbox2d;
    det.height = cam_box.dims().height;
    det.width = cam_box.dims().width;
    det.length = cam_box.dims().length;
    det.x = cam_box.center().x;
    det.y = cam_box.center().y;
    det.z = cam_box.center().z;
    det.rotation_y = cam_box.yaw();
    det.alpha = wrap_angle(det.rotation_y - std::atan2(det.x, det.z));
    det.score = 1.0 / (1.0 + median_of(std::move(depth)));
    detections.push_back(det);
  }
  return detections;
}

}  // namespace plidar
