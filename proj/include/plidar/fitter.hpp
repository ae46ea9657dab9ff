#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "plidar/geometry.hpp"
#include "plidar/kitti_io.hpp"

namespace plidar {

struct ClassPrior {
  double length = 0, width = 0, height = 0;
  std::size_t count = 0;
};

class SizePriors {
 public:
  void set(ObjectClass cls, const ClassPrior& prior);
  bool contains(ObjectClass cls) const { return priors_.count(cls) != 0; }
  // Throws UnknownClass.
  const ClassPrior& at(ObjectClass cls) const;
  const std::map<ObjectClass, ClassPrior>& all() const noexcept { return priors_; }

 private:
  std::map<ObjectClass, ClassPrior> priors_;
};

// Mean (h, w, l) per requested class. Throws NoSamplesForClass.
SizePriors compute_size_priors(std::span<const LabelRecord> labels,
                               std::span<const ObjectClass> classes);

enum class ClusterSelection { LargestCluster, NearestMedianDepth };

struct FitterConfig {
  double cluster_epsilon = 0.5;
  std::size_t cluster_min_points = 10;
  std::size_t min_frustum_points = 10;
  ClusterSelection cluster_selection = ClusterSelection::NearestMedianDepth;
  // Eigenvalue ratio below which the PCA axis is treated as noise.
  double isotropy_ratio = 1.2;
  double bottom_percentile = 5.0;

  void validate() const;
};

struct ImageSize {
  int width = 0, height = 0;
};

// Points whose camera projection lands in [left, right) x [top, bottom) with
// Z > 0. The box is clamped to the image when `image` is given.
PointCloud frustum_points(const PointCloud& cloud, const BBox2D& box, const Calibration& calib,
                          std::optional<ImageSize> image = std::nullopt);

// Forward distance: camera z or velodyne x.
double forward_depth(const PointXYZI& p, Frame frame) noexcept;

// Density clustering over (x, y, z): label per point, -1 for noise. Core
// points have >= min_points neighbors within eps, counting themselves.
std::vector<int> density_cluster(const PointCloud& points, double eps, std::size_t min_points);

std::optional<PointCloud> cluster_and_select(const PointCloud& points, const FitterConfig& cfg);

struct YawEstimate {
  double yaw = 0;             // (-pi/2, pi/2]
  double eigen_ratio = 0;     // major / minor eigenvalue, inf for a line
  bool degenerate = false;    // all points coincident
};

YawEstimate pca_yaw(std::span<const Vec2> points);

// Linear-interpolated percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

// Velodyne-frame box: dims from the prior, footprint at the cluster centroid,
// bottom at the configured percentile of z.
Box3D fit_box(const PointCloud& cluster, ObjectClass cls, const SizePriors& priors, double yaw,
              double bottom_percentile = 5.0);

// Heuristic detector over oracle 2D boxes. Output is camera-frame labels
// with score 1 / (1 + median cluster depth).
std::vector<LabelRecord> exp0_detect(const PointCloud& cloud, std::span<const LabelRecord> gt,
                                     const Calibration& calib, const SizePriors& priors,
                                     const FitterConfig& cfg,
                                     std::optional<ImageSize> image = std::nullopt);

}  // namespace plidar
