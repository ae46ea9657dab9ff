#pragma once

#include <array>
#include <span>
#include <vector>

#include "plidar/kitti_io.hpp"
#include "plidar/point_cloud.hpp"

namespace plidar {

struct Vec2 {
  double x = 0, y = 0;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

// p' = rotation * p + translation
struct RigidTransform {
  Mat3 rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 translation;

  Vec3 apply(const Vec3& p) const noexcept;
  Vec3 rotate(const Vec3& d) const noexcept;
  RigidTransform inverse() const noexcept;
  Mat34 as_matrix() const noexcept;
};

// Forward map p_rect = R0 * (R_vc * p + t_vc) and its exact inverse.
RigidTransform velo_to_rect_transform(const Calibration& calib);
RigidTransform rect_to_velo_transform(const Calibration& calib);

// Pinhole back-projection: X = (u - cx) Z / fx, Y = (v - cy) Z / fy, Z = depth.
Vec3 unproject(double u, double v, double depth, const Calibration& calib);

Vec3 cam_to_velo(const Vec3& p, const Calibration& calib);
Vec3 velo_to_cam(const Vec3& p, const Calibration& calib);

// Intensity is carried through unchanged. Throws FrameMismatch on a wrongly
// tagged input.
PointCloud cam_to_velo(const PointCloud& points, const Calibration& calib);
PointCloud velo_to_cam(const PointCloud& points, const Calibration& calib);

struct BoxDims {
  double length = 0, width = 0, height = 0;
};

// Oriented 3D box.
//
// Camera frame follows KITTI labels: `center` is the bottom-face center, +y
// points down, yaw is rotation_y about the camera y axis.
// Velodyne frame: `center` is the center of volume, +z up, yaw about z.
class Box3D {
 public:
  // Throws InvalidBox unless all dims are > 0 and finite. Yaw is wrapped to
  // (-pi, pi].
  Box3D(Vec3 center, BoxDims dims, double yaw, Frame frame);

  const Vec3& center() const noexcept { return center_; }
  const BoxDims& dims() const noexcept { return dims_; }
  double yaw() const noexcept { return yaw_; }
  Frame frame() const noexcept { return frame_; }

  // Ground-plane center: (x, z) for camera, (x, y) for velodyne.
  Vec2 bev_center() const noexcept;
  // [bottom, top] along the frame's up axis (-y for camera, +z for velodyne).
  std::array<double, 2> vertical_extent() const noexcept;
  double volume() const noexcept { return dims_.length * dims_.width * dims_.height; }

 private:
  Vec3 center_;
  BoxDims dims_;
  double yaw_;
  Frame frame_;
};

double wrap_angle(double angle);  // to (-pi, pi]

Box3D box_from_label(const LabelRecord& label);
Box3D box_cam_to_velo(const Box3D& box, const Calibration& calib);
Box3D box_velo_to_cam(const Box3D& box, const Calibration& calib);

// Ground-plane coordinates of a frame-tagged point (see Box3D::bev_center).
Vec2 bev_coordinates(const Vec3& p, Frame frame) noexcept;

// Four footprint vertices, counter-clockwise in ground-plane coordinates.
std::array<Vec2, 4> box_corners_bev(const Box3D& box);

double polygon_signed_area(std::span<const Vec2> polygon);

// Area of a ∩ b for convex counter-clockwise polygons, by clipping `a`
// against each edge of `b`. Throws DegeneratePolygon for < 3 vertices or zero
// area input.
double convex_polygon_intersection_area(std::span<const Vec2> a, std::span<const Vec2> b);

// Footprint intersection area. Throws FrameMismatch.
double bev_intersection_area(const Box3D& a, const Box3D& b);

double iou_bev(const Box3D& a, const Box3D& b);
double iou_3d(const Box3D& a, const Box3D& b);

}  // namespace plidar
