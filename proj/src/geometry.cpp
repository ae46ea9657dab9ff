#include "plidar/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plidar/simd/kernels.hpp"

namespace plidar {

Vec3 RigidTransform::apply(const Vec3& p) const noexcept {
  const Mat3& r = rotation;
  return {((r[0] * p.x + r[1] * p.y) + r[2] * p.z) + translation.x,
          ((r[3] * p.x + r[4] * p.y) + r[5] * p.z) + translation.y,
          ((r[6] * p.x + r[7] * p.y) + r[8] * p.z) + translation.z};
}

Vec3 RigidTransform::rotate(const Vec3& d) const noexcept {
  const Mat3& r = rotation;
  return {r[0] * d.x + r[1] * d.y + r[2] * d.z, r[3] * d.x + r[4] * d.y + r[5] * d.z,
          r[6] * d.x + r[7] * d.y + r[8] * d.z};
}

RigidTransform RigidTransform::inverse() const noexcept {
  // Calibration rotations are only orthonormal to ~1e-7, so invert the matrix
  // itself (adjugate / determinant) rather than transposing it.
  const Mat3& m = rotation;
  const double c00 = m[4] * m[8] - m[5] * m[7];
  const double c01 = m[5] * m[6] - m[3] * m[8];
  const double c02 = m[3] * m[7] - m[4] * m[6];
  const double det = m[0] * c00 + m[1] * c01 + m[2] * c02;
  RigidTransform inv;
  inv.rotation = {c00 / det,
                  (m[2] * m[7] - m[1] * m[8]) / det,
                  (m[1] * m[5] - m[2] * m[4]) / det,
                  c01 / det,
                  (m[0] * m[8] - m[2] * m[6]) / det,
                  (m[2] * m[3] - m[0] * m[5]) / det,
                  c02 / det,
                  (m[1] * m[6] - m[0] * m[7]) / det,
                  (m[0] * m[4] - m[1] * m[3]) / det};
  const Vec3 t = inv.rotate(translation);
  inv.translation = {-t.x, -t.y, -t.z};
  return inv;
}

Mat34 RigidTransform::as_matrix() const noexcept {
  const Mat3& r = rotation;
  return {r[0], r[1], r[2], translation.x, r[3], r[4], r[5], translation.y,
          r[6], r[7], r[8], translation.z};
}

RigidTransform velo_to_rect_transform(const Calibration& calib) {
  const Mat3& r0 = calib.r0_rect();
  const Mat34& tr = calib.tr_velo_to_cam();
  RigidTransform out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double acc = 0;
      for (int k = 0; k < 3; ++k) acc += r0[i * 3 + k] * tr[k * 4 + j];
      out.rotation[i * 3 + j] = acc;
    }
  }
  RigidTransform r0_only;
  r0_only.rotation = r0;
  out.translation = r0_only.rotate({tr[3], tr[7], tr[11]});
  return out;
}

RigidTransform rect_to_velo_transform(const Calibration& calib) {
  return velo_to_rect_transform(calib).inverse();
}

Vec3 unproject(double u, double v, double depth, const Calibration& calib) {
  if (!(depth > 0) || !std::isfinite(depth)) {
    throw Error(ErrorCode::NonPositiveDepth, "depth " + std::to_string(depth));
  }
  return {((u - calib.cx()) * depth) / calib.fx(), ((v - calib.cy()) * depth) / calib.fy(), depth};
}

Vec3 cam_to_velo(const Vec3& p, const Calibration& calib) {
  return rect_to_velo_transform(calib).apply(p);
}

Vec3 velo_to_cam(const Vec3& p, const Calibration& calib) {
  return velo_to_rect_transform(calib).apply(p);
}

namespace {

PointCloud transform_cloud(const PointCloud& in, const RigidTransform& t, Frame to) {
  const std::size_t n = in.size();
  std::vector<double> buf(6 * n);
  std::span<double> all(buf);
  simd::Soa3 src{all.subspan(0, n), all.subspan(n, n), all.subspan(2 * n, n)};
  simd::Soa3 dst{all.subspan(3 * n, n), all.subspan(4 * n, n), all.subspan(5 * n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    src.x[i] = in.points[i].x;
    src.y[i] = in.points[i].y;
    src.z[i] = in.points[i].z;
  }
  simd::active().transform({src.x, src.y, src.z}, t.as_matrix(), dst);
  PointCloud out;
  out.frame = to;
  out.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.points[i] = {static_cast<float>(dst.x[i]), static_cast<float>(dst.y[i]),
                     static_cast<float>(dst.z[i]), in.points[i].intensity};
  }
  return out;
}

}  // namespace

PointCloud cam_to_velo(const PointCloud& points, const Calibration& calib) {
  if (points.frame != Frame::Camera) {
    throw Error(ErrorCode::FrameMismatch, "cam_to_velo expects a camera-frame cloud");
  }
  return transform_cloud(points, rect_to_velo_transform(calib), Frame::Velodyne);
}

PointCloud velo_to_cam(const PointCloud& points, const Calibration& calib) {
  if (points.frame != Frame::Velodyne) {
    throw Error(ErrorCode::FrameMismatch, "velo_to_cam expects a velodyne-frame cloud");
  }
  return transform_cloud(points, velo_to_rect_transform(calib), Frame::Camera);
}

double wrap_angle(double angle) {
  constexpr double kTwoPi = 2 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

Box3D::Box3D(Vec3 center, BoxDims dims, double yaw, Frame frame)
    : center_(center), dims_(dims), yaw_(wrap_angle(yaw)), frame_(frame) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0; };
  if (!positive(dims.length) || !positive(dims.width) || !positive(dims.height)) {
    throw Error(ErrorCode::InvalidBox, "box dimensions must be positive");
  }
  if (!std::isfinite(center.x) || !std::isfinite(center.y) || !std::isfinite(center.z) ||
      !std::isfinite(yaw)) {
    throw Error(ErrorCode::InvalidBox, "box pose must be finite");
  }
}

Vec2 bev_coordinates(const Vec3& p, Frame frame) noexcept {
  return frame == Frame::Camera ? Vec2{p.x, p.z} : Vec2{p.x, p.y};
}

Vec2 Box3D::bev_center() const noexcept { return bev_coordinates(center_, frame_); }

std::array<double, 2> Box3D::vertical_extent() const noexcept {
  if (frame_ == Frame::Camera) {
    const double bottom = -center_.y;
    return {bottom, bottom + dims_.height};
  }
  return {center_.z - dims_.height / 2, center_.z + dims_.height / 2};
}

Box3D box_from_label(const LabelRecord& label) {
  return Box3D({label.x, label.y, label.z}, {label.length, label.width, label.height},
               label.rotation_y, Frame::Camera);
}

Box3D box_cam_to_velo(const Box3D& box, const Calibration& calib) {
  if (box.frame() != Frame::Camera) {
    throw Error(ErrorCode::FrameMismatch, "box_cam_to_velo expects a camera-frame box");
  }
  const RigidTransform t = rect_to_velo_transform(calib);
  const Vec3& c = box.center();
  const Vec3 center = t.apply({c.x, c.y - box.dims().height / 2, c.z});
  const Vec3 dir = t.rotate({std::cos(box.yaw()), 0, -std::sin(box.yaw())});
  return Box3D(center, box.dims(), std::atan2(dir.y, dir.x), Frame::Velodyne);
}

Box3D box_velo_to_cam(const Box3D& box, const Calibration& calib) {
  if (box.frame() != Frame::Velodyne) {
    throw Error(ErrorCode::FrameMismatch, "box_velo_to_cam expects a velodyne-frame box");
  }
  const RigidTransform t = velo_to_rect_transform(calib);
  const Vec3 c = t.apply(box.center());
  const Vec3 dir = t.rotate({std::cos(box.yaw()), std::sin(box.yaw()), 0});
  return Box3D({c.x, c.y + box.dims().height / 2, c.z}, box.dims(), std::atan2(-dir.z, dir.x),
               Frame::Camera);
}

std::array<Vec2, 4> box_corners_bev(const Box3D& box) {
  // Camera (x, z) turns by -rotation_y; velodyne (x, y) by +yaw.
  const double theta = box.frame() == Frame::Camera ? -box.yaw() : box.yaw();
  const double c = std::cos(theta), s = std::sin(theta);
  const double hl = box.dims().length / 2, hw = box.dims().width / 2;
  const Vec2 center = box.bev_center();
  const std::array<Vec2, 4> local = {{{hl, -hw}, {hl, hw}, {-hl, hw}, {-hl, -hw}}};
  std::array<Vec2, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = {center.x + c * local[i].x - s * local[i].y, center.y + s * local[i].x + c * local[i].y};
  }
  return out;
}

double polygon_signed_area(std::span<const Vec2> polygon) {
  double twice = 0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2& p = polygon[i];
    const Vec2& q = polygon[(i + 1) % polygon.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return twice / 2;
}

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

std::vector<Vec2> ccw_copy(std::span<const Vec2> poly) {
  if (poly.size() < 3) throw Error(ErrorCode::DegeneratePolygon, "fewer than 3 vertices");
  const double area = polygon_signed_area(poly);
  if (!(std::abs(area) > 0)) throw Error(ErrorCode::DegeneratePolygon, "zero area");
  std::vector<Vec2> out(poly.begin(), poly.end());
  if (area < 0) std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

double convex_polygon_intersection_area(std::span<const Vec2> a, std::span<const Vec2> b) {
  std::vector<Vec2> subject = ccw_copy(a);
  const std::vector<Vec2> clip = ccw_copy(b);

  std::vector<Vec2> next;
  for (std::size_t e = 0; e < clip.size() && subject.size() >= 3; ++e) {
    const Vec2& p1 = clip[e];
    const Vec2& p2 = clip[(e + 1) % clip.size()];
    next.clear();
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Vec2& cur = subject[i];
      const Vec2& prev = subject[(i + subject.size() - 1) % subject.size()];
      const double dc = cross(p1, p2, cur);
      const double dp = cross(p1, p2, prev);
      const bool cur_in = dc >= 0, prev_in = dp >= 0;
      if (cur_in != prev_in) {
        const double t = dp / (dp - dc);
        next.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
      }
      if (cur_in) next.push_back(cur);
    }
    subject.swap(next);
  }
  if (subject.size() < 3) return 0.0;
  const double area = polygon_signed_area(subject);
  return area > 0 ? area : 0.0;
}

double bev_intersection_area(const Box3D& a, const Box3D& b) {
  if (a.frame() != b.frame()) {
    throw Error(ErrorCode::FrameMismatch, "IoU between boxes in different frames");
  }
  const Vec2 ca = a.bev_center(), cb = b.bev_center();
  const double ra = std::hypot(a.dims().length, a.dims().width) / 2;
  const double rb = std::hypot(b.dims().length, b.dims().width) / 2;
  if (std::hypot(ca.x - cb.x, ca.y - cb.y) > ra + rb) return 0.0;
  const auto pa = box_corners_bev(a);
  const auto pb = box_corners_bev(b);
  return convex_polygon_intersection_area(pa, pb);
}

double iou_bev(const Box3D& a, const Box3D& b) {
  const double inter = bev_intersection_area(a, b);
  const double area_a = a.dims().length * a.dims().width;
  const double area_b = b.dims().length * b.dims().width;
  const double iou = inter / (area_a + area_b - inter);
  return std::clamp(iou, 0.0, 1.0);
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double inter_area = bev_intersection_area(a, b);
  const auto za = a.vertical_extent(), zb = b.vertical_extent();
  const double overlap = std::max(0.0, std::min(za[1], zb[1]) - std::max(za[0], zb[0]));
  const double inter = inter_area * overlap;
  const double iou = inter / (a.volume() + b.volume() - inter);
  return std::clamp(iou, 0.0, 1.0);
}

}  // namespace plidar
