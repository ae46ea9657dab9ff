#include "plidar/oracles/mc_iou.hpp"

#include <cmath>
#include <random>

namespace plidar::oracles {

namespace {

// Box in its own ground frame: axis a along length, b along width, h above
// the bottom face. Camera boxes follow the KITTI corner rotation about +y,
// velodyne boxes the usual rotation about +z.
struct LocalFrame {
  double gx, gy, bottom;
  double m00, m01, m10, m11;  // local (a, b) -> ground offset
  double hl, hw, height;

  explicit LocalFrame(const Box3D& box) {
    const Vec3& c = box.center();
    const double cs = std::cos(box.yaw()), sn = std::sin(box.yaw());
    hl = box.dims().length / 2;
    hw = box.dims().width / 2;
    height = box.dims().height;
    if (box.frame() == Frame::Camera) {
      gx = c.x, gy = c.z, bottom = -c.y;
      // x = cs a + sn b, z = -sn a + cs b
      m00 = cs, m01 = sn, m10 = -sn, m11 = cs;
    } else {
      gx = c.x, gy = c.y, bottom = c.z - height / 2;
      m00 = cs, m01 = -sn, m10 = sn, m11 = cs;
    }
  }

  void to_ground(double a, double b, double& x, double& y) const {
    x = gx + m00 * a + m01 * b;
    y = gy + m10 * a + m11 * b;
  }
  // Inverse of an orthonormal map is its transpose.
  bool footprint_contains(double x, double y) const {
    const double dx = x - gx, dy = y - gy;
    const double a = m00 * dx + m10 * dy, b = m01 * dx + m11 * dy;
    return std::abs(a) <= hl && std::abs(b) <= hw;
  }
  bool contains(double x, double y, double up) const {
    const double h = up - bottom;
    return h >= 0 && h <= height && footprint_contains(x, y);
  }
};

constexpr double kTwoPow32 = 0x1.0p-32;
constexpr double kTwoPow21 = 0x1.0p-21;

double fraction_2d(const LocalFrame& from, const LocalFrame& to, std::size_t grid,
                   std::mt19937_64& rng) {
  std::size_t hits = 0;
  const double step_a = 2 * from.hl / grid, step_b = 2 * from.hw / grid;
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      const std::uint64_t r = rng();
      const double a = -from.hl + (i + (r >> 32) * kTwoPow32) * step_a;
      const double b = -from.hw + (j + (r & 0xffffffffu) * kTwoPow32) * step_b;
      double x, y;
      from.to_ground(a, b, x, y);
      hits += to.footprint_contains(x, y);
    }
  }
  return static_cast<double>(hits) / static_cast<double>(grid * grid);
}

double fraction_3d(const LocalFrame& from, const LocalFrame& to, std::size_t grid,
                   std::mt19937_64& rng) {
  std::size_t hits = 0;
  const double step_a = 2 * from.hl / grid, step_b = 2 * from.hw / grid,
               step_h = from.height / grid;
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      for (std::size_t k = 0; k < grid; ++k) {
        const std::uint64_t r = rng();
        const double a = -from.hl + (i + (r >> 43) * kTwoPow21) * step_a;
        const double b = -from.hw + (j + ((r >> 22) & 0x1fffff) * kTwoPow21) * step_b;
        const double up = from.bottom + (k + (r & 0x1fffff) * kTwoPow21) * step_h;
        double x, y;
        from.to_ground(a, b, x, y);
        hits += to.contains(x, y, up);
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(grid * grid * grid);
}

double symmetric_iou(double size_a, double size_b, double frac_ab, double frac_ba) {
  const double inter = 0.5 * (size_a * frac_ab + size_b * frac_ba);
  const double uni = size_a + size_b - inter;
  return uni > 0 ? inter / uni : 0.0;
}

}  // namespace

bool inside_footprint(const Box3D& box, double gx, double gy) {
  return LocalFrame(box).footprint_contains(gx, gy);
}

bool inside_box(const Box3D& box, double gx, double gy, double up) {
  return LocalFrame(box).contains(gx, gy, up);
}

SampledIou sampled_iou(const Box3D& a, const Box3D& b, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const LocalFrame fa(a), fb(b);
  const std::size_t half = samples / 2;
  const auto grid2 = static_cast<std::size_t>(std::sqrt(static_cast<double>(half)));
  const auto grid3 = static_cast<std::size_t>(std::cbrt(static_cast<double>(half)) + 1e-9);

  SampledIou out;
  const double area_a = a.dims().length * a.dims().width;
  const double area_b = b.dims().length * b.dims().width;
  out.bev = symmetric_iou(area_a, area_b, fraction_2d(fa, fb, grid2, rng),
                          fraction_2d(fb, fa, grid2, rng));
  out.box3d = symmetric_iou(a.volume(), b.volume(), fraction_3d(fa, fb, grid3, rng),
                            fraction_3d(fb, fa, grid3, rng));
  return out;
}

}  // namespace plidar::oracles
