#include <algorithm>

#include "plidar/simd/kernels.hpp"

namespace plidar::simd::scalar {
namespace {

void depth_mask(std::span<const float> depth, double lo, double hi, std::span<std::uint8_t> keep) {
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double d = depth[i];
    keep[i] = (d > lo && d < hi) ? 1 : 0;
  }
}

void unproject(std::span<const float> u, std::span<const float> v, std::span<const float> depth,
               const Pinhole& p, Soa3 out) {
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double z = depth[i];
    out.x[i] = ((static_cast<double>(u[i]) - p.cx) * z) / p.fx;
    out.y[i] = ((static_cast<double>(v[i]) - p.cy) * z) / p.fy;
    out.z[i] = z;
  }
}

void transform(ConstSoa3 in, const Affine& m, Soa3 out) {
  for (std::size_t i = 0; i < in.x.size(); ++i) {
    const double x = in.x[i], y = in.y[i], z = in.z[i];
    out.x[i] = ((m[0] * x + m[1] * y) + m[2] * z) + m[3];
    out.y[i] = ((m[4] * x + m[5] * y) + m[6] * z) + m[7];
    out.z[i] = ((m[8] * x + m[9] * y) + m[10] * z) + m[11];
  }
}

void project_inside(ConstSoa3 cam, const Pinhole& p, const Window& w,
                    std::span<std::uint8_t> inside) {
  for (std::size_t i = 0; i < cam.x.size(); ++i) {
    const double z = cam.z[i];
    const double u = (p.fx * cam.x[i]) / z + p.cx;
    const double v = (p.fy * cam.y[i]) / z + p.cy;
    inside[i] = (z > 0 && u >= w.left && u < w.right && v >= w.top && v < w.bottom) ? 1 : 0;
  }
}

void rgb_to_gray(std::span<const std::uint8_t> rgb, std::span<float> gray) {
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const float r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
    const float y = ((0.299f * r + 0.587f * g) + 0.114f * b) / 255.0f;
    gray[i] = std::min(std::max(y, 0.0f), 1.0f);
  }
}

}  // namespace

extern const KernelTable table;
const KernelTable table = {
    Isa::Scalar, depth_mask, unproject, transform, project_inside, rgb_to_gray,
};

}  // namespace plidar::simd::scalar
