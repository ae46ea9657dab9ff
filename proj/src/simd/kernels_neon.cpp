#include <arm_neon.h>

#include <algorithm>

#include "plidar/simd/kernels.hpp"

namespace plidar::simd::neon {
namespace {

void store_mask2(uint64x2_t ok, std::uint8_t* dst) {
  dst[0] = vgetq_lane_u64(ok, 0) ? 1 : 0;
  dst[1] = vgetq_lane_u64(ok, 1) ? 1 : 0;
}

void depth_mask(std::span<const float> depth, double lo, double hi, std::span<std::uint8_t> keep) {
  const std::size_t n = depth.size();
  const float64x2_t vlo = vdupq_n_f64(lo), vhi = vdupq_n_f64(hi);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vcvt_f64_f32(vld1_f32(depth.data() + i));
    store_mask2(vandq_u64(vcgtq_f64(d, vlo), vcltq_f64(d, vhi)), keep.data() + i);
  }
  for (; i < n; ++i) {
    const double d = depth[i];
    keep[i] = (d > lo && d < hi) ? 1 : 0;
  }
}

void unproject(std::span<const float> u, std::span<const float> v, std::span<const float> depth,
               const Pinhole& p, Soa3 out) {
  const std::size_t n = depth.size();
  const float64x2_t fx = vdupq_n_f64(p.fx), fy = vdupq_n_f64(p.fy);
  const float64x2_t cx = vdupq_n_f64(p.cx), cy = vdupq_n_f64(p.cy);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t z = vcvt_f64_f32(vld1_f32(depth.data() + i));
    const float64x2_t uu = vcvt_f64_f32(vld1_f32(u.data() + i));
    const float64x2_t vv = vcvt_f64_f32(vld1_f32(v.data() + i));
    vst1q_f64(out.x.data() + i, vdivq_f64(vmulq_f64(vsubq_f64(uu, cx), z), fx));
    vst1q_f64(out.y.data() + i, vdivq_f64(vmulq_f64(vsubq_f64(vv, cy), z), fy));
    vst1q_f64(out.z.data() + i, z);
  }
  for (; i < n; ++i) {
    const double z = depth[i];
    out.x[i] = ((static_cast<double>(u[i]) - p.cx) * z) / p.fx;
    out.y[i] = ((static_cast<double>(v[i]) - p.cy) * z) / p.fy;
    out.z[i] = z;
  }
}

// Separate multiply and add: a fused vfmaq would round differently from the
// scalar reference.
inline float64x2_t affine_row(const double* row, float64x2_t x, float64x2_t y, float64x2_t z) {
  float64x2_t acc = vaddq_f64(vmulq_f64(vdupq_n_f64(row[0]), x), vmulq_f64(vdupq_n_f64(row[1]), y));
  acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(row[2]), z));
  return vaddq_f64(acc, vdupq_n_f64(row[3]));
}

void transform(ConstSoa3 in, const Affine& m, Soa3 out) {
  const std::size_t n = in.x.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(in.x.data() + i);
    const float64x2_t y = vld1q_f64(in.y.data() + i);
    const float64x2_t z = vld1q_f64(in.z.data() + i);
    vst1q_f64(out.x.data() + i, affine_row(&m[0], x, y, z));
    vst1q_f64(out.y.data() + i, affine_row(&m[4], x, y, z));
    vst1q_f64(out.z.data() + i, affine_row(&m[8], x, y, z));
  }
  for (; i < n; ++i) {
    const double x = in.x[i], y = in.y[i], z = in.z[i];
    out.x[i] = ((m[0] * x + m[1] * y) + m[2] * z) + m[3];
    out.y[i] = ((m[4] * x + m[5] * y) + m[6] * z) + m[7];
    out.z[i] = ((m[8] * x + m[9] * y) + m[10] * z) + m[11];
  }
}

void project_inside(ConstSoa3 cam, const Pinhole& p, const Window& w,
                    std::span<std::uint8_t> inside) {
  const std::size_t n = cam.x.size();
  const float64x2_t fx = vdupq_n_f64(p.fx), fy = vdupq_n_f64(p.fy);
  const float64x2_t cx = vdupq_n_f64(p.cx), cy = vdupq_n_f64(p.cy);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(cam.x.data() + i);
    const float64x2_t y = vld1q_f64(cam.y.data() + i);
    const float64x2_t z = vld1q_f64(cam.z.data() + i);
    const float64x2_t u = vaddq_f64(vdivq_f64(vmulq_f64(fx, x), z), cx);
    const float64x2_t v = vaddq_f64(vdivq_f64(vmulq_f64(fy, y), z), cy);
    uint64x2_t ok = vcgtq_f64(z, vdupq_n_f64(0.0));
    ok = vandq_u64(ok, vcgeq_f64(u, vdupq_n_f64(w.left)));
    ok = vandq_u64(ok, vcltq_f64(u, vdupq_n_f64(w.right)));
    ok = vandq_u64(ok, vcgeq_f64(v, vdupq_n_f64(w.top)));
    ok = vandq_u64(ok, vcltq_f64(v, vdupq_n_f64(w.bottom)));
    store_mask2(ok, inside.data() + i);
  }
  for (; i < n; ++i) {
    const double z = cam.z[i];
    const double u = (p.fx * cam.x[i]) / z + p.cx;
    const double v = (p.fy * cam.y[i]) / z + p.cy;
    inside[i] = (z > 0 && u >= w.left && u < w.right && v >= w.top && v < w.bottom) ? 1 : 0;
  }
}

inline float32x4_t luma4(uint16x4_t r, uint16x4_t g, uint16x4_t b) {
  const float32x4_t fr = vcvtq_f32_u32(vmovl_u16(r));
  const float32x4_t fg = vcvtq_f32_u32(vmovl_u16(g));
  const float32x4_t fb = vcvtq_f32_u32(vmovl_u16(b));
  float32x4_t y = vaddq_f32(vmulq_f32(vdupq_n_f32(0.299f), fr), vmulq_f32(vdupq_n_f32(0.587f), fg));
  y = vdivq_f32(vaddq_f32(y, vmulq_f32(vdupq_n_f32(0.114f), fb)), vdupq_n_f32(255.0f));
  return vminq_f32(vmaxq_f32(y, vdupq_n_f32(0.0f)), vdupq_n_f32(1.0f));
}

void rgb_to_gray(std::span<const std::uint8_t> rgb, std::span<float> gray) {
  const std::size_t n = gray.size();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const uint8x8x3_t px = vld3_u8(rgb.data() + 3 * i);
    const uint16x8_t r = vmovl_u8(px.val[0]), g = vmovl_u8(px.val[1]), b = vmovl_u8(px.val[2]);
    vst1q_f32(gray.data() + i, luma4(vget_low_u16(r), vget_low_u16(g), vget_low_u16(b)));
    vst1q_f32(gray.data() + i + 4, luma4(vget_high_u16(r), vget_high_u16(g), vget_high_u16(b)));
  }
  for (; i < n; ++i) {
    const float r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
    const float y = ((0.299f * r + 0.587f * g) + 0.114f * b) / 255.0f;
    gray[i] = std::min(std::max(y, 0.0f), 1.0f);
  }
}

}  // namespace

extern const KernelTable table;
const KernelTable table = {
    Isa::Neon, depth_mask, unproject, transform, project_inside, rgb_to_gray,
};

}  // namespace plidar::simd::neon
