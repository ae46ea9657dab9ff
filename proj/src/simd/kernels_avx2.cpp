#include <immintrin.h>

#include <algorithm>

#include "plidar/simd/kernels.hpp"

namespace plidar::simd::avx2 {
namespace {

void store_mask4(int bits, std::uint8_t* dst) {
  dst[0] = bits & 1;
  dst[1] = (bits >> 1) & 1;
  dst[2] = (bits >> 2) & 1;
  dst[3] = (bits >> 3) & 1;
}

void depth_mask(std::span<const float> depth, double lo, double hi, std::span<std::uint8_t> keep) {
  const std::size_t n = depth.size();
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_cvtps_pd(_mm_loadu_ps(depth.data() + i));
    const __m256d ok = _mm256_and_pd(_mm256_cmp_pd(d, vlo, _CMP_GT_OQ),
                                     _mm256_cmp_pd(d, vhi, _CMP_LT_OQ));
    store_mask4(_mm256_movemask_pd(ok), keep.data() + i);
  }
  for (; i < n; ++i) {
    const double d = depth[i];
    keep[i] = (d > lo && d < hi) ? 1 : 0;
  }
}

void unproject(std::span<const float> u, std::span<const float> v, std::span<const float> depth,
               const Pinhole& p, Soa3 out) {
  const std::size_t n = depth.size();
  const __m256d fx = _mm256_set1_pd(p.fx), fy = _mm256_set1_pd(p.fy);
  const __m256d cx = _mm256_set1_pd(p.cx), cy = _mm256_set1_pd(p.cy);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d z = _mm256_cvtps_pd(_mm_loadu_ps(depth.data() + i));
    const __m256d uu = _mm256_cvtps_pd(_mm_loadu_ps(u.data() + i));
    const __m256d vv = _mm256_cvtps_pd(_mm_loadu_ps(v.data() + i));
    _mm256_storeu_pd(out.x.data() + i, _mm256_div_pd(_mm256_mul_pd(_mm256_sub_pd(uu, cx), z), fx));
    _mm256_storeu_pd(out.y.data() + i, _mm256_div_pd(_mm256_mul_pd(_mm256_sub_pd(vv, cy), z), fy));
    _mm256_storeu_pd(out.z.data() + i, z);
  }
  for (; i < n; ++i) {
    const double z = depth[i];
    out.x[i] = ((static_cast<double>(u[i]) - p.cx) * z) / p.fx;
    out.y[i] = ((static_cast<double>(v[i]) - p.cy) * z) / p.fy;
    out.z[i] = z;
  }
}

inline __m256d affine_row(const double* row, __m256d x, __m256d y, __m256d z) {
  __m256d acc = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(row[0]), x),
                              _mm256_mul_pd(_mm256_set1_pd(row[1]), y));
  acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(row[2]), z));
  return _mm256_add_pd(acc, _mm256_set1_pd(row[3]));
}

void transform(ConstSoa3 in, const Affine& m, Soa3 out) {
  const std::size_t n = in.x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(in.x.data() + i);
    const __m256d y = _mm256_loadu_pd(in.y.data() + i);
    const __m256d z = _mm256_loadu_pd(in.z.data() + i);
    _mm256_storeu_pd(out.x.data() + i, affine_row(&m[0], x, y, z));
    _mm256_storeu_pd(out.y.data() + i, affine_row(&m[4], x, y, z));
    _mm256_storeu_pd(out.z.data() + i, affine_row(&m[8], x, y, z));
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
  const __m256d fx = _mm256_set1_pd(p.fx), fy = _mm256_set1_pd(p.fy);
  const __m256d cx = _mm256_set1_pd(p.cx), cy = _mm256_set1_pd(p.cy);
  const __m256d left = _mm256_set1_pd(w.left), right = _mm256_set1_pd(w.right);
  const __m256d top = _mm256_set1_pd(w.top), bottom = _mm256_set1_pd(w.bottom);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(cam.x.data() + i);
    const __m256d y = _mm256_loadu_pd(cam.y.data() + i);
    const __m256d z = _mm256_loadu_pd(cam.z.data() + i);
    const __m256d u = _mm256_add_pd(_mm256_div_pd(_mm256_mul_pd(fx, x), z), cx);
    const __m256d v = _mm256_add_pd(_mm256_div_pd(_mm256_mul_pd(fy, y), z), cy);
    __m256d ok = _mm256_cmp_pd(z, zero, _CMP_GT_OQ);
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(u, left, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(u, right, _CMP_LT_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(v, top, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(v, bottom, _CMP_LT_OQ));
    store_mask4(_mm256_movemask_pd(ok), inside.data() + i);
  }
  for (; i < n; ++i) {
    const double z = cam.z[i];
    const double u = (p.fx * cam.x[i]) / z + p.cx;
    const double v = (p.fy * cam.y[i]) / z + p.cy;
    inside[i] = (z > 0 && u >= w.left && u < w.right && v >= w.top && v < w.bottom) ? 1 : 0;
  }
}

void rgb_to_gray(std::span<const std::uint8_t> rgb, std::span<float> gray) {
  const std::size_t n = gray.size();
  const __m256i offsets = _mm256_setr_epi32(0, 3, 6, 9, 12, 15, 18, 21);
  const __m256i byte = _mm256_set1_epi32(0xff);
  const __m256 wr = _mm256_set1_ps(0.299f), wg = _mm256_set1_ps(0.587f), wb = _mm256_set1_ps(0.114f);
  const __m256 scale = _mm256_set1_ps(255.0f);
  const __m256 zero = _mm256_setzero_ps(), one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  // Each gather reads 4 bytes at 3*k, so the last lane touches byte 3*(i+7)+3;
  // stay one pixel short of the end.
  for (; i + 9 <= n; i += 8) {
    const __m256i px = _mm256_i32gather_epi32(
        reinterpret_cast<const int*>(rgb.data() + 3 * i), offsets, 1);
    const __m256 r = _mm256_cvtepi32_ps(_mm256_and_si256(px, byte));
    const __m256 g = _mm256_cvtepi32_ps(_mm256_and_si256(_mm256_srli_epi32(px, 8), byte));
    const __m256 b = _mm256_cvtepi32_ps(_mm256_and_si256(_mm256_srli_epi32(px, 16), byte));
    __m256 y = _mm256_add_ps(_mm256_mul_ps(wr, r), _mm256_mul_ps(wg, g));
    y = _mm256_div_ps(_mm256_add_ps(y, _mm256_mul_ps(wb, b)), scale);
    _mm256_storeu_ps(gray.data() + i, _mm256_min_ps(_mm256_max_ps(y, zero), one));
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
    Isa::Avx2, depth_mask, unproject, transform, project_inside, rgb_to_gray,
};

}  // namespace plidar::simd::avx2
