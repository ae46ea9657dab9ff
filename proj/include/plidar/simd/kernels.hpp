#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

// Data-parallel inner loops of the pipeline. Every kernel has a scalar
// reference and optional AVX2 / NEON variants. All variants perform the same
// IEEE operations in the same order, so results are bit-identical across ISAs.
namespace plidar::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct Pinhole {
  double fx, fy, cx, cy;
};

// Row-major 3x4 affine map.
using Affine = std::array<double, 12>;

// Half-open pixel window [left, right) x [top, bottom).
struct Window {
  double left, top, right, bottom;
};

struct Soa3 {
  std::span<double> x, y, z;
};

struct ConstSoa3 {
  std::span<const double> x, y, z;
};

struct KernelTable {
  Isa isa;

  // keep[i] = lo < depth[i] < hi, compared in f64. NaN is never kept.
  void (*depth_mask)(std::span<const float> depth, double lo, double hi,
                     std::span<std::uint8_t> keep);

  // x = ((u - cx) * z) / fx, y = ((v - cy) * z) / fy, z = depth.
  void (*unproject)(std::span<const float> u, std::span<const float> v,
                    std::span<const float> depth, const Pinhole& pinhole, Soa3 out);

  // out = M[:, :3] * p + M[:, 3], accumulated left to right.
  void (*transform)(ConstSoa3 in, const Affine& m, Soa3 out);

  // inside[i] = z > 0 and the projection ((fx*x)/z + cx, (fy*y)/z + cy)
  // lies in `window`.
  void (*project_inside)(ConstSoa3 cam, const Pinhole& pinhole, const Window& window,
                         std::span<std::uint8_t> inside);

  // gray = clamp(((0.299 R + 0.587 G) + 0.114 B) / 255, 0, 1) in f32.
  void (*rgb_to_gray)(std::span<const std::uint8_t> rgb, std::span<float> gray);
};

// Best table for the running CPU. PLIDAR_SIMD=scalar|avx2|neon overrides
// (falls back to scalar when the requested ISA is unavailable).
const KernelTable& active();

// nullptr when the ISA was not compiled in or the CPU lacks it.
const KernelTable* table_for(Isa isa);

std::vector<Isa> available_isas();

namespace scalar {
extern const KernelTable table;
}

}  // namespace plidar::simd
