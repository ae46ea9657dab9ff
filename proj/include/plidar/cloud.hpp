#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plidar/kitti_io.hpp"
#include "plidar/point_cloud.hpp"

namespace plidar {

enum class ChannelMode { Grayscale, MaskConfidence, Zero };
enum class SamplingMode { FullScene, MaskGuided };

std::string_view to_string(ChannelMode mode);
std::string_view to_string(SamplingMode mode);

struct VariantConfig {
  std::string name = "custom";
  ChannelMode channel_mode = ChannelMode::Grayscale;
  SamplingMode sampling_mode = SamplingMode::FullScene;
  std::size_t num_points = 16384;
  double depth_min = 1.0;
  double depth_max = 60.0;
  double mask_threshold = 0.5;
  std::uint64_t seed = 0;

  // Throws InvalidArgument on a violated invariant.
  void validate() const;

  // exp2 grayscale, exp4 mask confidence, exp5 mask-guided 40k, exp7 zero.
  static VariantConfig preset(std::string_view name);
};

// Per-frame seed, independent of batch composition.
constexpr std::uint64_t frame_seed(std::uint64_t global_seed, std::uint64_t frame_id) {
  return global_seed ^ frame_id;
}

using Rng = std::mt19937_64;

// Unbiased integer in [0, bound). Portable: depends only on the mt19937_64
// output sequence.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

// `n` indices into [0, count): without replacement (sorted ascending) when
// count >= n; otherwise all of [0, count) followed by n - count draws with
// replacement. Throws EmptyCloud when count == 0 and n > 0.
std::vector<std::size_t> budget_indices(std::size_t count, std::size_t n, Rng& rng);

PointCloud sample_to_budget(const PointCloud& points, std::size_t n, std::uint64_t seed);

struct MaskSelection {
  std::vector<std::size_t> indices;  // ascending
  std::size_t foreground = 0;
  std::size_t background = 0;
};

// Keeps every point with conf > threshold, fills the rest of the budget with
// uniformly drawn background; subsamples the foreground alone when it
// overflows the budget.
MaskSelection mask_guided_indices(std::span<const float> conf, const VariantConfig& cfg, Rng& rng);

PointCloud mask_guided_select(const PointCloud& points, std::span<const float> per_point_conf,
                              const VariantConfig& cfg);

struct BuildStats {
  std::size_t total_pixels = 0;
  std::size_t valid_pixels = 0;
  std::size_t selected_points = 0;  // after the sampling mode, before budget
  std::size_t foreground_points = 0;
  std::size_t output_points = 0;
};

struct PseudoLidarFrame {
  PointCloud cloud;                         // velodyne frame
  std::vector<std::uint32_t> source_pixel;  // row-major pixel index per point
  BuildStats stats;
};

// Depth raster -> filtered, unprojected, velodyne-frame cloud with the
// variant's intensity channel and sampling.
//
// `feature` supplies intensity: a Grayscale01 raster for Grayscale mode, a
// Confidence01 raster for MaskConfidence. MaskGuided sampling reads `guide`,
// or `feature` when `guide` is null and `feature` is a confidence raster.
PseudoLidarFrame build_pseudolidar(const ScalarRaster& depth, const ScalarRaster* feature,
                                   const Calibration& calib, const VariantConfig& cfg,
                                   const ScalarRaster* guide = nullptr);

struct InstanceMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;  // non-zero = inside
  float score = 0.f;
};

// Per-pixel max score over covering instances; 0 elsewhere.
ScalarRaster build_confidence_map(int width, int height, std::span<const InstanceMask> instances);

}  // namespace plidar
