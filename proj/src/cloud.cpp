#include "plidar/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plidar/geometry.hpp"
#include "plidar/simd/kernels.hpp"

namespace plidar {

std::string_view to_string(ChannelMode mode) {
  switch (mode) {
    case ChannelMode::Grayscale: return "grayscale";
    case ChannelMode::MaskConfidence: return "mask_confidence";
    case ChannelMode::Zero: return "zero";
  }
  return "unknown";
}

std::string_view to_string(SamplingMode mode) {
  return mode == SamplingMode::FullScene ? "full_scene" : "mask_guided";
}

void VariantConfig::validate() const {
  if (num_points == 0) throw Error(ErrorCode::InvalidArgument, "num_points must be positive");
  if (!std::isfinite(depth_min) || !std::isfinite(depth_max) || !(depth_min < depth_max)) {
    throw Error(ErrorCode::InvalidArgument, "depth_min must be below depth_max");
  }
  if (!(mask_threshold >= 0 && mask_threshold <= 1)) {
    throw Error(ErrorCode::InvalidArgument, "mask_threshold must lie in [0, 1]");
  }
}

VariantConfig VariantConfig::preset(std::string_view name) {
  VariantConfig cfg;
  cfg.name = std::string(name);
  if (name == "exp2") {
    cfg.channel_mode = ChannelMode::Grayscale;
  } else if (name == "exp4") {
    cfg.channel_mode = ChannelMode::MaskConfidence;
  } else if (name == "exp5") {
    cfg.channel_mode = ChannelMode::Grayscale;
    cfg.sampling_mode = SamplingMode::MaskGuided;
    cfg.num_points = 40000;
  } else if (name == "exp7") {
    cfg.channel_mode = ChannelMode::Zero;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown variant '" + std::string(name) + "'");
  }
  return cfg;
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  // Lemire's multiply-shift with rejection.
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::vector<std::size_t> budget_indices(std::size_t count, std::size_t n, Rng& rng) {
  if (n == 0) return {};
  if (count == 0) throw Error(ErrorCode::EmptyCloud, "cannot sample from zero points");
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (count == n) return idx;
  if (count > n) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + uniform_index(rng, count - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    return idx;
  }
  idx.reserve(n);
  for (std::size_t i = count; i < n; ++i) idx.push_back(uniform_index(rng, count));
  return idx;
}

namespace {

PointCloud gather(const PointCloud& points, std::span<const std::size_t> idx) {
  PointCloud out;
  out.frame = points.frame;
  out.points.reserve(idx.size());
  for (std::size_t i : idx) out.points.push_back(points.points[i]);
  return out;
}

}  // namespace

PointCloud sample_to_budget(const PointCloud& points, std::size_t n, std::uint64_t seed) {
  if (points.empty()) throw Error(ErrorCode::EmptyCloud, "sample_to_budget on an empty cloud");
  Rng rng(seed);
  return gather(points, budget_indices(points.size(), n, rng));
}

MaskSelection mask_guided_indices(std::span<const float> conf, const VariantConfig& cfg, Rng& rng) {
  std::vector<std::size_t> fg, bg;
  for (std::size_t i = 0; i < conf.size(); ++i) {
    (conf[i] > cfg.mask_threshold ? fg : bg).push_back(i);
  }
  MaskSelection sel;
  if (fg.size() >= cfg.num_points) {
    for (std::size_t k : budget_indices(fg.size(), cfg.num_points, rng)) sel.indices.push_back(fg[k]);
    sel.foreground = sel.indices.size();
    return sel;
  }
  sel.indices = fg;
  sel.foreground = fg.size();
  const std::size_t want = std::min(cfg.num_points - fg.size(), bg.size());
  for (std::size_t k : budget_indices(bg.size(), want, rng)) sel.indices.push_back(bg[k]);
  sel.background = want;
  std::sort(sel.indices.begin(), sel.indices.end());
  return sel;
}

PointCloud mask_guided_select(const PointCloud& points, std::span<const float> per_point_conf,
                              const VariantConfig& cfg) {
  if (per_point_conf.size() != points.size()) {
    throw Error(ErrorCode::LengthMismatch, "confidence count differs from point count");
  }
  cfg.validate();
  Rng rng(cfg.seed);
  return gather(points, mask_guided_indices(per_point_conf, cfg, rng).indices);
}

namespace {

const ScalarRaster& require_raster(const ScalarRaster* raster, RasterSemantics semantics,
                                   const ScalarRaster& depth, std::string_view role) {
  if (!raster || raster->semantics != semantics) {
    throw Error(ErrorCode::MissingFeatureRaster,
                std::string(role) + " needs a " + std::string(to_string(semantics)) + " raster");
  }
  if (raster->width != depth.width || raster->height != depth.height) {
    throw Error(ErrorCode::RasterSizeMismatch, std::string(role) + " raster size differs from depth");
  }
  return *raster;
}

}  // namespace

PseudoLidarFrame build_pseudolidar(const ScalarRaster& depth, const ScalarRaster* feature,
                                   const Calibration& calib, const VariantConfig& cfg,
                                   const ScalarRaster* guide) {
  cfg.validate();
  if (depth.semantics != RasterSemantics::DepthMeters) {
    throw Error(ErrorCode::InvalidArgument, "depth raster must carry depth_m semantics");
  }
  if (depth.values.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    throw Error(ErrorCode::LengthMismatch, "depth raster values do not match width x height");
  }

  const ScalarRaster* intensity = nullptr;
  if (cfg.channel_mode == ChannelMode::Grayscale) {
    intensity = &require_raster(feature, RasterSemantics::Grayscale01, depth, "grayscale channel");
  } else if (cfg.channel_mode == ChannelMode::MaskConfidence) {
    intensity = &require_raster(feature, RasterSemantics::Confidence01, depth, "confidence channel");
  } else if (feature && (feature->width != depth.width || feature->height != depth.height)) {
    throw Error(ErrorCode::RasterSizeMismatch, "feature raster size differs from depth");
  }
  const ScalarRaster* conf = nullptr;
  if (cfg.sampling_mode == SamplingMode::MaskGuided) {
    const ScalarRaster* source = guide;
    if (!source && feature && feature->semantics == RasterSemantics::Confidence01) source = feature;
    conf = &require_raster(source, RasterSemantics::Confidence01, depth, "mask-guided sampling");
  }

  const simd::KernelTable& k = simd::active();
  PseudoLidarFrame frame;
  frame.stats.total_pixels = depth.values.size();

  std::vector<std::uint8_t> keep(depth.values.size());
  k.depth_mask(depth.values, cfg.depth_min, cfg.depth_max, keep);
  std::vector<std::uint32_t> valid;
  valid.reserve(depth.values.size() / 2);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) valid.push_back(static_cast<std::uint32_t>(i));
  }
  frame.stats.valid_pixels = valid.size();
  if (valid.empty()) {
    throw Error(ErrorCode::EmptyCloud, "no pixel passes the depth filter");
  }

  // Selection only looks at pixel indices and confidences, so it runs before
  // the per-point geometry; the budgeted set is what gets unprojected.
  Rng rng(cfg.seed);
  std::vector<std::size_t> selected;
  if (conf) {
    std::vector<float> point_conf(valid.size());
    for (std::size_t i = 0; i < valid.size(); ++i) point_conf[i] = conf->values[valid[i]];
    MaskSelection sel = mask_guided_indices(point_conf, cfg, rng);
    frame.stats.foreground_points = sel.foreground;
    selected = std::move(sel.indices);
  } else {
    selected.resize(valid.size());
    std::iota(selected.begin(), selected.end(), std::size_t{0});
  }
  frame.stats.selected_points = selected.size();
  const std::vector<std::size_t> budget = budget_indices(selected.size(), cfg.num_points, rng);

  const std::size_t n = budget.size();
  frame.source_pixel.resize(n);
  std::vector<float> us(n), vs(n), ds(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t pix = valid[selected[budget[i]]];
    frame.source_pixel[i] = pix;
    us[i] = static_cast<float>(pix % static_cast<std::uint32_t>(depth.width));
    vs[i] = static_cast<float>(pix / static_cast<std::uint32_t>(depth.width));
    ds[i] = depth.values[pix];
  }

  std::vector<double> buf(6 * n);
  std::span<double> all(buf);
  simd::Soa3 cam{all.subspan(0, n), all.subspan(n, n), all.subspan(2 * n, n)};
  simd::Soa3 velo{all.subspan(3 * n, n), all.subspan(4 * n, n), all.subspan(5 * n, n)};
  k.unproject(us, vs, ds, {calib.fx(), calib.fy(), calib.cx(), calib.cy()}, cam);
  k.transform({cam.x, cam.y, cam.z}, rect_to_velo_transform(calib).as_matrix(), velo);

  frame.cloud.frame = Frame::Velodyne;
  frame.cloud.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    float value = 0.f;
    if (intensity) {
      value = intensity->values[frame.source_pixel[i]];
      value = std::isnan(value) ? 0.f : std::clamp(value, 0.f, 1.f);
    }
    frame.cloud.points[i] = {static_cast<float>(velo.x[i]), static_cast<float>(velo.y[i]),
                             static_cast<float>(velo.z[i]), value};
  }
  frame.stats.output_points = n;
  return frame;
}

ScalarRaster build_confidence_map(int width, int height, std::span<const InstanceMask> instances) {
  ScalarRaster out = ScalarRaster::filled(width, height, RasterSemantics::Confidence01, 0.f);
  for (const auto& inst : instances) {
    if (inst.width != width || inst.height != height || inst.mask.size() != out.values.size()) {
      throw Error(ErrorCode::RasterSizeMismatch, "instance mask size differs from the map");
    }
    if (!(inst.score >= 0.f && inst.score <= 1.f)) {
      throw Error(ErrorCode::InvalidArgument, "instance score outside [0, 1]");
    }
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      if (inst.mask[i]) out.values[i] = std::max(out.values[i], inst.score);
    }
  }
  return out;
}

}  // namespace plidar
