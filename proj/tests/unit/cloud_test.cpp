#include <algorithm>
#include <cstring>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "plidar/cloud.hpp"
#include "plidar/geometry.hpp"
#include "plidar/oracles/synthetic.hpp"

using namespace plidar;
using testing::error_of;

namespace {

ScalarRaster ramp_depth(int w, int h) {
  ScalarRaster d = ScalarRaster::filled(w, h, RasterSemantics::DepthMeters, 0.f);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) d.at(u, v) = 0.5f + 0.25f * static_cast<float>((u + 3 * v) % 300);
  }
  return d;
}

}  // namespace

TEST_SUITE("cloud") {
  TEST_CASE("variant presets") {
    const auto e2 = VariantConfig::preset("exp2");
    CHECK(e2.channel_mode == ChannelMode::Grayscale);
    CHECK(e2.sampling_mode == SamplingMode::FullScene);
    CHECK(e2.num_points == 16384);
    CHECK(e2.depth_min == 1.0);
    CHECK(e2.depth_max == 60.0);
    CHECK(VariantConfig::preset("exp4").channel_mode == ChannelMode::MaskConfidence);
    const auto e5 = VariantConfig::preset("exp5");
    CHECK(e5.sampling_mode == SamplingMode::MaskGuided);
    CHECK(e5.num_points == 40000);
    CHECK(e5.mask_threshold == 0.5);
    CHECK(VariantConfig::preset("exp7").channel_mode == ChannelMode::Zero);
    CHECK(error_of([] { VariantConfig::preset("exp9"); }) == ErrorCode::InvalidArgument);
    VariantConfig bad = e2;
    bad.depth_min = 70;
    CHECK(error_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("frame seeds and bounded integers") {
    CHECK(frame_seed(0, 8) == 8);
    CHECK(frame_seed(5, 3) == 6);
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) CHECK(uniform_index(rng, 7) < 7);
    Rng a(42), b(42);
    CHECK(uniform_index(a, 1000003) == uniform_index(b, 1000003));
  }

  TEST_CASE("budget indices") {
    Rng rng(9);
    const auto sub = budget_indices(1000, 100, rng);
    CHECK(sub.size() == 100);
    CHECK(std::is_sorted(sub.begin(), sub.end()));
    CHECK(std::set<std::size_t>(sub.begin(), sub.end()).size() == 100);
    CHECK(sub.back() < 1000);

    const auto all = budget_indices(10, 10, rng);
    for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);

    const auto padded = budget_indices(5, 12, rng);
    REQUIRE(padded.size() == 12);
    for (std::size_t i = 0; i < 5; ++i) CHECK(padded[i] == i);
    for (std::size_t i = 5; i < 12; ++i) CHECK(padded[i] < 5);

    CHECK(error_of([&] { budget_indices(0, 3, rng); }) == ErrorCode::EmptyCloud);
    CHECK(budget_indices(0, 0, rng).empty());
  }

  TEST_CASE("mask-guided selection keeps the foreground") {
    std::vector<float> conf(1000, 0.f);
    for (int i = 0; i < 50; ++i) conf[i * 20] = 0.9f;
    conf[1] = 0.5f;  // at the threshold: background
    VariantConfig cfg = VariantConfig::preset("exp5");
    cfg.num_points = 200;
    Rng rng(3);
    const auto sel = mask_guided_indices(conf, cfg, rng);
    CHECK(sel.foreground == 50);
    CHECK(sel.indices.size() == 200);
    for (int i = 0; i < 50; ++i) {
      CHECK(std::binary_search(sel.indices.begin(), sel.indices.end(), std::size_t(i * 20)));
    }

    cfg.num_points = 20;  // foreground alone overflows the budget
    const auto over = mask_guided_indices(conf, cfg, rng);
    CHECK(over.indices.size() == 20);
    for (auto i : over.indices) CHECK(conf[i] > 0.5f);

    PointCloud pts{Frame::Velodyne, std::vector<PointXYZI>(10)};
    CHECK(error_of([&] { mask_guided_select(pts, std::vector<float>(9), cfg); }) ==
          ErrorCode::LengthMismatch);
  }

  TEST_CASE("build: budget, determinism and depth filter") {
    const Calibration calib = oracles::kitti_like_calibration();
    const ScalarRaster depth = ramp_depth(300, 100);
    VariantConfig cfg = VariantConfig::preset("exp7");
    cfg.seed = 17;
    const auto a = build_pseudolidar(depth, nullptr, calib, cfg);
    const auto b = build_pseudolidar(depth, nullptr, calib, cfg);
    CHECK(a.cloud.frame == Frame::Velodyne);
    CHECK(a.cloud.points.size() == 16384);
    CHECK(a.stats.output_points == 16384);
    CHECK(a.stats.total_pixels == 30000);
    CHECK(std::memcmp(a.cloud.points.data(), b.cloud.points.data(), 16384 * sizeof(PointXYZI)) == 0);
    for (std::size_t i = 0; i < a.cloud.points.size(); ++i) {
      const float d = depth.values[a.source_pixel[i]];
      CHECK((d > 1.f && d < 60.f));
      CHECK(a.cloud.points[i].intensity == 0.f);
    }
    cfg.seed = 18;
    const auto c = build_pseudolidar(depth, nullptr, calib, cfg);
    CHECK(std::memcmp(a.cloud.points.data(), c.cloud.points.data(), 16384 * sizeof(PointXYZI)) != 0);
  }

  TEST_CASE("build: points land where the pixel says") {
    const Calibration calib = oracles::kitti_like_calibration();
    ScalarRaster depth = ScalarRaster::filled(40, 30, RasterSemantics::DepthMeters, 0.f);
    depth.at(7, 11) = 20.f;
    VariantConfig cfg = VariantConfig::preset("exp7");
    cfg.num_points = 1;
    const auto f = build_pseudolidar(depth, nullptr, calib, cfg);
    REQUIRE(f.cloud.points.size() == 1);
    CHECK(f.source_pixel[0] == 11 * 40 + 7);
    const Vec3 expect = cam_to_velo(unproject(7, 11, 20, calib), calib);
    CHECK(f.cloud.points[0].x == doctest::Approx(expect.x).epsilon(1e-6));
    CHECK(f.cloud.points[0].y == doctest::Approx(expect.y).epsilon(1e-6));
    CHECK(f.cloud.points[0].z == doctest::Approx(expect.z).epsilon(1e-6));
  }

  TEST_CASE("build: intensity channels") {
    const Calibration calib = oracles::kitti_like_calibration();
    const ScalarRaster depth = ramp_depth(200, 100);
    ScalarRaster gray = ScalarRaster::filled(200, 100, RasterSemantics::Grayscale01, 0.25f);
    ScalarRaster conf = ScalarRaster::filled(200, 100, RasterSemantics::Confidence01, 0.75f);
    VariantConfig cfg = VariantConfig::preset("exp2");
    const auto g = build_pseudolidar(depth, &gray, calib, cfg);
    for (const auto& p : g.cloud.points) CHECK(p.intensity == 0.25f);
    cfg = VariantConfig::preset("exp4");
    const auto m = build_pseudolidar(depth, &conf, calib, cfg);
    for (const auto& p : m.cloud.points) CHECK(p.intensity == 0.75f);

    CHECK(error_of([&] { build_pseudolidar(depth, nullptr, calib, cfg); }) ==
          ErrorCode::MissingFeatureRaster);
    CHECK(error_of([&] { build_pseudolidar(depth, &gray, calib, cfg); }) ==
          ErrorCode::MissingFeatureRaster);
    ScalarRaster small = ScalarRaster::filled(20, 10, RasterSemantics::Confidence01, 0.f);
    CHECK(error_of([&] { build_pseudolidar(depth, &small, calib, cfg); }) ==
          ErrorCode::RasterSizeMismatch);
    cfg = VariantConfig::preset("exp5");
    CHECK(error_of([&] { build_pseudolidar(depth, &gray, calib, cfg); }) ==
          ErrorCode::MissingFeatureRaster);
    const auto guided = build_pseudolidar(depth, &gray, calib, cfg, &conf);
    CHECK(guided.cloud.points.size() == 40000);
  }

  TEST_CASE("build: no valid depth") {
    const Calibration calib = oracles::kitti_like_calibration();
    const ScalarRaster depth = ScalarRaster::filled(10, 10, RasterSemantics::DepthMeters, 70.f);
    CHECK(error_of([&] { build_pseudolidar(depth, nullptr, calib, VariantConfig::preset("exp7")); }) ==
          ErrorCode::EmptyCloud);
  }

  TEST_CASE("confidence map takes the per-pixel max") {
    InstanceMask a{3, 1, {1, 1, 0}, 0.6f};
    InstanceMask b{3, 1, {0, 1, 1}, 0.8f};
    const std::vector<InstanceMask> both = {a, b};
    const ScalarRaster m = build_confidence_map(3, 1, both);
    CHECK(m.semantics == RasterSemantics::Confidence01);
    CHECK(m.values == std::vector<float>{0.6f, 0.8f, 0.8f});
    CHECK(build_confidence_map(2, 2, {}).values == std::vector<float>(4, 0.f));
    const std::vector<InstanceMask> wrong = {InstanceMask{2, 1, {1, 1}, 0.5f}};
    CHECK(error_of([&] { build_confidence_map(3, 1, wrong); }) == ErrorCode::RasterSizeMismatch);
  }
}
