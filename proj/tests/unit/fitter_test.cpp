#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "plidar/fitter.hpp"
#include "plidar/oracles/synthetic.hpp"

using namespace plidar;
using testing::error_of;

namespace {

LabelRecord label(ObjectClass cls, double h, double w, double l) {
  LabelRecord r;
  r.class_name = cls;
  r.height = h, r.width = w, r.length = l;
  r.z = 10;
  return r;
}

PointCloud blob(double cx, double cy, double cz, int n, double spread, oracles::Rng& rng) {
  PointCloud c{Frame::Velodyne, {}};
  for (int i = 0; i < n; ++i) {
    c.points.push_back({static_cast<float>(cx + oracles::uniform(rng, -spread, spread)),
                        static_cast<float>(cy + oracles::uniform(rng, -spread, spread)),
                        static_cast<float>(cz + oracles::uniform(rng, -spread, spread)), 0.f});
  }
  return c;
}

}  // namespace

TEST_SUITE("fitter") {
  TEST_CASE("size priors are class means") {
    const std::vector<LabelRecord> labels = {
        label(ObjectClass::Car, 1.5, 1.6, 3.8), label(ObjectClass::Car, 1.7, 1.8, 4.2),
        label(ObjectClass::Pedestrian, 1.8, 0.6, 0.9), label(ObjectClass::DontCare, -1, -1, -1)};
    const std::vector<ObjectClass> classes = {ObjectClass::Car, ObjectClass::Pedestrian};
    const SizePriors p = compute_size_priors(labels, classes);
    CHECK(p.at(ObjectClass::Car).height == doctest::Approx(1.6));
    CHECK(p.at(ObjectClass::Car).width == doctest::Approx(1.7));
    CHECK(p.at(ObjectClass::Car).length == doctest::Approx(4.0));
    CHECK(p.at(ObjectClass::Car).count == 2);
    CHECK(p.at(ObjectClass::Pedestrian).count == 1);
    CHECK(error_of([&] { p.at(ObjectClass::Cyclist); }) == ErrorCode::UnknownClass);
    const std::vector<ObjectClass> missing = {ObjectClass::Cyclist};
    CHECK(error_of([&] { compute_size_priors(labels, missing); }) == ErrorCode::NoSamplesForClass);
  }

  TEST_CASE("percentile interpolates linearly") {
    CHECK(percentile({4, 1, 3, 2}, 0) == 1.0);
    CHECK(percentile({4, 1, 3, 2}, 100) == 4.0);
    CHECK(percentile({4, 1, 3, 2}, 50) == doctest::Approx(2.5));
    CHECK(percentile({0, 10}, 5) == doctest::Approx(0.5));
    CHECK(percentile({7}, 5) == 7.0);
  }

  TEST_CASE("PCA yaw") {
    std::vector<Vec2> line;
    for (int i = 0; i < 20; ++i) line.push_back({i * std::cos(0.4), i * std::sin(0.4)});
    const YawEstimate e = pca_yaw(line);
    CHECK(e.yaw == doctest::Approx(0.4));
    CHECK(std::isinf(e.eigen_ratio));

    // Axis ambiguity: a direction and its opposite give the same yaw.
    std::vector<Vec2> back;
    for (int i = 0; i < 20; ++i) back.push_back({-i * std::cos(0.4), -i * std::sin(0.4)});
    CHECK(pca_yaw(back).yaw == doctest::Approx(0.4));

    const std::vector<Vec2> same = {{1, 1}, {1, 1}, {1, 1}};
    CHECK(pca_yaw(same).degenerate);
    const std::vector<Vec2> square = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
    CHECK(pca_yaw(square).eigen_ratio == doctest::Approx(1.0));
  }

  TEST_CASE("density clustering separates blobs and marks noise") {
    oracles::Rng rng(2);
    PointCloud c = blob(10, 0, 0, 60, 0.3, rng);
    const PointCloud far = blob(20, 5, 0, 40, 0.3, rng);
    c.points.insert(c.points.end(), far.points.begin(), far.points.end());
    c.points.push_back({50, 50, 50, 0});
    const auto labels = density_cluster(c, 0.5, 10);
    REQUIRE(labels.size() == 101);
    for (int i = 1; i < 60; ++i) CHECK(labels[i] == labels[0]);
    for (int i = 61; i < 100; ++i) CHECK(labels[i] == labels[60]);
    CHECK(labels[0] != labels[60]);
    CHECK(labels[0] >= 0);
    CHECK(labels[100] == -1);
  }

  TEST_CASE("cluster selection") {
    oracles::Rng rng(3);
    // 80 points near 8 m, 100 near 30 m, and isolated points at 9 m that put
    // the frustum median at 9 m.
    PointCloud both = blob(8, 0, 0, 80, 0.3, rng);
    const PointCloud big_far = blob(30, 0, 0, 100, 0.3, rng);
    both.points.insert(both.points.end(), big_far.points.begin(), big_far.points.end());
    for (int i = 0; i < 60; ++i) both.points.push_back({9.f, static_cast<float>(i - 70), 5.f, 0.f});
    FitterConfig cfg;
    const auto nearest = cluster_and_select(both, cfg);
    REQUIRE(nearest.has_value());
    CHECK(nearest->points.size() == 80);
    cfg.cluster_selection = ClusterSelection::LargestCluster;
    const auto largest = cluster_and_select(both, cfg);
    REQUIRE(largest.has_value());
    CHECK(largest->points.size() == 100);

    PointCloud sparse{Frame::Velodyne, {{1, 1, 1, 0}, {9, 9, 9, 0}}};
    CHECK_FALSE(cluster_and_select(sparse, cfg).has_value());
  }

  TEST_CASE("frustum selection uses the half-open 2D box") {
    const Calibration calib = oracles::kitti_like_calibration();
    PointCloud cam{Frame::Camera, {}};
    cam.points.push_back({0, 0, 10, 0});    // projects to (cx, cy)
    cam.points.push_back({0, 0, -10, 0});   // behind the camera
    cam.points.push_back({5, 0, 10, 0});    // far right
    const PointCloud velo = cam_to_velo(cam, calib);
    const double cx = calib.cx(), cy = calib.cy();
    const auto in = frustum_points(velo, {cx - 5, cy - 5, cx + 5, cy + 5}, calib);
    CHECK(in.frame == Frame::Velodyne);
    CHECK(in.points.size() == 1);
    CHECK(forward_depth(in.points[0], Frame::Velodyne) == doctest::Approx(10.27).epsilon(0.01));
  }

  TEST_CASE("fit_box places the bottom at the percentile and keeps the prior") {
    oracles::Rng rng(4);
    PointCloud c = blob(12, 3, -1, 500, 0.5, rng);
    SizePriors priors;
    priors.set(ObjectClass::Car, {3.9, 1.6, 1.56, 1});
    const Box3D b = fit_box(c, ObjectClass::Car, priors, 0.2, 5);
    CHECK(b.frame() == Frame::Velodyne);
    CHECK(b.dims().length == 3.9);
    CHECK(b.yaw() == doctest::Approx(0.2));
    std::vector<double> zs;
    for (const auto& p : c.points) zs.push_back(p.z);
    CHECK(b.vertical_extent()[0] == doctest::Approx(percentile(zs, 5)));
    CHECK(b.center().x == doctest::Approx(12).epsilon(0.01));
    CHECK(error_of([&] { fit_box(velo_to_cam(c, oracles::kitti_like_calibration()),
                                 ObjectClass::Car, priors, 0, 5); }) == ErrorCode::FrameMismatch);
  }

  TEST_CASE("exp0 detection on a synthetic car") {
    oracles::Rng rng(5);
    const auto scene = oracles::make_car_scene(rng, 0.6, 5000);
    SizePriors priors;
    priors.set(ObjectClass::Car, {3.9, 1.6, 1.56, 1});
    const std::vector<LabelRecord> gt = {scene.gt};
    const auto dets = exp0_detect(scene.cloud, gt, scene.calib, priors, FitterConfig{});
    REQUIRE(dets.size() == 1);
    const LabelRecord& d = dets[0];
    CHECK(d.class_name == ObjectClass::Car);
    CHECK(d.bbox2d == scene.gt.bbox2d);
    REQUIRE(d.score.has_value());
    CHECK(*d.score > 0);
    CHECK(*d.score < 1);
    CHECK(d.alpha == doctest::Approx(wrap_angle(d.rotation_y - std::atan2(d.x, d.z))));
    CHECK(iou_3d(box_from_label(d), scene.cam_box) > 0.7);

    // Classes without a prior and frustums without enough points yield nothing.
    LabelRecord ped = scene.gt;
    ped.class_name = ObjectClass::Pedestrian;
    LabelRecord empty = scene.gt;
    empty.bbox2d = {0, 0, 3, 3};
    const std::vector<LabelRecord> others = {ped, empty};
    CHECK(exp0_detect(scene.cloud, others, scene.calib, priors, FitterConfig{}).empty());
  }
}
