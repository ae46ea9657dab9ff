#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "plidar/geometry.hpp"
#include "plidar/oracles/synthetic.hpp"

using namespace plidar;
using testing::error_of;

TEST_SUITE("geometry") {
  TEST_CASE("unprojection") {
    const Calibration c = oracles::kitti_like_calibration();
    const Vec3 p = unproject(c.cx() + c.fx(), c.cy() - c.fy() / 2, 10.0, c);
    CHECK(p.x == doctest::Approx(10.0));
    CHECK(p.y == doctest::Approx(-5.0));
    CHECK(p.z == 10.0);
    CHECK(error_of([&] { unproject(1, 1, 0, c); }) == ErrorCode::NonPositiveDepth);
    CHECK(error_of([&] { unproject(1, 1, -2, c); }) == ErrorCode::NonPositiveDepth);
  }

  TEST_CASE("velodyne axes map to camera axes") {
    const Calibration c = oracles::kitti_like_calibration();
    const Vec3 o = velo_to_cam({0, 0, 0}, c);
    const Vec3 fwd = velo_to_cam({10, 0, 0}, c);
    const Vec3 up = velo_to_cam({0, 0, 1}, c);
    CHECK(fwd.z - o.z == doctest::Approx(10).epsilon(1e-3));  // forward is +z
    CHECK(up.y - o.y == doctest::Approx(-1).epsilon(1e-3));   // up is -y
  }

  TEST_CASE("cloud transforms check the frame tag") {
    const Calibration c = oracles::kitti_like_calibration();
    PointCloud velo{Frame::Velodyne, {{5.f, 1.f, -1.f, 0.25f}}};
    const PointCloud cam = velo_to_cam(velo, c);
    CHECK(cam.frame == Frame::Camera);
    CHECK(cam.points[0].intensity == 0.25f);
    const PointCloud back = cam_to_velo(cam, c);
    CHECK(back.points[0].x == doctest::Approx(5.f).epsilon(1e-5));
    CHECK(error_of([&] { cam_to_velo(velo, c); }) == ErrorCode::FrameMismatch);
    CHECK(error_of([&] { velo_to_cam(cam, c); }) == ErrorCode::FrameMismatch);
  }

  TEST_CASE("box construction") {
    CHECK(error_of([] { Box3D({0, 0, 0}, {0, 1, 1}, 0, Frame::Camera); }) == ErrorCode::InvalidBox);
    CHECK(error_of([] { Box3D({0, 0, 0}, {1, NAN, 1}, 0, Frame::Camera); }) == ErrorCode::InvalidBox);
    const Box3D b({0, 0, 0}, {1, 1, 1}, 3 * std::numbers::pi, Frame::Camera);
    CHECK(b.yaw() == doctest::Approx(std::numbers::pi));
    CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_angle(0.5) == 0.5);
  }

  TEST_CASE("camera label -> velodyne box -> camera box") {
    const Calibration c = oracles::kitti_like_calibration();
    LabelRecord l;
    l.x = 2.1, l.y = 1.6, l.z = 18;
    l.height = 1.5, l.width = 1.7, l.length = 4.1;
    l.rotation_y = 0.7;
    const Box3D cam = box_from_label(l);
    const Box3D velo = box_cam_to_velo(cam, c);
    CHECK(velo.frame() == Frame::Velodyne);
    // Volume center sits half a height above the camera label's bottom face.
    CHECK(velo.vertical_extent()[0] == doctest::Approx(velo.center().z - 0.75));
    const Box3D round = box_velo_to_cam(velo, c);
    CHECK(round.center().x == doctest::Approx(cam.center().x));
    CHECK(round.center().y == doctest::Approx(cam.center().y));
    CHECK(round.center().z == doctest::Approx(cam.center().z));
    CHECK(round.yaw() == doctest::Approx(cam.yaw()));
    CHECK(iou_3d(round, cam) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(error_of([&] { box_cam_to_velo(velo, c); }) == ErrorCode::FrameMismatch);
  }

  TEST_CASE("BEV footprint corners") {
    const Box3D b({1, 0, 2}, {4, 2, 1}, 0, Frame::Camera);
    const auto corners = box_corners_bev(b);
    CHECK(polygon_signed_area(corners) == doctest::Approx(8.0));
    // Camera yaw 0 points the length along +x.
    CHECK(corners[0].x == doctest::Approx(3.0));
    const Box3D r({1, 0, 2}, {4, 2, 1}, std::numbers::pi / 2, Frame::Camera);
    double max_z = -1e9;
    for (const auto& p : box_corners_bev(r)) max_z = std::max(max_z, p.y);
    CHECK(max_z == doctest::Approx(4.0));  // length now along z
  }

  TEST_CASE("IoU basics") {
    const Box3D a({0, 1.5, 20}, {4, 1.8, 1.5}, 0.3, Frame::Camera);
    CHECK(iou_bev(a, a) == doctest::Approx(1.0));
    CHECK(iou_3d(a, a) == doctest::Approx(1.0));
    const Box3D flipped({0, 1.5, 20}, {4, 1.8, 1.5}, 0.3 + std::numbers::pi, Frame::Camera);
    CHECK(iou_3d(a, flipped) == doctest::Approx(1.0));
    const Box3D far({30, 1.5, 20}, {4, 1.8, 1.5}, 0.3, Frame::Camera);
    CHECK(iou_bev(a, far) == 0.0);
    const Box3D above({0, -10, 20}, {4, 1.8, 1.5}, 0.3, Frame::Camera);
    CHECK(iou_bev(a, above) == doctest::Approx(1.0));
    CHECK(iou_3d(a, above) == 0.0);
    const Box3D half({2, 1.5, 20}, {4, 1.8, 1.5}, 0, Frame::Camera);
    const Box3D base({0, 1.5, 20}, {4, 1.8, 1.5}, 0, Frame::Camera);
    CHECK(iou_bev(base, half) == doctest::Approx(1.0 / 3));
    const Box3D velo({0, 0, 0}, {1, 1, 1}, 0, Frame::Velodyne);
    CHECK(error_of([&] { iou_bev(a, velo); }) == ErrorCode::FrameMismatch);
  }

  TEST_CASE("IoU is symmetric") {
    oracles::Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const auto [a, b] = oracles::random_box_pair(rng);
      CHECK(iou_bev(a, b) == doctest::Approx(iou_bev(b, a)).epsilon(1e-12));
      CHECK(iou_3d(a, b) == doctest::Approx(iou_3d(b, a)).epsilon(1e-12));
    }
  }

  TEST_CASE("polygon clipping") {
    const std::vector<Vec2> sq = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    const std::vector<Vec2> cw = {{1, 1}, {1, 3}, {3, 3}, {3, 1}};  // clockwise input
    CHECK(convex_polygon_intersection_area(sq, cw) == doctest::Approx(1.0));
    const std::vector<Vec2> touching = {{2, 0}, {4, 0}, {4, 2}, {2, 2}};
    CHECK(convex_polygon_intersection_area(sq, touching) == 0.0);
    const std::vector<Vec2> line = {{0, 0}, {1, 1}, {2, 2}};
    CHECK(error_of([&] { convex_polygon_intersection_area(sq, line); }) == ErrorCode::DegeneratePolygon);
    const std::vector<Vec2> two = {{0, 0}, {1, 1}};
    CHECK(error_of([&] { convex_polygon_intersection_area(two, sq); }) == ErrorCode::DegeneratePolygon);
  }
}
