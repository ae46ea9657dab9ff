#include <cmath>
#include <cstring>
#include <csetjmp>

#include <png.h>

#include "doctest.h"
#include "helpers.hpp"
#include "plidar/kitti_io.hpp"
#include "plidar/oracles/synthetic.hpp"

using namespace plidar;
using testing::error_of;

namespace {

// Minimal libpng encoder for formats the library never writes.
std::vector<std::uint8_t> encode_png(int w, int h, int bit_depth, int color_type, int channels) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h * channels * (bit_depth / 8), 7);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * w * channels * (bit_depth / 8);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return {};
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        v->insert(v->end(), data, data + n);
      },
      nullptr);
  png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

TEST_SUITE("kitti_io") {
  TEST_CASE("calibration from a KITTI file") {
    const Calibration c = oracles::kitti_like_calibration();
    CHECK(c.fx() == doctest::Approx(721.5377));
    CHECK(c.cy() == doctest::Approx(172.854));
    CHECK(c.r0_rect()[0] == doctest::Approx(0.9999239));
    CHECK(c.tr_velo_to_cam()[11] == doctest::Approx(-0.2717806));

    const Calibration back = parse_calibration(serialize_calibration(c));
    CHECK(back.p2() == c.p2());
    CHECK(back.r0_rect() == c.r0_rect());
    CHECK(back.tr_velo_to_cam() == c.tr_velo_to_cam());
  }

  TEST_CASE("calibration key aliases") {
    std::string text = oracles::kitti_like_calibration_text();
    text.replace(text.find("R0_rect:"), 8, "R_rect:");
    text.replace(text.find("Tr_velo_to_cam:"), 15, "Tr_velo_cam:");
    CHECK(parse_calibration(text).p2() == oracles::kitti_like_calibration().p2());
  }

  TEST_CASE("calibration errors") {
    std::string text = oracles::kitti_like_calibration_text();
    std::string no_r0 = text;
    no_r0.erase(no_r0.find("R0_rect:"), no_r0.find("Tr_velo_to_cam:") - no_r0.find("R0_rect:"));
    CHECK(error_of([&] { parse_calibration(no_r0); }) == ErrorCode::MissingKey);

    CHECK(error_of([&] { parse_calibration("P2: 1 2 3\nR0_rect: 1 0 0 0 1 0 0 0 1\nTr_velo_to_cam: 0 0 0 0 0 0 0 0 0 0 0 0\n"); }) ==
          ErrorCode::WrongArity);

    std::string bad_number = text;
    bad_number.replace(bad_number.find("4.485728000000e+01"), 18, "4.48x728e+01");
    CHECK(error_of([&] { parse_calibration(bad_number); }) == ErrorCode::MalformedNumber);

    const Mat34 p2 = {700, 0, 600, 0, 0, 700, 170, 0, 0, 0, 1, 0};
    const Mat34 tr = {0, -1, 0, 0, 0, 0, -1, 0, 1, 0, 0, 0};
    CHECK(error_of([&] { Calibration::from_matrices(p2, {1, 0, 0, 0, 2, 0, 0, 0, 1}, tr); }) ==
          ErrorCode::NotARotation);
    // A reflection has |det - 1| = 2.
    CHECK(error_of([&] { Calibration::from_matrices(p2, {-1, 0, 0, 0, 1, 0, 0, 0, 1}, tr); }) ==
          ErrorCode::NotARotation);
    Mat34 bad_f = p2;
    bad_f[0] = 0;
    CHECK(error_of([&] { Calibration::from_matrices(bad_f, {1, 0, 0, 0, 1, 0, 0, 0, 1}, tr); }) ==
          ErrorCode::InvalidArgument);
  }

  TEST_CASE("labels: ground truth and detections") {
    const std::string gt =
        "Car 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59\n"
        "DontCare -1 -1 -10 503.89 169.71 590.61 190.13 -1 -1 -1 -1000 -1000 -1000 -10\n";
    const auto labels = parse_labels(gt, false);
    REQUIRE(labels.size() == 2);
    CHECK(labels[0].class_name == ObjectClass::Car);
    CHECK(labels[0].height == doctest::Approx(1.65));
    CHECK(labels[0].length == doctest::Approx(3.64));
    CHECK(labels[0].z == doctest::Approx(46.70));
    CHECK_FALSE(labels[0].score.has_value());
    CHECK(labels[1].class_name == ObjectClass::DontCare);

    const auto det = parse_labels(
        "Pedestrian 0 0 0.2 10 20 30 90 1.7 0.6 0.8 1 1.6 12 0.3 0.87\n", true);
    REQUIRE(det.size() == 1);
    CHECK(det[0].score == doctest::Approx(0.87));
    CHECK(parse_labels(serialize_labels(det), true)[0].score == det[0].score);

    CHECK(error_of([] { parse_labels("Car 0 0 0 1 2 3 4 1 1 1 0 0 5 0\n", true); }) ==
          ErrorCode::WrongFieldCount);
    CHECK(error_of([] { parse_labels("Car 0 0 0 1 2 3\n", false); }) == ErrorCode::WrongFieldCount);
    CHECK(error_of([] { parse_labels("Bus 0 0 0 1 2 3 4 1 1 1 0 0 5 0\n", false); }) ==
          ErrorCode::InvalidArgument);
    CHECK(error_of([] { parse_labels("Car 0 0 0 1 2 3 4 1 1 1 0 0 five 0\n", false); }) ==
          ErrorCode::MalformedNumber);
    CHECK(parse_labels("\n\n", false).empty());
    CHECK(parse_object_class("Person_sitting") == ObjectClass::PersonSitting);
  }

  TEST_CASE("depth PNG: scale, invalid pixels and rounding") {
    ScalarRaster d = ScalarRaster::filled(3, 2, RasterSemantics::DepthMeters, 0.f);
    d.at(0, 0) = 1.0f / 256;
    d.at(1, 0) = 255.99609375f;  // 65535 / 256
    d.at(2, 1) = 12.5f;
    const ScalarRaster back = read_depth_png(write_depth_png(d));
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.semantics == RasterSemantics::DepthMeters);
    CHECK(back.values == d.values);

    ScalarRaster big = ScalarRaster::filled(1, 1, RasterSemantics::DepthMeters, 1000.f);
    CHECK(read_depth_png(write_depth_png(big)).values[0] == 255.99609375f);
  }

  TEST_CASE("PNG format errors") {
    const std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    CHECK(error_of([&] { read_depth_png(junk); }) == ErrorCode::NotPng);

    const auto gray8 = encode_png(4, 3, 8, PNG_COLOR_TYPE_GRAY, 1);
    CHECK(error_of([&] { read_depth_png(gray8); }) == ErrorCode::WrongBitDepth);
    const auto rgb16 = encode_png(4, 3, 16, PNG_COLOR_TYPE_RGB, 3);
    CHECK(error_of([&] { read_depth_png(rgb16); }) == ErrorCode::WrongChannelCount);
    CHECK(error_of([&] { read_rgb_png(rgb16); }) == ErrorCode::WrongBitDepth);
    CHECK(error_of([&] { read_rgb_png(gray8); }) == ErrorCode::WrongChannelCount);

    auto cut = write_depth_png(ScalarRaster::filled(50, 50, RasterSemantics::DepthMeters, 3.f));
    cut.resize(cut.size() / 2);
    CHECK(error_of([&] { read_depth_png(cut); }).has_value());
  }

  TEST_CASE("grayscale conversion") {
    RgbImage img{4, 1, {255, 255, 255, 0, 0, 0, 255, 0, 0, 10, 200, 30}};
    const ScalarRaster g = rgb_to_grayscale(img);
    CHECK(g.semantics == RasterSemantics::Grayscale01);
    CHECK(g.values[0] == doctest::Approx(1.0));
    CHECK(g.values[1] == 0.f);
    CHECK(g.values[2] == doctest::Approx(0.299));
    CHECK(g.values[3] == doctest::Approx((0.299 * 10 + 0.587 * 200 + 0.114 * 30) / 255));
  }

  TEST_CASE(".bin point clouds") {
    PointCloud c{Frame::Velodyne, {{1.5f, -2.f, 0.25f, 0.5f}, {10.f, 0.f, -1.f, 0.f}}};
    const auto bytes = write_pointcloud_bin(c);
    REQUIRE(bytes.size() == 32);
    float first;
    std::memcpy(&first, bytes.data(), 4);
    CHECK(first == 1.5f);  // little-endian x first
    const PointCloud back = read_pointcloud_bin(bytes);
    CHECK(back.frame == Frame::Velodyne);
    REQUIRE(back.points.size() == 2);
    CHECK(std::memcmp(back.points.data(), c.points.data(), 32) == 0);

    std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 3);
    CHECK(error_of([&] { read_pointcloud_bin(cut); }) == ErrorCode::TruncatedFile);
    CHECK(read_pointcloud_bin({}).points.empty());
  }

  TEST_CASE("raster size validation") {
    CHECK(error_of([] { ScalarRaster::make(3, 3, RasterSemantics::DepthMeters, std::vector<float>(8)); }) ==
          ErrorCode::LengthMismatch);
  }

  TEST_CASE("file helpers") {
    const auto dir = testing::fresh_dir("io");
    write_file(dir / "a" / "b.txt", std::string_view("hello"));
    CHECK(read_file_text(dir / "a" / "b.txt") == "hello");
    CHECK(error_of([&] { read_file_bytes(dir / "missing"); }) == ErrorCode::Io);
    std::filesystem::remove_all(dir);
  }
}
