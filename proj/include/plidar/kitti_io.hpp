#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plidar/error.hpp"
#include "plidar/point_cloud.hpp"

namespace plidar {

using Mat3 = std::array<double, 9>;    // row-major 3x3
using Mat34 = std::array<double, 12>;  // row-major 3x4

// Per-frame KITTI calibration. Only the left color camera (P2) is kept.
class Calibration {
 public:
  // Validates fx, fy > 0 and that r0_rect and the rotation block of
  // tr_velo_to_cam are rotations (|det - 1| < 1e-4, |R R^T - I|_max < 1e-4).
  static Calibration from_matrices(const Mat34& p2, const Mat3& r0_rect,
                                   const Mat34& tr_velo_to_cam);

  const Mat34& p2() const noexcept { return p2_; }
  const Mat3& r0_rect() const noexcept { return r0_rect_; }
  const Mat34& tr_velo_to_cam() const noexcept { return tr_velo_to_cam_; }

  double fx() const noexcept { return p2_[0]; }
  double fy() const noexcept { return p2_[5]; }
  double cx() const noexcept { return p2_[2]; }
  double cy() const noexcept { return p2_[6]; }

 private:
  Calibration() = default;
  Mat34 p2_{};
  Mat3 r0_rect_{};
  Mat34 tr_velo_to_cam_{};
};

// Throws NotARotation if `r` fails the rotation tolerance checks.
void check_rotation(const Mat3& r, std::string_view what);

Calibration parse_calibration(std::string_view text);
std::string serialize_calibration(const Calibration& calib);

enum class ObjectClass {
  Car,
  Pedestrian,
  Cyclist,
  Van,
  Truck,
  PersonSitting,
  Tram,
  Misc,
  DontCare,
};

std::string_view to_string(ObjectClass cls);
std::optional<ObjectClass> parse_object_class(std::string_view name);

struct BBox2D {
  double left = 0, top = 0, right = 0, bottom = 0;

  double width() const noexcept { return right - left; }
  double height() const noexcept { return bottom - top; }
  friend bool operator==(const BBox2D&, const BBox2D&) = default;
};

// One line of a KITTI label_2 / detection file.
struct LabelRecord {
  ObjectClass class_name = ObjectClass::Car;
  double truncation = 0;
  int occlusion = 0;
  double alpha = 0;
  BBox2D bbox2d;
  double height = 0, width = 0, length = 0;  // meters
  double x = 0, y = 0, z = 0;                // bottom-face center, camera frame
  double rotation_y = 0;
  std::optional<double> score;
};

std::vector<LabelRecord> parse_labels(std::string_view text, bool require_score);
std::string serialize_labels(std::span<const LabelRecord> labels);

enum class RasterSemantics { DepthMeters, Grayscale01, Confidence01 };

std::string_view to_string(RasterSemantics semantics);

// Dense row-major single-channel f32 raster.
struct ScalarRaster {
  int width = 0;
  int height = 0;
  RasterSemantics semantics = RasterSemantics::DepthMeters;
  std::vector<float> values;

  // Throws LengthMismatch unless values.size() == width * height.
  static ScalarRaster make(int width, int height, RasterSemantics semantics,
                           std::vector<float> values);
  static ScalarRaster filled(int width, int height, RasterSemantics semantics,
                             float value);

  std::size_t size() const noexcept { return values.size(); }
  float at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  float& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
};

// Interleaved 8-bit RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 * width * height
};

// 16-bit single-channel PNG, meters = raw / 256, raw 0 = invalid.
ScalarRaster read_depth_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_depth_png(const ScalarRaster& depth);

// 16-bit single-channel PNG, value = raw / 65535.
ScalarRaster read_confidence_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_confidence_png(const ScalarRaster& confidence);

// 8-bit three-channel PNG.
RgbImage read_rgb_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_rgb_png(const RgbImage& image);

// BT.601 luma, normalized to [0, 1].
ScalarRaster rgb_to_grayscale(const RgbImage& image);

std::vector<std::uint8_t> write_pointcloud_bin(const PointCloud& cloud);
PointCloud read_pointcloud_bin(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace plidar
