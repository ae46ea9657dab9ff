#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace plidar {

// Coordinate frame a point or box is expressed in.
//   Camera:   rectified left-camera frame, x right, y down, z forward.
//   Velodyne: KITTI LiDAR frame, x forward, y left, z up.
enum class Frame { Camera, Velodyne };

std::string_view to_string(Frame frame);

// One pseudo-LiDAR return. Layout matches the KITTI .bin record (4 x f32).
struct PointXYZI {
  float x = 0.f;
  float y = 0.f;
  float z = 0.f;
  float intensity = 0.f;

  friend bool operator==(const PointXYZI&, const PointXYZI&) = default;
};
static_assert(sizeof(PointXYZI) == 16);

struct PointCloud {
  Frame frame = Frame::Velodyne;
  std::vector<PointXYZI> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

}  // namespace plidar
