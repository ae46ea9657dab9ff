#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "plidar/cloud.hpp"
#include "plidar/geometry.hpp"
#include "plidar/metrics.hpp"

namespace plidar::oracles {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);

// Typical KITTI object-benchmark calibration (left color camera).
std::string kitti_like_calibration_text();
Calibration kitti_like_calibration();

// Random intrinsics and random proper rotations for R0 and Tr_velo_to_cam.
Calibration random_calibration(Rng& rng);

// Two camera-frame boxes that overlap often but not always.
std::pair<Box3D, Box3D> random_box_pair(Rng& rng);

LabelRecord label_from_box(const Box3D& cam_box, ObjectClass cls, const BBox2D& bbox);

// Projected 2D extent of a camera-frame box (all corners must have z > 0).
BBox2D project_box(const Box3D& cam_box, const Calibration& calib);

// Random evaluation frame: GT with mixed difficulty, neighbor classes and
// DontCare regions; detections = jittered GT plus false positives, with
// deliberate score ties.
FrameData random_eval_frame(Rng& rng, std::size_t max_boxes);

// Car-sized box resting on flat ground: a dense volumetric point sample of
// the box plus a sparse ground grid, in velodyne coordinates.
struct CarScene {
  Calibration calib;
  Box3D cam_box;
  LabelRecord gt;
  PointCloud cloud;
};
CarScene make_car_scene(Rng& rng, double yaw, std::size_t car_points);

// Ray-cast depth of a ground plane (camera height 1.65 m) plus the given
// boxes; pixels that hit nothing beyond `max_range` are 0 (invalid).
ScalarRaster render_depth(const Calibration& calib, int width, int height,
                          const std::vector<Box3D>& cam_boxes, double max_range = 80.0);

// Writes image_2/, calib/, label_2/, depth/, conf/ for `frames` frames plus
// split files `val.txt` and `train.txt`. Returns the frame ids.
std::vector<std::string> write_toy_dataset(const std::filesystem::path& root, std::size_t frames,
                                           std::uint64_t seed, int width = 400, int height = 160);

}  // namespace plidar::oracles
