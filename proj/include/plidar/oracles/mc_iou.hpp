#pragma once

#include <cstddef>
#include <cstdint>

#include "plidar/geometry.hpp"

namespace plidar::oracles {

struct SampledIou {
  double bev = 0;
  double box3d = 0;
};

// Point-inclusion estimate of BEV and 3D IoU. Half the samples are drawn
// inside each box (jittered stratified grid in the box's local frame) and
// tested for membership in the other box; the two intersection estimates are
// averaged. Shares no code with the polygon-clipping path.
SampledIou sampled_iou(const Box3D& a, const Box3D& b, std::size_t samples, std::uint64_t seed);

// Membership of a frame-tagged point in a box, via the box's local frame.
bool inside_footprint(const Box3D& box, double gx, double gy);
bool inside_box(const Box3D& box, double gx, double gy, double up);

}  // namespace plidar::oracles
