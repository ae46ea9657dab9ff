#pragma once

#include <optional>
#include <span>

#include "plidar/metrics.hpp"

namespace plidar::oracles {

// Brute-force AP40: re-runs matching from scratch for every distinct score
// threshold and takes the interpolated precision directly from the
// definition. Quadratic in the number of detections; for tests only.
std::optional<double> reference_ap40(std::span<const FrameData> frames, const MatchQuery& query,
                                     const EvalOptions& options);

}  // namespace plidar::oracles
