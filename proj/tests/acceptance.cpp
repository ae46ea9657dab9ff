// Acceptance matrix: one line per criterion, non-zero exit on any failure.
#include <cstdlib>
#include <iostream>

#include "plidar/oracles/selftest.hpp"

int main() {
  plidar::oracles::SelftestOptions opt;
  if (const char* root = std::getenv("PLIDAR_KITTI_ROOT")) opt.kitti_root = root;
  if (const char* split = std::getenv("PLIDAR_KITTI_SPLIT")) opt.kitti_split = split;
  bool ok = true;
  for (int id = 1; id <= plidar::oracles::kNumChecks; ++id) {
    const auto r = plidar::oracles::run_check(id, opt);
    plidar::oracles::print_result(r, std::cout);
    std::cout.flush();
    ok &= r.status != plidar::oracles::CheckStatus::Fail;
  }
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
