#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace plidar::oracles {

enum class CheckStatus { Pass, Fail, Skip };

struct CheckResult {
  int id = 0;
  std::string name;
  CheckStatus status = CheckStatus::Fail;
  std::string detail;
};

struct SelftestOptions {
  std::size_t iou_pairs = 1000;
  std::size_t iou_samples = 1000000;
  std::size_t ap_scenes = 100;
  // End-to-end check on real data: needs calib/, label_2/, depth/ under the
  // root plus a split file. Skipped when empty.
  std::filesystem::path kitti_root;
  std::filesystem::path kitti_split;
  std::filesystem::path work_dir;
};

inline constexpr int kNumChecks = 9;

CheckResult run_check(int id, const SelftestOptions& options);
std::vector<CheckResult> run_selftest(const SelftestOptions& options);

// One line per check; returns false if any check failed.
bool print_results(const std::vector<CheckResult>& results, std::ostream& out);
void print_result(const CheckResult& result, std::ostream& out);

}  // namespace plidar::oracles
