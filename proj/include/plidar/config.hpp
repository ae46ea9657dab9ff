#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plidar/cloud.hpp"
#include "plidar/fitter.hpp"
#include "plidar/metrics.hpp"

namespace plidar {

struct EvalConfig {
  std::vector<double> iou_thresholds = {0.5, 0.7};
  std::vector<ObjectClass> classes = {ObjectClass::Car};
  DifficultyCriteria criteria = DifficultyCriteria::kitti();
  DontCareMode dontcare_mode = DontCareMode::Official;
  std::filesystem::path gt_dir;          // default <root>/label_2
  std::filesystem::path detections_dir;  // default <out>/detections
};

struct FitConfig {
  FitterConfig fitter;
  std::vector<ObjectClass> classes = {ObjectClass::Car, ObjectClass::Pedestrian,
                                      ObjectClass::Cyclist};
  std::filesystem::path priors_split;  // frame ids whose labels define the priors
  std::optional<SizePriors> priors;    // explicit priors take precedence
  std::filesystem::path cloud_dir;     // default <out>/velodyne_pseudo
};

// Everything a batch command needs, resolved to absolute paths.
struct RunConfig {
  std::filesystem::path dataset_root;
  std::filesystem::path split_file;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool tolerate_frame_errors = false;
  VariantConfig variant = VariantConfig::preset("exp2");
  FitConfig fit;
  EvalConfig eval;
  DepthDiagOptions depth_diag;

  // Throws Error(Config) on a missing path or malformed value.
  void validate() const;
  // Stable digest of every field that affects outputs (jobs excluded).
  std::string hash() const;
  std::string to_json() const;
};

// Relative paths inside the file resolve against the file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);

// Zero-padded six-digit ids, one per line. Throws Error(Config).
std::vector<std::string> read_split(const std::filesystem::path& path);

}  // namespace plidar
