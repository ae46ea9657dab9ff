#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plidar/kitti_io.hpp"

namespace plidar {

enum class Difficulty { Easy = 0, Moderate = 1, Hard = 2 };
inline constexpr std::array<Difficulty, 3> kDifficulties = {Difficulty::Easy, Difficulty::Moderate,
                                                             Difficulty::Hard};
std::string_view to_string(Difficulty d);

struct DifficultyLevel {
  double min_height = 0;  // pixels
  int max_occlusion = 0;
  double max_truncation = 0;
};

struct DifficultyCriteria {
  std::array<DifficultyLevel, 3> levels;  // indexed by Difficulty

  // Easy >= 40 px, occ <= 0, trunc <= 0.15; Moderate >= 25, 1, 0.30;
  // Hard >= 25, 2, 0.50.
  static DifficultyCriteria kitti();
  // Throws InvalidArgument unless Easy is the strictest and Hard the loosest.
  void validate() const;
  const DifficultyLevel& operator[](Difficulty d) const { return levels[static_cast<int>(d)]; }
};

class DifficultySet {
 public:
  void insert(Difficulty d) { bits_ |= 1u << static_cast<int>(d); }
  bool contains(Difficulty d) const { return (bits_ >> static_cast<int>(d)) & 1u; }
  bool empty() const { return bits_ == 0; }
  friend bool operator==(const DifficultySet&, const DifficultySet&) = default;

 private:
  std::uint8_t bits_ = 0;
};

DifficultySet assign_difficulty(const LabelRecord& label,
                                const DifficultyCriteria& criteria = DifficultyCriteria::kitti());

enum class BoxMetric { Bev, Box3D };
std::string_view to_string(BoxMetric m);

// Official: ground truth that fails the difficulty filter (and neighboring
// classes, Van for Car and Person_sitting for Pedestrian) is ignored rather
// than scored, detections shorter than the difficulty's minimum height are
// ignored, and detections covering a DontCare region (IoA > 0.5) are not
// counted as false positives. Simple: only qualifying ground truth exists;
// every unmatched detection is a false positive.
enum class DontCareMode { Official, Simple };
std::string_view to_string(DontCareMode m);

struct EvalOptions {
  DifficultyCriteria criteria = DifficultyCriteria::kitti();
  DontCareMode mode = DontCareMode::Official;
  double dontcare_ioa = 0.5;
};

struct FrameData {
  std::vector<LabelRecord> gt;
  std::vector<LabelRecord> det;
};

inline constexpr int kRecallSamples = 40;

struct ApResult {
  double ap = 0;                                  // percent
  std::array<double, kRecallSamples> precision{};  // at recall k/40, k = 1..40
  std::size_t num_gt = 0;
  std::size_t num_tp = 0;
  std::size_t num_fp = 0;
};

// Per-frame matching outcome: one entry per scored (non-ignored) detection.
struct ScoredMatch {
  double score = 0;
  bool true_positive = false;
};

struct FrameMatches {
  std::vector<ScoredMatch> detections;
  std::size_t num_gt = 0;
};

struct MatchQuery {
  ObjectClass cls = ObjectClass::Car;
  Difficulty difficulty = Difficulty::Moderate;
  double iou_threshold = 0.7;
  BoxMetric metric = BoxMetric::Box3D;
};

// Greedy matching: detections in descending score (file order among ties)
// each take the unmatched qualifying GT of highest IoU >= threshold.
FrameMatches match_frame(const FrameData& frame, const MatchQuery& query,
                         const EvalOptions& options);

// Precision/recall sweep over pooled matches, one operating point per distinct
// score, sampled at 40 recall positions. nullopt when num_gt == 0.
std::optional<ApResult> ap40_from_matches(std::span<const FrameMatches> frames);

std::optional<ApResult> ap40(std::span<const FrameData> frames, const MatchQuery& query,
                             const EvalOptions& options = {});

struct EvalEntry {
  ObjectClass cls;
  Difficulty difficulty;
  double iou_threshold;
  BoxMetric metric;
  std::optional<ApResult> result;
};

struct EvalReport {
  DontCareMode mode = DontCareMode::Official;
  std::string config_hash;
  std::vector<EvalEntry> entries;

  const EvalEntry* find(ObjectClass cls, Difficulty d, double iou, BoxMetric m) const;
};

EvalReport evaluate(std::span<const FrameData> frames, std::span<const ObjectClass> classes,
                    std::span<const double> iou_thresholds, const EvalOptions& options = {});

// Layout: one row per class, AP_BEV/AP_3D pairs per difficulty, grouped by
// IoU threshold. Undefined cells print as "-".
std::string format_eval_table(const EvalReport& report);
// One JSON object per entry.
std::string format_eval_jsonl(const EvalReport& report);

struct DepthDiagOptions {
  double threshold_m = 1.5;
  std::vector<double> buckets = {20, 40, 80};
  double depth_min = 1.0;
  double depth_max = 60.0;
  std::vector<ObjectClass> classes = {ObjectClass::Car, ObjectClass::Pedestrian,
                                      ObjectClass::Cyclist};
};

struct DepthDiagCell {
  std::size_t correct = 0;
  std::size_t count = 0;

  std::optional<double> accuracy() const {
    if (count == 0) return std::nullopt;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(count);
  }
};

struct DepthDiagReport {
  std::vector<double> buckets;
  std::map<ObjectClass, std::vector<DepthDiagCell>> cells;  // [class][bucket]
  std::string config_hash;

  void merge(const DepthDiagReport& other);
};

// Median of the valid (depth_min < D < depth_max) pixels whose centers fall in
// columns [floor(left), ceil(right)) and rows [floor(top), ceil(bottom)).
std::optional<double> median_depth_in_box(const ScalarRaster& depth, const BBox2D& box,
                                          double depth_min, double depth_max);

DepthDiagReport depth_diagnostic(std::span<const LabelRecord> gt, const ScalarRaster& depth,
                                 const DepthDiagOptions& options = {});

std::string format_depth_table(const DepthDiagReport& report);
std::string format_depth_jsonl(const DepthDiagReport& report);
std::string format_depth_csv(const DepthDiagReport& report);

}  // namespace plidar
