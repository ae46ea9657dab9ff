#include "plidar/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <iostream>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace plidar {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

namespace {

class FrameLog {
 public:
  explicit FrameLog(std::ostream* out) : out_(out) {}

  void write(const ordered_json& record) {
    if (!out_) return;
    std::lock_guard lock(mu_);
    *out_ << record.dump() << '\n';
  }

 private:
  std::ostream* out_;
  std::mutex mu_;
};

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path frame_file(const fs::path& dir, const std::string& id, const char* ext) {
  return dir / (id + ext);
}

struct FrameOutcome {
  bool ok = false;
  std::string error;   // ErrorCode name
  std::string detail;
  ordered_json record;
};

FrameOutcome failure(const std::string& id, const Error& e) {
  FrameOutcome o;
  o.error = std::string(to_string(e.code()));
  o.detail = e.detail();
  o.record = {{"frame", id}, {"error", o.error}, {"detail", o.detail}};
  return o;
}

int summarize(const char* stage, const std::vector<FrameOutcome>& outcomes, bool tolerate,
              std::ostream* log) {
  std::size_t failed = 0;
  for (const auto& o : outcomes) failed += o.ok ? 0 : 1;
  if (log) {
    ordered_json s = {{"stage", stage},
                      {"summary", true},
                      {"frames", outcomes.size()},
                      {"failed", failed}};
    *log << s.dump() << '\n';
  }
  if (failed == 0 || tolerate) return kExitOk;
  return kExitFrameFailures;
}

// Returns nullopt from a config error after reporting it.
std::optional<std::vector<std::string>> prepare(const RunConfig& cfg) {
  try {
    cfg.validate();
    return read_split(cfg.split_file);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return std::nullopt;
  }
}

std::uint64_t numeric_id(const std::string& id) { return std::stoull(id); }

Calibration load_calibration(const fs::path& root, const std::string& id) {
  return parse_calibration(read_file_text(frame_file(root / "calib", id, ".txt")));
}

std::optional<ScalarRaster> load_optional_png(const fs::path& path, bool grayscale_from_rgb) {
  if (!fs::exists(path)) return std::nullopt;
  const auto bytes = read_file_bytes(path);
  if (grayscale_from_rgb) return rgb_to_grayscale(read_rgb_png(bytes));
  return read_confidence_png(bytes);
}

// Detection files normally carry a score; a plain label file (15 fields) is
// accepted with every score set to 1.
std::vector<LabelRecord> parse_detections(const std::string& text) {
  try {
    return parse_labels(text, true);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::WrongFieldCount) throw;
  }
  auto labels = parse_labels(text, false);
  for (auto& l : labels) l.score = 1.0;
  return labels;
}

}  // namespace

int cmd_convert(const RunConfig& cfg, std::ostream* log) {
  const auto ids = prepare(cfg);
  if (!ids) return kExitConfigError;
  const fs::path out_dir = cfg.output_dir / "velodyne_pseudo";
  fs::create_directories(out_dir);
  const std::string hash = cfg.hash();
  FrameLog flog(log);

  std::vector<FrameOutcome> outcomes(ids->size());
  parallel_for(ids->size(), cfg.jobs, [&](std::size_t i) {
    const std::string& id = (*ids)[i];
    Stopwatch clock;
    try {
      const Calibration calib = load_calibration(cfg.dataset_root, id);
      const ScalarRaster depth =
          read_depth_png(read_file_bytes(frame_file(cfg.dataset_root / "depth", id, ".png")));
      VariantConfig variant = cfg.variant;
      variant.seed = frame_seed(cfg.seed, numeric_id(id));

      std::optional<ScalarRaster> feature, guide;
      if (variant.channel_mode == ChannelMode::Grayscale) {
        feature = load_optional_png(frame_file(cfg.dataset_root / "image_2", id, ".png"), true);
      }
      if (variant.channel_mode == ChannelMode::MaskConfidence ||
          variant.sampling_mode == SamplingMode::MaskGuided) {
        guide = load_optional_png(frame_file(cfg.dataset_root / "conf", id, ".png"), false);
        if (variant.channel_mode == ChannelMode::MaskConfidence) feature = guide;
      }
      const PseudoLidarFrame frame =
          build_pseudolidar(depth, feature ? &*feature : nullptr, calib, variant,
                            guide ? &*guide : nullptr);
      write_file(frame_file(out_dir, id, ".bin"), write_pointcloud_bin(frame.cloud));

      FrameOutcome& o = outcomes[i];
      o.ok = true;
      o.record = {{"frame", id},
                  {"variant", variant.name},
                  {"channel_mode", to_string(variant.channel_mode)},
                  {"sampling_mode", to_string(variant.sampling_mode)},
                  {"seed", variant.seed},
                  {"points", frame.stats.output_points},
                  {"total_pixels", frame.stats.total_pixels},
                  {"valid_pixels", frame.stats.valid_pixels},
                  {"selected_points", frame.stats.selected_points},
                  {"foreground_points", frame.stats.foreground_points},
                  {"depth_range", {variant.depth_min, variant.depth_max}},
                  {"budget_order", "selection_then_budget"},
                  {"config_hash", hash}};
      flog.write({{"frame", id}, {"stage", "convert"}, {"ms", clock.ms()},
                  {"valid_pixels", frame.stats.valid_pixels}, {"points", frame.stats.output_points}});
    } catch (const Error& e) {
      outcomes[i] = failure(id, e);
      flog.write({{"frame", id}, {"stage", "convert"}, {"ms", clock.ms()}, {"error", e.what()}});
    }
  });

  std::string manifest;
  for (const auto& o : outcomes) manifest += o.record.dump() + "\n";
  write_file(out_dir / "manifest.jsonl", manifest);
  return summarize("convert", outcomes, cfg.tolerate_frame_errors, log);
}

int cmd_fit(const RunConfig& cfg, std::ostream* log) {
  const auto ids = prepare(cfg);
  if (!ids) return kExitConfigError;
  const fs::path label_dir = cfg.dataset_root / "label_2";

  SizePriors priors;
  try {
    if (cfg.fit.priors) {
      priors = *cfg.fit.priors;
    } else if (!cfg.fit.priors_split.empty()) {
      std::vector<LabelRecord> train;
      for (const auto& id : read_split(cfg.fit.priors_split)) {
        auto labels = parse_labels(read_file_text(frame_file(label_dir, id, ".txt")), false);
        train.insert(train.end(), labels.begin(), labels.end());
      }
      priors = compute_size_priors(train, cfg.fit.classes);
    } else {
      throw Error(ErrorCode::Config, "fitter needs either priors or priors_split");
    }
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const fs::path out_dir = cfg.output_dir / "detections";
  const fs::path cloud_dir =
      cfg.fit.cloud_dir.empty() ? cfg.output_dir / "velodyne_pseudo" : cfg.fit.cloud_dir;
  fs::create_directories(out_dir);
  {
    ordered_json pj = {{"config_hash", cfg.hash()}};
    for (const auto& [cls, p] : priors.all()) {
      pj["priors"][std::string(to_string(cls))] = {
          {"height", p.height}, {"width", p.width}, {"length", p.length}, {"count", p.count}};
    }
    write_file(cfg.output_dir / "priors.json", pj.dump(2) + "\n");
  }
  FrameLog flog(log);

  std::vector<FrameOutcome> outcomes(ids->size());
  parallel_for(ids->size(), cfg.jobs, [&](std::size_t i) {
    const std::string& id = (*ids)[i];
    Stopwatch clock;
    try {
      const Calibration calib = load_calibration(cfg.dataset_root, id);
      const auto gt = parse_labels(read_file_text(frame_file(label_dir, id, ".txt")), false);
      const PointCloud cloud = read_pointcloud_bin(read_file_bytes(frame_file(cloud_dir, id, ".bin")));
      const auto dets = exp0_detect(cloud, gt, calib, priors, cfg.fit.fitter);
      write_file(frame_file(out_dir, id, ".txt"), serialize_labels(dets));
      outcomes[i].ok = true;
      flog.write({{"frame", id}, {"stage", "fit"}, {"ms", clock.ms()}, {"points", cloud.size()},
                  {"gt", gt.size()}, {"detections", dets.size()}});
    } catch (const Error& e) {
      outcomes[i] = failure(id, e);
      flog.write({{"frame", id}, {"stage", "fit"}, {"ms", clock.ms()}, {"error", e.what()}});
    }
  });
  return summarize("fit", outcomes, cfg.tolerate_frame_errors, log);
}

int cmd_eval(const RunConfig& cfg, std::ostream* log) {
  const auto ids = prepare(cfg);
  if (!ids) return kExitConfigError;
  const fs::path gt_dir = cfg.eval.gt_dir.empty() ? cfg.dataset_root / "label_2" : cfg.eval.gt_dir;
  const fs::path det_dir =
      cfg.eval.detections_dir.empty() ? cfg.output_dir / "detections" : cfg.eval.detections_dir;

  std::vector<FrameData> frames(ids->size());
  std::vector<std::string> problems(ids->size());
  parallel_for(ids->size(), cfg.jobs, [&](std::size_t i) {
    const std::string& id = (*ids)[i];
    try {
      frames[i].gt = parse_labels(read_file_text(frame_file(gt_dir, id, ".txt")), false);
      frames[i].det = parse_detections(read_file_text(frame_file(det_dir, id, ".txt")));
    } catch (const Error& e) {
      problems[i] = id + ": " + e.what();
    }
  });
  bool mismatch = false;
  for (const auto& p : problems) {
    if (p.empty()) continue;
    std::cerr << "evaluation input: " << p << '\n';
    mismatch = true;
  }
  if (mismatch) return kExitEvalInputMismatch;

  EvalOptions options;
  options.criteria = cfg.eval.criteria;
  options.mode = cfg.eval.dontcare_mode;
  Stopwatch clock;
  EvalReport report = evaluate(frames, cfg.eval.classes, cfg.eval.iou_thresholds, options);
  report.config_hash = cfg.hash();
  const std::string table = format_eval_table(report);
  write_file(cfg.output_dir / "eval_report.txt", table);
  write_file(cfg.output_dir / "eval_report.jsonl", format_eval_jsonl(report));
  std::cout << table;
  if (log) {
    *log << ordered_json{{"stage", "eval"}, {"frames", frames.size()}, {"ms", clock.ms()}}.dump()
         << '\n';
  }
  return kExitOk;
}

int cmd_depth_diag(const RunConfig& cfg, std::ostream* log) {
  const auto ids = prepare(cfg);
  if (!ids) return kExitConfigError;
  const fs::path gt_dir = cfg.eval.gt_dir.empty() ? cfg.dataset_root / "label_2" : cfg.eval.gt_dir;
  FrameLog flog(log);

  std::vector<DepthDiagReport> per_frame(ids->size());
  std::vector<FrameOutcome> outcomes(ids->size());
  parallel_for(ids->size(), cfg.jobs, [&](std::size_t i) {
    const std::string& id = (*ids)[i];
    Stopwatch clock;
    try {
      const auto gt = parse_labels(read_file_text(frame_file(gt_dir, id, ".txt")), false);
      const ScalarRaster depth =
          read_depth_png(read_file_bytes(frame_file(cfg.dataset_root / "depth", id, ".png")));
      per_frame[i] = depth_diagnostic(gt, depth, cfg.depth_diag);
      outcomes[i].ok = true;
      flog.write({{"frame", id}, {"stage", "depth_diag"}, {"ms", clock.ms()}, {"gt", gt.size()}});
    } catch (const Error& e) {
      outcomes[i] = failure(id, e);
      flog.write({{"frame", id}, {"stage", "depth_diag"}, {"ms", clock.ms()}, {"error", e.what()}});
    }
  });

  DepthDiagReport total;
  total.buckets = cfg.depth_diag.buckets;
  for (ObjectClass cls : cfg.depth_diag.classes) total.cells[cls].resize(total.buckets.size());
  for (std::size_t i = 0; i < per_frame.size(); ++i) {
    if (outcomes[i].ok) total.merge(per_frame[i]);
  }
  total.config_hash = cfg.hash();
  const std::string table = format_depth_table(total);
  write_file(cfg.output_dir / "depth_diag.txt", table);
  write_file(cfg.output_dir / "depth_diag.jsonl", format_depth_jsonl(total));
  write_file(cfg.output_dir / "depth_diag.csv", format_depth_csv(total));
  std::cout << table;
  return summarize("depth_diag", outcomes, cfg.tolerate_frame_errors, log);
}

}  // namespace plidar
