#include "plidar/config.hpp"

#include <cctype>
#include <cstdio>

#include "json.hpp"

namespace plidar {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, what); }

ObjectClass class_from(const std::string& name) {
  auto cls = parse_object_class(name);
  if (!cls) config_error("unknown class '" + name + "'");
  return *cls;
}

std::vector<ObjectClass> classes_from(const ordered_json& j) {
  std::vector<ObjectClass> out;
  for (const auto& v : j) out.push_back(class_from(v.get<std::string>()));
  return out;
}

ordered_json classes_to(const std::vector<ObjectClass>& classes) {
  ordered_json j = ordered_json::array();
  for (ObjectClass c : classes) j.push_back(to_string(c));
  return j;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

ClusterSelection selection_from(const std::string& s) {
  if (s == "largest") return ClusterSelection::LargestCluster;
  if (s == "nearest_median_depth") return ClusterSelection::NearestMedianDepth;
  config_error("unknown cluster_selection '" + s + "'");
}

std::string_view selection_name(ClusterSelection s) {
  return s == ClusterSelection::LargestCluster ? "largest" : "nearest_median_depth";
}

ChannelMode channel_from(const std::string& s) {
  if (s == "grayscale") return ChannelMode::Grayscale;
  if (s == "mask_confidence") return ChannelMode::MaskConfidence;
  if (s == "zero") return ChannelMode::Zero;
  config_error("unknown channel_mode '" + s + "'");
}

SamplingMode sampling_from(const std::string& s) {
  if (s == "full_scene") return SamplingMode::FullScene;
  if (s == "mask_guided") return SamplingMode::MaskGuided;
  config_error("unknown sampling_mode '" + s + "'");
}

DontCareMode dontcare_from(const std::string& s) {
  if (s == "official") return DontCareMode::Official;
  if (s == "simple") return DontCareMode::Simple;
  config_error("unknown dontcare_mode '" + s + "'");
}

VariantConfig variant_from(const ordered_json& j) {
  if (j.is_string()) return VariantConfig::preset(j.get<std::string>());
  VariantConfig v = VariantConfig::preset(j.value("preset", std::string("exp2")));
  if (j.contains("name")) v.name = j["name"].get<std::string>();
  if (j.contains("channel_mode")) v.channel_mode = channel_from(j["channel_mode"]);
  if (j.contains("sampling_mode")) v.sampling_mode = sampling_from(j["sampling_mode"]);
  v.num_points = j.value("num_points", v.num_points);
  v.depth_min = j.value("depth_min", v.depth_min);
  v.depth_max = j.value("depth_max", v.depth_max);
  v.mask_threshold = j.value("mask_threshold", v.mask_threshold);
  return v;
}

DifficultyCriteria criteria_from(const ordered_json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "kitti") config_error("unknown difficulty preset");
    return DifficultyCriteria::kitti();
  }
  DifficultyCriteria c = DifficultyCriteria::kitti();
  for (Difficulty d : kDifficulties) {
    std::string key(to_string(d));
    for (auto& ch : key) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (!j.contains(key)) continue;
    auto& lvl = c.levels[static_cast<int>(d)];
    lvl.min_height = j[key].value("min_height", lvl.min_height);
    lvl.max_occlusion = j[key].value("max_occlusion", lvl.max_occlusion);
    lvl.max_truncation = j[key].value("max_truncation", lvl.max_truncation);
  }
  return c;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  try {
    RunConfig c;
    c.dataset_root = resolve(base_dir, j.value("dataset_root", std::string()));
    c.split_file = resolve(base_dir, j.value("split", std::string()));
    c.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));
    c.seed = j.value("seed", std::uint64_t{0});
    c.jobs = j.value("jobs", 1u);
    c.tolerate_frame_errors = j.value("tolerate_frame_errors", false);
    if (j.contains("variant")) c.variant = variant_from(j["variant"]);

    if (j.contains("fitter")) {
      const auto& f = j["fitter"];
      FitterConfig& fc = c.fit.fitter;
      fc.cluster_epsilon = f.value("cluster_epsilon", fc.cluster_epsilon);
      fc.cluster_min_points = f.value("cluster_min_points", fc.cluster_min_points);
      fc.min_frustum_points = f.value("min_frustum_points", fc.min_frustum_points);
      if (f.contains("cluster_selection")) fc.cluster_selection = selection_from(f["cluster_selection"]);
      fc.isotropy_ratio = f.value("isotropy_ratio", fc.isotropy_ratio);
      fc.bottom_percentile = f.value("bottom_percentile", fc.bottom_percentile);
      if (f.contains("classes")) c.fit.classes = classes_from(f["classes"]);
      c.fit.priors_split = resolve(base_dir, f.value("priors_split", std::string()));
      c.fit.cloud_dir = resolve(base_dir, f.value("cloud_dir", std::string()));
      if (f.contains("priors")) {
        SizePriors priors;
        for (const auto& [name, dims] : f["priors"].items()) {
          // [height, width, length], the KITTI label order
          if (!dims.is_array() || dims.size() != 3) config_error("prior for " + name + " needs 3 values");
          priors.set(class_from(name), {dims[2].get<double>(), dims[1].get<double>(),
                                        dims[0].get<double>(), 0});
        }
        c.fit.priors = priors;
      }
    }

    if (j.contains("eval")) {
      const auto& e = j["eval"];
      if (e.contains("iou_thresholds")) {
        c.eval.iou_thresholds = e["iou_thresholds"].get<std::vector<double>>();
      }
      if (e.contains("classes")) c.eval.classes = classes_from(e["classes"]);
      if (e.contains("difficulty")) c.eval.criteria = criteria_from(e["difficulty"]);
      if (e.contains("dontcare_mode")) c.eval.dontcare_mode = dontcare_from(e["dontcare_mode"]);
      c.eval.gt_dir = resolve(base_dir, e.value("gt_dir", std::string()));
      c.eval.detections_dir = resolve(base_dir, e.value("detections_dir", std::string()));
    }

    if (j.contains("depth_diag")) {
      const auto& d = j["depth_diag"];
      c.depth_diag.threshold_m = d.value("threshold_m", c.depth_diag.threshold_m);
      if (d.contains("buckets")) c.depth_diag.buckets = d["buckets"].get<std::vector<double>>();
      c.depth_diag.depth_min = d.value("depth_min", c.depth_diag.depth_min);
      c.depth_diag.depth_max = d.value("depth_max", c.depth_diag.depth_max);
      if (d.contains("classes")) c.depth_diag.classes = classes_from(d["classes"]);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("bad config value: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    config_error(e.what());
  }
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file_text(path);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return parse_run_config(text, fs::absolute(path).parent_path());
}

std::vector<std::string> read_split(const fs::path& path) {
  std::string text;
  try {
    text = read_file_text(path);
  } catch (const Error& e) {
    config_error(e.what());
  }
  std::vector<std::string> ids;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string id = text.substr(start, end - start);
    while (!id.empty() && std::isspace(static_cast<unsigned char>(id.back()))) id.pop_back();
    while (!id.empty() && std::isspace(static_cast<unsigned char>(id.front()))) id.erase(id.begin());
    if (!id.empty()) {
      const bool ok = id.size() == 6 && std::all_of(id.begin(), id.end(), [](char ch) {
                        return std::isdigit(static_cast<unsigned char>(ch));
                      });
      if (!ok) config_error("split id '" + id + "' is not a zero-padded 6-digit id");
      ids.push_back(id);
    }
    start = end + 1;
  }
  return ids;
}

void RunConfig::validate() const {
  if (dataset_root.empty() || !fs::is_directory(dataset_root)) {
    config_error("dataset_root '" + dataset_root.string() + "' is not a directory");
  }
  if (split_file.empty() || !fs::is_regular_file(split_file)) {
    config_error("split file '" + split_file.string() + "' does not exist");
  }
  read_split(split_file);
  if (!fit.priors_split.empty() && !fs::is_regular_file(fit.priors_split)) {
    config_error("priors_split '" + fit.priors_split.string() + "' does not exist");
  }
  if (jobs == 0) config_error("jobs must be >= 1");
  try {
    variant.validate();
    fit.fitter.validate();
    eval.criteria.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  for (double t : eval.iou_thresholds) {
    if (!(t > 0 && t <= 1)) config_error("IoU thresholds must lie in (0, 1]");
  }
  if (!(depth_diag.threshold_m >= 0)) config_error("depth_diag.threshold_m must be >= 0");
}

std::string RunConfig::to_json() const {
  ordered_json j;
  j["dataset_root"] = dataset_root.string();
  j["split"] = split_file.string();
  j["output_dir"] = output_dir.string();
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["tolerate_frame_errors"] = tolerate_frame_errors;
  j["variant"] = {{"name", variant.name},
                  {"channel_mode", to_string(variant.channel_mode)},
                  {"sampling_mode", to_string(variant.sampling_mode)},
                  {"num_points", variant.num_points},
                  {"depth_min", variant.depth_min},
                  {"depth_max", variant.depth_max},
                  {"mask_threshold", variant.mask_threshold}};
  const FitterConfig& f = fit.fitter;
  ordered_json fj = {{"cluster_epsilon", f.cluster_epsilon},
                     {"cluster_min_points", f.cluster_min_points},
                     {"min_frustum_points", f.min_frustum_points},
                     {"cluster_selection", selection_name(f.cluster_selection)},
                     {"isotropy_ratio", f.isotropy_ratio},
                     {"bottom_percentile", f.bottom_percentile},
                     {"classes", classes_to(fit.classes)},
                     {"priors_split", fit.priors_split.string()},
                     {"cloud_dir", fit.cloud_dir.string()}};
  if (fit.priors) {
    ordered_json pj = ordered_json::object();
    for (const auto& [cls, p] : fit.priors->all()) {
      pj[std::string(to_string(cls))] = {p.height, p.width, p.length};
    }
    fj["priors"] = pj;
  }
  j["fitter"] = fj;
  ordered_json crit = ordered_json::object();
  for (Difficulty d : kDifficulties) {
    const auto& l = eval.criteria[d];
    crit[std::string(to_string(d))] = {{"min_height", l.min_height},
                                       {"max_occlusion", l.max_occlusion},
                                       {"max_truncation", l.max_truncation}};
  }
  j["eval"] = {{"iou_thresholds", eval.iou_thresholds},
               {"classes", classes_to(eval.classes)},
               {"difficulty", crit},
               {"dontcare_mode", to_string(eval.dontcare_mode)},
               {"gt_dir", eval.gt_dir.string()},
               {"detections_dir", eval.detections_dir.string()}};
  j["depth_diag"] = {{"threshold_m", depth_diag.threshold_m},
                     {"buckets", depth_diag.buckets},
                     {"depth_min", depth_diag.depth_min},
                     {"depth_max", depth_diag.depth_max},
                     {"classes", classes_to(depth_diag.classes)}};
  return j.dump(2);
}

std::string RunConfig::hash() const {
  ordered_json j = ordered_json::parse(to_json());
  j.erase("jobs");
  const std::string canonical = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace plidar
