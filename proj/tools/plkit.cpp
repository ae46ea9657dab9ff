// plkit: pseudo-LiDAR conversion, heuristic box fitting and KITTI-style
// evaluation.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "plidar/config.hpp"
#include "plidar/oracles/selftest.hpp"
#include "plidar/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string root;
  std::string split;
  std::string out;
  std::string variant;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  bool tolerate = false;
  std::string dontcare_mode;
};

void add_common(CLI::App* cmd, Overrides& o, bool with_variant, bool with_dontcare) {
  cmd->add_option("-c,--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--root", o.root, "KITTI-layout dataset root");
  cmd->add_option("--split", o.split, "file of 6-digit frame ids");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "global sampling seed");
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--tolerate-frame-errors", o.tolerate,
                "log failed frames and exit 0 instead of 2");
  if (with_variant) {
    cmd->add_option("--variant", o.variant, "input-representation preset")
        ->check(CLI::IsMember({"exp2", "exp4", "exp5", "exp7"}));
  }
  if (with_dontcare) {
    cmd->add_option("--dontcare-mode", o.dontcare_mode, "DontCare / ignore handling")
        ->check(CLI::IsMember({"official", "simple"}));
  }
}

plidar::RunConfig resolve(const Overrides& o) {
  plidar::RunConfig cfg;
  if (!o.config.empty()) cfg = plidar::load_run_config(o.config);
  if (!o.root.empty()) cfg.dataset_root = o.root;
  if (!o.split.empty()) cfg.split_file = o.split;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.variant.empty()) {
    const std::uint64_t keep = cfg.variant.seed;
    cfg.variant = plidar::VariantConfig::preset(o.variant);
    cfg.variant.seed = keep;
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.tolerate) cfg.tolerate_frame_errors = true;
  if (o.dontcare_mode == "simple") cfg.eval.dontcare_mode = plidar::DontCareMode::Simple;
  if (o.dontcare_mode == "official") cfg.eval.dontcare_mode = plidar::DontCareMode::Official;
  cfg.validate();
  return cfg;
}

int run_selftest(const std::string& only) {
  plidar::oracles::SelftestOptions opt;
  if (const char* root = std::getenv("PLIDAR_KITTI_ROOT")) opt.kitti_root = root;
  if (const char* split = std::getenv("PLIDAR_KITTI_SPLIT")) opt.kitti_split = split;
  bool ok = true;
  for (int id = 1; id <= plidar::oracles::kNumChecks; ++id) {
    if (!only.empty() && std::to_string(id) != only) continue;
    const auto r = plidar::oracles::run_check(id, opt);
    plidar::oracles::print_result(r, std::cout);
    std::cout.flush();
    ok &= r.status != plidar::oracles::CheckStatus::Fail;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-LiDAR toolkit"};
  app.require_subcommand(1);

  Overrides o;
  auto* convert = app.add_subcommand("convert", "depth maps -> velodyne_pseudo/*.bin");
  add_common(convert, o, true, false);
  auto* fit = app.add_subcommand("fit", "heuristic 3D boxes from 2D boxes + point cloud");
  add_common(fit, o, false, false);
  auto* eval = app.add_subcommand("eval", "AP40 (BEV and 3D) of detections against labels");
  add_common(eval, o, false, true);
  auto* diag = app.add_subcommand("depth-diag", "depth accuracy per distance bucket");
  add_common(diag, o, false, false);
  std::string only;
  auto* selftest = app.add_subcommand("selftest", "run the built-in acceptance checks");
  selftest->add_option("--check", only, "run a single check (1-9)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? plidar::kExitOk : plidar::kExitConfigError;
  }

  if (*selftest) return run_selftest(only);

  plidar::RunConfig cfg;
  try {
    cfg = resolve(o);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return plidar::kExitConfigError;
  }
  if (*convert) return plidar::cmd_convert(cfg, &std::cout);
  if (*fit) return plidar::cmd_fit(cfg, &std::cout);
  if (*eval) return plidar::cmd_eval(cfg, &std::cout);
  return plidar::cmd_depth_diag(cfg, &std::cout);
}
