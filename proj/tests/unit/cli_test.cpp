#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "plidar/kitti_io.hpp"
#include "plidar/oracles/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

int plkit(const std::string& args) {
  const std::string cmd = std::string(PLKIT_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Toy {
  fs::path dir;
  std::vector<std::string> ids;

  Toy() : dir(testing::fresh_dir("cli")) {
    ids = plidar::oracles::write_toy_dataset(dir / "data", 3, 5);
  }
  ~Toy() { fs::remove_all(dir); }

  std::string flags(const std::string& out) const {
    return "--root " + (dir / "data").string() + " --split " + (dir / "data" / "val.txt").string() +
           " --out " + (dir / out).string();
  }

  fs::path write_config(const std::string& name, const std::string& body) const {
    const fs::path p = dir / name;
    plidar::write_file(p, body);
    return p;
  }
};

std::vector<nlohmann::json> read_jsonl(const fs::path& p) {
  std::vector<nlohmann::json> out;
  std::istringstream in(plidar::read_file_text(p));
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("convert is deterministic and independent of the worker count") {
    Toy toy;
    REQUIRE(plkit("convert " + toy.flags("a") + " --variant exp2 --seed 3") == 0);
    REQUIRE(plkit("convert " + toy.flags("b") + " --variant exp2 --seed 3 --jobs 3") == 0);
    REQUIRE(plkit("convert " + toy.flags("c") + " --variant exp2 --seed 4") == 0);
    for (const auto& id : toy.ids) {
      const auto a = plidar::read_file_bytes(toy.dir / "a" / "velodyne_pseudo" / (id + ".bin"));
      const auto b = plidar::read_file_bytes(toy.dir / "b" / "velodyne_pseudo" / (id + ".bin"));
      const auto c = plidar::read_file_bytes(toy.dir / "c" / "velodyne_pseudo" / (id + ".bin"));
      CHECK(a.size() == 16384 * 16);
      CHECK(a == b);
      CHECK(a != c);
    }
    const auto manifest = read_jsonl(toy.dir / "a" / "velodyne_pseudo" / "manifest.jsonl");
    CHECK(manifest.size() == toy.ids.size());
  }

  TEST_CASE("every variant converts the toy data") {
    Toy toy;
    for (const char* v : {"exp2", "exp4", "exp5", "exp7"}) {
      CAPTURE(v);
      CHECK(plkit("convert " + toy.flags(v) + " --variant " + v) == 0);
    }
    const auto cloud = plidar::read_pointcloud_bin(
        plidar::read_file_bytes(toy.dir / "exp5" / "velodyne_pseudo" / (toy.ids[0] + ".bin")));
    CHECK(cloud.points.size() == 40000);
  }

  TEST_CASE("missing feature rasters fail the frame") {
    Toy toy;
    fs::remove(toy.dir / "data" / "conf" / (toy.ids[1] + ".png"));
    CHECK(plkit("convert " + toy.flags("x") + " --variant exp4") == 2);
    CHECK(plkit("convert " + toy.flags("y") + " --variant exp4 --tolerate-frame-errors") == 0);
    CHECK(fs::exists(toy.dir / "y" / "velodyne_pseudo" / (toy.ids[0] + ".bin")));
    CHECK_FALSE(fs::exists(toy.dir / "y" / "velodyne_pseudo" / (toy.ids[1] + ".bin")));
    // Variants that do not read the confidence map are unaffected.
    CHECK(plkit("convert " + toy.flags("z") + " --variant exp7") == 0);
  }

  TEST_CASE("ground truth scored against itself is perfect") {
    Toy toy;
    const auto cfg = toy.write_config("gt.json", R"({
      "dataset_root": "data", "split": "data/val.txt", "output_dir": "gt_eval",
      "eval": {"detections_dir": "data/label_2", "classes": ["Car"]}
    })");
    REQUIRE(plkit("eval --config " + cfg.string()) == 0);
    bool any = false;
    for (const auto& j : read_jsonl(toy.dir / "gt_eval" / "eval_report.jsonl")) {
      if (j["ap"].is_null()) continue;
      any = true;
      CHECK(j["ap"].get<double>() == 100.0);
    }
    CHECK(any);
    CHECK(fs::exists(toy.dir / "gt_eval" / "eval_report.txt"));
  }

  TEST_CASE("convert, fit, eval and depth-diag end to end") {
    Toy toy;
    const auto cfg = toy.write_config("run.json", R"({
      "dataset_root": "data", "split": "data/val.txt", "output_dir": "run",
      "variant": "exp7", "seed": 1,
      "fitter": {"priors_split": "data/train.txt"}
    })");
    REQUIRE(plkit("convert --config " + cfg.string()) == 0);
    REQUIRE(plkit("fit --config " + cfg.string()) == 0);
    CHECK(fs::exists(toy.dir / "run" / "priors.json"));
    std::size_t dets = 0;
    for (const auto& id : toy.ids) {
      const auto labels = plidar::parse_labels(
          plidar::read_file_text(toy.dir / "run" / "detections" / (id + ".txt")), true);
      dets += labels.size();
    }
    CHECK(dets > 0);
    CHECK(plkit("eval --config " + cfg.string() + " --dontcare-mode simple") == 0);
    const auto report = read_jsonl(toy.dir / "run" / "eval_report.jsonl");
    CHECK(report.size() == 2 * 3 * 2);
    CHECK(report[0]["mode"] == "simple");
    CHECK(plkit("depth-diag --config " + cfg.string()) == 0);
    CHECK(fs::exists(toy.dir / "run" / "depth_diag.csv"));
    const auto diag = read_jsonl(toy.dir / "run" / "depth_diag.jsonl");
    CHECK(!diag.empty());
  }

  TEST_CASE("exit codes for configuration and input problems") {
    Toy toy;
    CHECK(plkit("convert --root /nonexistent --split /nonexistent --out " + (toy.dir / "o").string()) == 1);
    CHECK(plkit("convert " + toy.flags("o") + " --variant exp3") == 1);
    CHECK(plkit("bogus") == 1);
    const auto bad = toy.write_config("bad.json", "{\"seed\": \"abc\"}");
    CHECK(plkit("convert --config " + bad.string()) == 1);
    // Evaluation with a missing detection file is an input mismatch.
    CHECK(plkit("eval " + toy.flags("e")) == 3);
    CHECK(plkit("--help") == 0);
  }
}
