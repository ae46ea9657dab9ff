#include "plidar/oracles/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "plidar/config.hpp"
#include "plidar/fitter.hpp"
#include "plidar/oracles/mc_iou.hpp"
#include "plidar/oracles/reference_ap.hpp"
#include "plidar/oracles/synthetic.hpp"
#include "plidar/pipeline.hpp"

namespace plidar::oracles {

namespace {

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

CheckResult result(int id, std::string name, bool pass, std::string detail) {
  return {id, std::move(name), pass ? CheckStatus::Pass : CheckStatus::Fail, std::move(detail)};
}

CheckResult iou_oracle(const SelftestOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const Calibration calib = kitti_like_calibration();
  Rng rng(20240611);
  double worst_bev = 0, worst_3d = 0;
  std::size_t overlapping = 0;
  for (std::size_t i = 0; i < opt.iou_pairs; ++i) {
    auto [a, b] = random_box_pair(rng);
    if (i % 2 == 1) {
      a = box_cam_to_velo(a, calib);
      b = box_cam_to_velo(b, calib);
    }
    const SampledIou ref = sampled_iou(a, b, opt.iou_samples, 1000 + i);
    const double bev = iou_bev(a, b), v3 = iou_3d(a, b);
    overlapping += v3 > 0;
    worst_bev = std::max(worst_bev, std::abs(bev - ref.bev));
    worst_3d = std::max(worst_3d, std::abs(v3 - ref.box3d));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = worst_bev <= 2e-3 && worst_3d <= 2e-3 && secs < 60;
  return result(1, "IoU vs sampled oracle", pass,
                fmt("%zu pairs (%zu overlapping), max |dBEV|=%.2e max |d3D|=%.2e tol=2e-3, %.1fs < 60s",
                    opt.iou_pairs, overlapping, worst_bev, worst_3d, secs));
}

CheckResult iou_fixtures() {
  const Box3D sq({0, 1, 0}, {1, 1, 1}, 0, Frame::Camera);
  const Box3D rot({0, 1, 0}, {1, 1, 1}, std::numbers::pi / 4, Frame::Camera);
  const double area = bev_intersection_area(sq, rot);
  const double want_area = 2 * (std::sqrt(2.0) - 1);

  const Box3D low({3, 1.6, 20}, {3.9, 1.6, 1.5}, 0.4, Frame::Camera);
  const Box3D high({3, 1.6 - 0.75, 20}, {3.9, 1.6, 1.5}, 0.4, Frame::Camera);
  const double v = iou_3d(low, high);

  const Box3D vlow({10, 2, -0.9}, {4, 2, 1.6}, -1.1, Frame::Velodyne);
  const Box3D vhigh({10, 2, -0.1}, {4, 2, 1.6}, -1.1, Frame::Velodyne);
  const double vv = iou_3d(vlow, vhigh);

  const bool pass = std::abs(area - want_area) <= 1e-6 && std::abs(v - 1.0 / 3) <= 1e-9 &&
                    std::abs(vv - 1.0 / 3) <= 1e-9;
  return result(2, "Analytic IoU fixtures", pass,
                fmt("octagon |d|=%.2e tol=1e-6; half-height 3D IoU |d|=%.2e (cam) %.2e (velo) tol=1e-9",
                    std::abs(area - want_area), std::abs(v - 1.0 / 3), std::abs(vv - 1.0 / 3)));
}

std::vector<MatchQuery> all_queries() {
  std::vector<MatchQuery> out;
  for (ObjectClass cls : {ObjectClass::Car, ObjectClass::Pedestrian, ObjectClass::Cyclist}) {
    for (Difficulty d : kDifficulties) {
      for (double t : {0.5, 0.7}) {
        for (BoxMetric m : {BoxMetric::Bev, BoxMetric::Box3D}) out.push_back({cls, d, t, m});
      }
    }
  }
  return out;
}

std::vector<FrameData> random_scene(Rng& rng) {
  const int frames = std::uniform_int_distribution<int>(1, 4)(rng);
  std::vector<FrameData> scene;
  for (int i = 0; i < frames; ++i) scene.push_back(random_eval_frame(rng, 20 / frames));
  return scene;
}

CheckResult ap_oracle(const SelftestOptions& opt) {
  Rng rng(77);
  const auto queries = all_queries();
  double worst = 0;
  std::size_t compared = 0, mismatched_defined = 0, perfect_cells = 0, perfect_bad = 0,
              rescale_bad = 0;
  for (std::size_t s = 0; s < opt.ap_scenes; ++s) {
    const auto scene = random_scene(rng);

    std::vector<FrameData> perfect = scene;
    std::vector<FrameData> rescaled = scene;
    for (auto& f : perfect) {
      f.det.clear();
      for (const auto& g : f.gt) {
        if (g.class_name == ObjectClass::DontCare) continue;
        LabelRecord d = g;
        d.score = uniform(rng, 0, 1);
        f.det.push_back(d);
      }
    }
    for (auto& f : rescaled) {
      for (auto& d : f.det) d.score = 3.0 + std::exp(2.0 * *d.score);
    }

    for (DontCareMode mode : {DontCareMode::Official, DontCareMode::Simple}) {
      EvalOptions eo;
      eo.mode = mode;
      for (const auto& q : queries) {
        const auto prod = ap40(scene, q, eo);
        const auto ref = reference_ap40(scene, q, eo);
        if (prod.has_value() != ref.has_value()) {
          ++mismatched_defined;
        } else if (prod) {
          ++compared;
          worst = std::max(worst, std::abs(prod->ap - *ref));
        }
        const auto scaled = ap40(rescaled, q, eo);
        if (prod.has_value() != scaled.has_value() || (prod && prod->ap != scaled->ap)) {
          ++rescale_bad;
        }
        if (mode == DontCareMode::Official) {
          const auto p = ap40(perfect, q, eo);
          if (p) {
            ++perfect_cells;
            perfect_bad += p->ap != 100.0;
          }
        }
      }
    }
  }
  const bool pass = worst <= 1e-9 && mismatched_defined == 0 && perfect_bad == 0 &&
                    rescale_bad == 0 && perfect_cells > 0;
  return result(3, "AP40 vs brute-force reference", pass,
                fmt("%zu scenes, %zu defined cells, max |dAP|=%.2e tol=1e-9, defined-mismatch=%zu; "
                    "perfect: %zu/%zu cells == 100.0; rescaled scores: %zu changed",
                    opt.ap_scenes, compared, worst, mismatched_defined,
                    perfect_cells - perfect_bad, perfect_cells, rescale_bad));
}

ScalarRaster random_depth(Rng& rng, int w, int h) {
  ScalarRaster d = ScalarRaster::filled(w, h, RasterSemantics::DepthMeters, 0.f);
  const float specials[] = {0.f, 1.f, 60.f, std::nextafter(1.f, 2.f), std::nextafter(60.f, 0.f),
                            -3.f, 100.f};
  for (auto& v : d.values) {
    const double r = uniform(rng, 0, 1);
    v = r < 0.1 ? specials[std::uniform_int_distribution<int>(0, 6)(rng)]
                : static_cast<float>(uniform(rng, 0, 80));
  }
  return d;
}

CheckResult cloud_invariants() {
  Rng rng(4);
  const Calibration calib = kitti_like_calibration();
  bool coords_equal = true, intensity_ok = true, depth_ok = true, count_ok = true;
  std::size_t checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const int w = trial < 3 ? 320 : 64, h = trial < 3 ? 128 : 48;  // small rasters pad the budget
    const ScalarRaster depth = random_depth(rng, w, h);
    ScalarRaster gray = ScalarRaster::filled(w, h, RasterSemantics::Grayscale01, 0.f);
    ScalarRaster conf = ScalarRaster::filled(w, h, RasterSemantics::Confidence01, 0.f);
    for (auto& v : gray.values) v = static_cast<float>(uniform(rng, 0, 1));
    for (auto& v : conf.values) v = uniform(rng, 0, 1) < 0.3 ? static_cast<float>(uniform(rng, 0, 1)) : 0.f;

    const std::uint64_t seed = 1000 + trial;
    auto build = [&](const char* preset) {
      VariantConfig cfg = VariantConfig::preset(preset);
      cfg.seed = seed;
      const ScalarRaster* feature = cfg.channel_mode == ChannelMode::Grayscale        ? &gray
                                    : cfg.channel_mode == ChannelMode::MaskConfidence ? &conf
                                                                                      : nullptr;
      const ScalarRaster* guide = cfg.sampling_mode == SamplingMode::MaskGuided ? &conf : nullptr;
      auto frame = build_pseudolidar(depth, feature, calib, cfg, guide);
      count_ok &= frame.cloud.points.size() == cfg.num_points;
      for (std::size_t i = 0; i < frame.cloud.points.size(); ++i) {
        const float in = frame.cloud.points[i].intensity;
        intensity_ok &= in >= 0.f && in <= 1.f;
        const float z = depth.values[frame.source_pixel[i]];
        depth_ok &= z > 1.f && z < 60.f;
      }
      ++checked;
      return frame;
    };
    const auto e2 = build("exp2");
    const auto e7 = build("exp7");
    build("exp4");
    build("exp5");
    if (e2.cloud.points.size() != e7.cloud.points.size()) {
      coords_equal = false;
    } else {
      for (std::size_t i = 0; i < e2.cloud.points.size(); ++i) {
        const auto& a = e2.cloud.points[i];
        const auto& b = e7.cloud.points[i];
        coords_equal &= std::memcmp(&a, &b, 3 * sizeof(float)) == 0;
      }
    }
  }
  const bool pass = coords_equal && intensity_ok && depth_ok && count_ok;
  return result(4, "Pseudo-LiDAR construction invariants", pass,
                fmt("%zu clouds: exp2/exp7 xyz bit-identical=%s, intensity in [0,1]=%s, "
                    "depth in (1,60)=%s, count == budget (16384/40000)=%s",
                    checked, coords_equal ? "yes" : "no", intensity_ok ? "yes" : "no",
                    depth_ok ? "yes" : "no", count_ok ? "yes" : "no"));
}

CheckResult transform_roundtrip() {
  Rng rng(5);
  double worst = 0;
  for (int c = 0; c < 10; ++c) {
    const Calibration calib = c == 0 ? kitti_like_calibration() : random_calibration(rng);
    for (int i = 0; i < 10000; ++i) {
      const Vec3 p{uniform(rng, -80, 80), uniform(rng, -80, 80), uniform(rng, -5, 5)};
      const Vec3 q = cam_to_velo(velo_to_cam(p, calib), calib);
      worst = std::max({worst, std::abs(q.x - p.x), std::abs(q.y - p.y), std::abs(q.z - p.z)});
    }
  }
  return result(5, "Camera/velodyne round trip", worst < 1e-5,
                fmt("10 calibrations x 10^4 points, max deviation %.2e m < 1e-5", worst));
}

CheckResult fitter_scene() {
  Rng rng(6);
  double worst_iou = 1;
  int detected = 0, scenes = 0;
  for (double yaw : {0.0, 0.3, -0.8, 1.4, 2.6, -3.0}) {
    const CarScene scene = make_car_scene(rng, yaw, 6000);
    SizePriors priors;
    const BoxDims& d = scene.cam_box.dims();
    priors.set(ObjectClass::Car, {d.length, d.width, d.height, 1});
    const std::vector<LabelRecord> gt = {scene.gt};
    const auto dets = exp0_detect(scene.cloud, gt, scene.calib, priors, FitterConfig{});
    ++scenes;
    if (dets.size() != 1) {
      worst_iou = 0;
      continue;
    }
    ++detected;
    worst_iou = std::min(worst_iou, iou_3d(box_from_label(dets[0]), scene.cam_box));
  }

  Rng prng(60);
  const double yaw = 0.3, cs = std::cos(yaw), sn = std::sin(yaw);
  std::vector<Vec2> pts;
  for (int i = 0; i < 10000; ++i) {
    const double a = uniform(prng, -1.95, 1.95), b = uniform(prng, -0.8, 0.8);
    pts.push_back({12 + cs * a - sn * b, -3 + sn * a + cs * b});
  }
  const YawEstimate est = pca_yaw(pts);
  double err = std::abs(std::remainder(est.yaw - yaw, std::numbers::pi));

  const bool pass = detected == scenes && worst_iou >= 0.7 && err <= 0.02;
  return result(6, "Fitter synthetic scene", pass,
                fmt("%d/%d scenes fitted, min 3D IoU %.3f >= 0.7; PCA yaw error at 0.3 rad %.2e <= 0.02",
                    detected, scenes, worst_iou, err));
}

CheckResult depth_semantics() {
  // Hand-built suite: (class, gt z, predicted depth painted in the box).
  struct Case {
    ObjectClass cls;
    double z;
    float pred;
  };
  const Case cases[] = {
      {ObjectClass::Car, 5, 5.0f},    {ObjectClass::Car, 15, 16.5f},  // boundary: correct
      {ObjectClass::Car, 18, 20.0f},  {ObjectClass::Car, 25, 24.0f},
      {ObjectClass::Car, 35, 38.0f},  {ObjectClass::Car, 50, 50.5f},
      {ObjectClass::Car, 70, 0.0f},   // no valid pixels
      {ObjectClass::Pedestrian, 12, 10.5f}, {ObjectClass::Pedestrian, 30, 27.0f},
  };
  const int n = static_cast<int>(std::size(cases));
  ScalarRaster depth = ScalarRaster::filled(40 * n, 50, RasterSemantics::DepthMeters, 0.f);
  std::vector<LabelRecord> gt;
  for (int i = 0; i < n; ++i) {
    LabelRecord l;
    l.class_name = cases[i].cls;
    l.bbox2d = {40.0 * i + 2, 10, 40.0 * i + 30, 40};
    l.length = l.width = l.height = 1;
    l.z = cases[i].z;
    gt.push_back(l);
    for (int v = 10; v < 40; ++v) {
      for (int u = 40 * i + 2; u < 40 * i + 30; ++u) depth.at(u, v) = cases[i].pred;
    }
  }
  const DepthDiagReport rep = depth_diagnostic(gt, depth);
  const auto& car = rep.cells.at(ObjectClass::Car);
  const auto& ped = rep.cells.at(ObjectClass::Pedestrian);
  const auto& cyc = rep.cells.at(ObjectClass::Cyclist);
  const bool hand = car[0].accuracy() == 200.0 / 3 && car[1].accuracy() == 300.0 / 5 &&
                    car[2].accuracy() == 400.0 / 7 && ped[0].accuracy() == 100.0 &&
                    ped[1].accuracy() == 50.0 && ped[2].accuracy() == 50.0 &&
                    !cyc[0].accuracy() && !cyc[2].accuracy();

  // Inclusive boundary on both sides, exclusive just past it.
  auto single = [&](float pred) {
    ScalarRaster d = ScalarRaster::filled(20, 20, RasterSemantics::DepthMeters, pred);
    LabelRecord l;
    l.bbox2d = {2, 2, 18, 18};
    l.length = l.width = l.height = 1;
    l.z = 20;
    const std::vector<LabelRecord> one = {l};
    return depth_diagnostic(one, d).cells.at(ObjectClass::Car)[0].correct;
  };
  const bool boundary = single(21.5f) == 1 && single(18.5f) == 1 &&
                        single(std::nextafter(21.5f, 30.f)) == 0;

  // Cumulative buckets are monotone on random frames.
  Rng rng(7);
  bool monotone = true;
  for (int t = 0; t < 50; ++t) {
    ScalarRaster d = random_depth(rng, 200, 60);
    std::vector<LabelRecord> labels;
    for (int k = 0; k < 8; ++k) {
      LabelRecord l;
      l.class_name = k % 3 == 0 ? ObjectClass::Pedestrian : ObjectClass::Car;
      const double left = uniform(rng, 0, 180), top = uniform(rng, 0, 50);
      l.bbox2d = {left, top, left + uniform(rng, 0.5, 20), top + uniform(rng, 0.5, 10)};
      l.length = l.width = l.height = 1;
      l.z = uniform(rng, 1, 90);
      labels.push_back(l);
    }
    const auto r = depth_diagnostic(labels, d);
    for (const auto& [cls, row] : r.cells) {
      for (std::size_t b = 1; b < row.size(); ++b) {
        monotone &= row[b - 1].count <= row[b].count && row[b - 1].correct <= row[b].correct;
      }
    }
  }
  return result(7, "Depth diagnostic semantics", hand && boundary && monotone,
                fmt("|d|=1.5 counted correct=%s, cumulative buckets monotone=%s, "
                    "hand-computed suite exact=%s",
                    boundary ? "yes" : "no", monotone ? "yes" : "no", hand ? "yes" : "no"));
}

bool same_labels(const std::vector<LabelRecord>& a, const std::vector<LabelRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.class_name != y.class_name || x.truncation != y.truncation ||
        x.occlusion != y.occlusion || x.alpha != y.alpha || !(x.bbox2d == y.bbox2d) ||
        x.height != y.height || x.width != y.width || x.length != y.length || x.x != y.x ||
        x.y != y.y || x.z != y.z || x.rotation_y != y.rotation_y || x.score != y.score) {
      return false;
    }
  }
  return true;
}

CheckResult format_fidelity() {
  Rng rng(8);
  double calib_err = 0;
  int labels_bad = 0, bin_bad = 0, depth_bad = 0, conf_bad = 0, rgb_bad = 0;
  auto cmp = [&](const Calibration& a, const Calibration& b) {
    for (int i = 0; i < 12; ++i) calib_err = std::max(calib_err, std::abs(a.p2()[i] - b.p2()[i]));
    for (int i = 0; i < 9; ++i) {
      calib_err = std::max(calib_err, std::abs(a.r0_rect()[i] - b.r0_rect()[i]));
    }
    for (int i = 0; i < 12; ++i) {
      calib_err = std::max(calib_err, std::abs(a.tr_velo_to_cam()[i] - b.tr_velo_to_cam()[i]));
    }
  };
  const Calibration kitti = kitti_like_calibration();
  cmp(kitti, parse_calibration(serialize_calibration(kitti)));
  for (int t = 0; t < 200; ++t) {
    const Calibration c = random_calibration(rng);
    cmp(c, parse_calibration(serialize_calibration(c)));

    const FrameData f = random_eval_frame(rng, 20);
    labels_bad += !same_labels(f.gt, parse_labels(serialize_labels(f.gt), false));
    labels_bad += !same_labels(f.det, parse_labels(serialize_labels(f.det), true));
  }
  for (int t = 0; t < 50; ++t) {
    PointCloud cloud{Frame::Velodyne, {}};
    const int n = std::uniform_int_distribution<int>(0, 5000)(rng);
    for (int i = 0; i < n; ++i) {
      PointXYZI p;
      std::uint32_t bits[4];
      for (auto& b : bits) {
        do {
          b = static_cast<std::uint32_t>(rng());
        } while (((b >> 23) & 0xff) == 0xff);  // finite values only
      }
      std::memcpy(&p, bits, sizeof(p));
      cloud.points.push_back(p);
    }
    const PointCloud back = read_pointcloud_bin(write_pointcloud_bin(cloud));
    bin_bad += back.points.size() != cloud.points.size() ||
               (n > 0 && std::memcmp(back.points.data(), cloud.points.data(),
                                     cloud.points.size() * sizeof(PointXYZI)) != 0);

    const int w = std::uniform_int_distribution<int>(1, 90)(rng);
    const int h = std::uniform_int_distribution<int>(1, 40)(rng);
    ScalarRaster depth = ScalarRaster::filled(w, h, RasterSemantics::DepthMeters, 0.f);
    ScalarRaster conf = ScalarRaster::filled(w, h, RasterSemantics::Confidence01, 0.f);
    for (auto& v : depth.values) {
      v = static_cast<float>(std::uniform_int_distribution<int>(0, 65535)(rng) / 256.0);
    }
    for (auto& v : conf.values) {
      v = static_cast<float>(std::uniform_int_distribution<int>(0, 65535)(rng) / 65535.0);
    }
    depth_bad += read_depth_png(write_depth_png(depth)).values != depth.values;
    conf_bad += read_confidence_png(write_confidence_png(conf)).values != conf.values;

    RgbImage img{w, h, std::vector<std::uint8_t>(3 * w * h)};
    for (auto& b : img.rgb) b = static_cast<std::uint8_t>(rng());
    rgb_bad += read_rgb_png(write_rgb_png(img)).rgb != img.rgb;
  }
  const bool pass = calib_err <= 1e-6 && labels_bad + bin_bad + depth_bad + conf_bad + rgb_bad == 0;
  return result(8, "Format round trips", pass,
                fmt("calibration max err %.1e <= 1e-6; label mismatches %d; .bin bit-exact "
                    "failures %d; depth PNG (k/256) %d; confidence PNG %d; RGB PNG %d",
                    calib_err, labels_bad, bin_bad, depth_bad, conf_bad, rgb_bad));
}

CheckResult kitti_end_to_end(const SelftestOptions& opt) {
  if (opt.kitti_root.empty()) {
    return {9, "KITTI end-to-end fitter sanity", CheckStatus::Skip,
            "no KITTI data configured (set PLIDAR_KITTI_ROOT and PLIDAR_KITTI_SPLIT)"};
  }
  RunConfig cfg;
  cfg.dataset_root = opt.kitti_root;
  cfg.split_file = opt.kitti_split.empty() ? opt.kitti_root / "val.txt" : opt.kitti_split;
  cfg.output_dir = opt.work_dir.empty() ? std::filesystem::temp_directory_path() / "plidar_kitti"
                                        : opt.work_dir;
  const auto train = opt.kitti_root / "train.txt";
  cfg.fit.priors_split = std::filesystem::is_regular_file(train) ? train : cfg.split_file;
  cfg.variant = VariantConfig::preset("exp7");
  std::ostringstream log;
  const int rc_convert = cmd_convert(cfg, &log);
  const int rc_fit = rc_convert == kExitOk ? cmd_fit(cfg, &log) : -1;
  const int rc_eval = rc_fit == kExitOk ? cmd_eval(cfg, &log) : -1;
  if (rc_eval != kExitOk) {
    return result(9, "KITTI end-to-end fitter sanity", false,
                  fmt("convert=%d fit=%d eval=%d", rc_convert, rc_fit, rc_eval));
  }
  const std::string report = read_file_text(cfg.output_dir / "eval_report.jsonl");
  double ap = -1;
  std::istringstream lines(report);
  for (std::string line; std::getline(lines, line);) {
    const auto j = nlohmann::json::parse(line);
    if (j["class"] == "Car" && j["difficulty"] == "Moderate" && j["metric"] == "3d" &&
        j["iou"] == 0.7 && j["ap"].is_number()) {
      ap = j["ap"].get<double>();
    }
  }
  return result(9, "KITTI end-to-end fitter sanity", ap >= 0 && ap < 10,
                fmt("Car AP_3D Moderate @0.7 = %.2f (expected low single digits)", ap));
}

}  // namespace

CheckResult run_check(int id, const SelftestOptions& options) {
  try {
    switch (id) {
      case 1: return iou_oracle(options);
      case 2: return iou_fixtures();
      case 3: return ap_oracle(options);
      case 4: return cloud_invariants();
      case 5: return transform_roundtrip();
      case 6: return fitter_scene();
      case 7: return depth_semantics();
      case 8: return format_fidelity();
      case 9: return kitti_end_to_end(options);
      default: break;
    }
  } catch (const std::exception& e) {
    return result(id, "check " + std::to_string(id), false, std::string("exception: ") + e.what());
  }
  return result(id, "unknown check", false, "no such check");
}

std::vector<CheckResult> run_selftest(const SelftestOptions& options) {
  std::vector<CheckResult> out;
  for (int id = 1; id <= kNumChecks; ++id) out.push_back(run_check(id, options));
  return out;
}

void print_result(const CheckResult& r, std::ostream& out) {
  const char* tag = r.status == CheckStatus::Pass ? "PASS" : r.status == CheckStatus::Fail ? "FAIL" : "SKIP";
  out << '[' << tag << "] " << r.id << ". " << r.name << ": " << r.detail << '\n';
}

bool print_results(const std::vector<CheckResult>& results, std::ostream& out) {
  bool ok = true;
  for (const auto& r : results) {
    print_result(r, out);
    ok &= r.status != CheckStatus::Fail;
  }
  return ok;
}

}  // namespace plidar::oracles
