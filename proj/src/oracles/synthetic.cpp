#include "plidar/oracles/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace plidar::oracles {

namespace fs = std::filesystem;

namespace {

constexpr double kCameraHeight = 1.65;

Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  w /= norm, x /= norm, y /= norm, z /= norm;
  return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
          2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
          2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
}

// Camera-frame point of a box given length/width offsets and height above the
// bottom face.
Vec3 camera_box_point(const Box3D& box, double a, double b, double h) {
  const Vec3& c = box.center();
  const double cs = std::cos(box.yaw()), sn = std::sin(box.yaw());
  return {c.x + cs * a + sn * b, c.y - h, c.z - sn * a + cs * b};
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

BoxDims class_dims(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::Pedestrian:
    case ObjectClass::PersonSitting:
      return {0.8, 0.6, 1.75};
    case ObjectClass::Cyclist:
      return {1.75, 0.6, 1.7};
    case ObjectClass::Van:
      return {5.1, 1.9, 2.2};
    default:
      return {3.9, 1.6, 1.56};
  }
}

LabelRecord dontcare_label(const BBox2D& bbox) {
  LabelRecord l;
  l.class_name = ObjectClass::DontCare;
  l.truncation = -1;
  l.occlusion = -1;
  l.alpha = -10;
  l.bbox2d = bbox;
  l.height = l.width = l.length = -1;
  l.x = l.y = l.z = -1000;
  l.rotation_y = -10;
  return l;
}

}  // namespace

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::string kitti_like_calibration_text() {
  return "P0: 7.215377000000e+02 0.000000000000e+00 6.095593000000e+02 0.000000000000e+00 "
         "0.000000000000e+00 7.215377000000e+02 1.728540000000e+02 0.000000000000e+00 "
         "0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 0.000000000000e+00\n"
         "P1: 7.215377000000e+02 0.000000000000e+00 6.095593000000e+02 -3.875744000000e+02 "
         "0.000000000000e+00 7.215377000000e+02 1.728540000000e+02 0.000000000000e+00 "
         "0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 0.000000000000e+00\n"
         "P2: 7.215377000000e+02 0.000000000000e+00 6.095593000000e+02 4.485728000000e+01 "
         "0.000000000000e+00 7.215377000000e+02 1.728540000000e+02 2.163791000000e-01 "
         "0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 2.745884000000e-03\n"
         "P3: 7.215377000000e+02 0.000000000000e+00 6.095593000000e+02 -3.395242000000e+02 "
         "0.000000000000e+00 7.215377000000e+02 1.728540000000e+02 2.199936000000e+00 "
         "0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 2.729905000000e-03\n"
         "R0_rect: 9.999239000000e-01 9.837760000000e-03 -7.445048000000e-03 "
         "-9.869795000000e-03 9.999421000000e-01 -4.278459000000e-03 "
         "7.402527000000e-03 4.351614000000e-03 9.999631000000e-01\n"
         "Tr_velo_to_cam: 7.533745000000e-03 -9.999714000000e-01 -6.166020000000e-04 "
         "-4.069766000000e-03 1.480249000000e-02 7.280733000000e-04 -9.998902000000e-01 "
         "-7.631618000000e-02 9.998621000000e-01 7.523790000000e-03 1.480755000000e-02 "
         "-2.717806000000e-01\n"
         "Tr_imu_to_velo: 9.999976000000e-01 7.553071000000e-04 -2.035826000000e-03 "
         "-8.086759000000e-01 -7.854027000000e-04 9.998898000000e-01 -1.482298000000e-02 "
         "3.195559000000e-01 2.024406000000e-03 1.482454000000e-02 9.998881000000e-01 "
         "-7.997231000000e-01\n";
}

Calibration kitti_like_calibration() { return parse_calibration(kitti_like_calibration_text()); }

Calibration random_calibration(Rng& rng) {
  const double fx = uniform(rng, 300, 1200);
  const double fy = fx * uniform(rng, 0.95, 1.05);
  const Mat34 p2 = {fx, 0, uniform(rng, 100, 700), uniform(rng, -50, 50),
                    0,  fy, uniform(rng, 50, 300), uniform(rng, -1, 1),
                    0,  0,  1,                     uniform(rng, -0.01, 0.01)};
  const Mat3 r0 = random_rotation(rng);
  const Mat3 r = random_rotation(rng);
  const Mat34 tr = {r[0], r[1], r[2], uniform(rng, -2, 2), r[3], r[4], r[5], uniform(rng, -2, 2),
                    r[6], r[7], r[8], uniform(rng, -2, 2)};
  return Calibration::from_matrices(p2, r0, tr);
}

std::pair<Box3D, Box3D> random_box_pair(Rng& rng) {
  const Vec3 ca{uniform(rng, -15, 15), uniform(rng, 0.5, 2.5), uniform(rng, 5, 50)};
  const BoxDims da{uniform(rng, 0.5, 5), uniform(rng, 0.4, 2.2), uniform(rng, 0.8, 2.5)};
  const double ya = uniform(rng, -std::numbers::pi, std::numbers::pi);
  Box3D a(ca, da, ya, Frame::Camera);

  const double kind = uniform(rng, 0, 1);
  if (kind < 0.05) return {a, a};
  const double spread = kind < 0.8 ? 1.5 : 5.0;
  const Vec3 cb{ca.x + uniform(rng, -spread, spread), ca.y + uniform(rng, -0.8, 0.8),
                ca.z + uniform(rng, -spread, spread)};
  const BoxDims db{da.length * uniform(rng, 0.6, 1.4), da.width * uniform(rng, 0.6, 1.4),
                   da.height * uniform(rng, 0.6, 1.4)};
  const double yb = kind < 0.5 ? ya + uniform(rng, -0.4, 0.4)
                               : uniform(rng, -std::numbers::pi, std::numbers::pi);
  return {a, Box3D(cb, db, yb, Frame::Camera)};
}

LabelRecord label_from_box(const Box3D& cam_box, ObjectClass cls, const BBox2D& bbox) {
  LabelRecord l;
  l.class_name = cls;
  l.bbox2d = bbox;
  l.length = cam_box.dims().length;
  l.width = cam_box.dims().width;
  l.height = cam_box.dims().height;
  l.x = cam_box.center().x;
  l.y = cam_box.center().y;
  l.z = cam_box.center().z;
  l.rotation_y = cam_box.yaw();
  l.alpha = wrap_angle(l.rotation_y - std::atan2(l.x, l.z));
  return l;
}

BBox2D project_box(const Box3D& cam_box, const Calibration& calib) {
  BBox2D out{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  const BoxDims& d = cam_box.dims();
  for (double a : {-d.length / 2, d.length / 2}) {
    for (double b : {-d.width / 2, d.width / 2}) {
      for (double h : {0.0, d.height}) {
        const Vec3 p = camera_box_point(cam_box, a, b, h);
        const double u = calib.fx() * p.x / p.z + calib.cx();
        const double v = calib.fy() * p.y / p.z + calib.cy();
        out.left = std::min(out.left, u);
        out.right = std::max(out.right, u);
        out.top = std::min(out.top, v);
        out.bottom = std::max(out.bottom, v);
      }
    }
  }
  return out;
}

FrameData random_eval_frame(Rng& rng, std::size_t max_boxes) {
  FrameData f;
  const int n_gt = uniform_int(rng, 0, static_cast<int>(max_boxes / 2));
  for (int i = 0; i < n_gt; ++i) {
    const double pick = uniform(rng, 0, 1);
    ObjectClass cls = pick < 0.55   ? ObjectClass::Car
                      : pick < 0.65 ? ObjectClass::Van
                      : pick < 0.8  ? ObjectClass::Pedestrian
                      : pick < 0.85 ? ObjectClass::PersonSitting
                      : pick < 0.93 ? ObjectClass::Cyclist
                                    : ObjectClass::DontCare;
    const double left = uniform(rng, 0, 1100), top = uniform(rng, 100, 250);
    const BBox2D bbox{left, top, left + uniform(rng, 10, 150), top + uniform(rng, 15, 120)};
    if (cls == ObjectClass::DontCare) {
      f.gt.push_back(dontcare_label(bbox));
      continue;
    }
    BoxDims d = class_dims(cls);
    d.length *= uniform(rng, 0.9, 1.1);
    d.width *= uniform(rng, 0.9, 1.1);
    d.height *= uniform(rng, 0.9, 1.1);
    const Box3D box({uniform(rng, -20, 20), uniform(rng, 1.4, 1.9), uniform(rng, 5, 60)}, d,
                    uniform(rng, -std::numbers::pi, std::numbers::pi), Frame::Camera);
    LabelRecord l = label_from_box(box, cls, bbox);
    l.occlusion = uniform_int(rng, 0, 3);
    l.truncation = std::round(uniform(rng, 0, 0.6) * 100) / 100;
    f.gt.push_back(l);
  }

  const std::size_t budget = max_boxes - f.gt.size();
  auto score = [&] { return std::round(uniform(rng, 0, 1) * 20) / 20; };  // ties on purpose
  for (const auto& g : f.gt) {
    if (f.det.size() >= budget) break;
    if (g.class_name == ObjectClass::DontCare) {
      if (uniform(rng, 0, 1) < 0.5) {
        // False positive sitting inside the ignored region.
        LabelRecord d = label_from_box(
            Box3D({uniform(rng, -20, 20), 1.6, uniform(rng, 5, 60)}, class_dims(ObjectClass::Car),
                  0.3, Frame::Camera),
            ObjectClass::Car, g.bbox2d);
        d.score = score();
        f.det.push_back(d);
      }
      continue;
    }
    if (uniform(rng, 0, 1) > 0.75) continue;
    LabelRecord d = g;
    if (g.class_name == ObjectClass::Van) d.class_name = ObjectClass::Car;
    if (g.class_name == ObjectClass::PersonSitting) d.class_name = ObjectClass::Pedestrian;
    d.x += uniform(rng, -0.6, 0.6);
    d.y += uniform(rng, -0.2, 0.2);
    d.z += uniform(rng, -0.6, 0.6);
    d.length *= uniform(rng, 0.85, 1.15);
    d.width *= uniform(rng, 0.85, 1.15);
    d.height *= uniform(rng, 0.85, 1.15);
    d.rotation_y = wrap_angle(d.rotation_y + uniform(rng, -0.3, 0.3));
    d.bbox2d.top += uniform(rng, -4, 4);
    d.bbox2d.bottom += uniform(rng, -4, 4);
    d.occlusion = 0;
    d.truncation = 0;
    d.score = score();
    f.det.push_back(d);
  }
  while (f.det.size() < budget && uniform(rng, 0, 1) < 0.6) {
    const ObjectClass cls = uniform(rng, 0, 1) < 0.7 ? ObjectClass::Car : ObjectClass::Pedestrian;
    const double left = uniform(rng, 0, 1100), top = uniform(rng, 100, 250);
    const BBox2D bbox{left, top, left + uniform(rng, 10, 150), top + uniform(rng, 15, 120)};
    const Box3D box({uniform(rng, -20, 20), uniform(rng, 1.4, 1.9), uniform(rng, 5, 60)},
                    class_dims(cls), uniform(rng, -std::numbers::pi, std::numbers::pi),
                    Frame::Camera);
    LabelRecord d = label_from_box(box, cls, bbox);
    d.score = score();
    f.det.push_back(d);
  }
  return f;
}

CarScene make_car_scene(Rng& rng, double yaw, std::size_t car_points) {
  CarScene scene{kitti_like_calibration(),
                 Box3D({uniform(rng, -4, 4), kCameraHeight, uniform(rng, 12, 25)},
                       class_dims(ObjectClass::Car), yaw, Frame::Camera),
                 {},
                 {Frame::Velodyne, {}}};
  scene.gt = label_from_box(scene.cam_box, ObjectClass::Car, project_box(scene.cam_box, scene.calib));

  const BoxDims& d = scene.cam_box.dims();
  std::vector<PointXYZI> cam;
  cam.reserve(car_points);
  for (std::size_t i = 0; i < car_points; ++i) {
    const Vec3 p = camera_box_point(scene.cam_box, uniform(rng, -d.length / 2, d.length / 2),
                                    uniform(rng, -d.width / 2, d.width / 2),
                                    uniform(rng, 0, d.height));
    cam.push_back({static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z), 0.f});
  }
  // Sparse ground grid (spacing above the clustering radius).
  for (double x = -15; x <= 15; x += 1.0) {
    for (double z = 3; z <= 45; z += 1.0) {
      cam.push_back({static_cast<float>(x), static_cast<float>(kCameraHeight),
                     static_cast<float>(z), 0.f});
    }
  }
  scene.cloud = cam_to_velo(PointCloud{Frame::Camera, std::move(cam)}, scene.calib);
  return scene;
}

ScalarRaster render_depth(const Calibration& calib, int width, int height,
                          const std::vector<Box3D>& cam_boxes, double max_range) {
  ScalarRaster depth = ScalarRaster::filled(width, height, RasterSemantics::DepthMeters, 0.f);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const double dx = (u - calib.cx()) / calib.fx();
      const double dy = (v - calib.cy()) / calib.fy();
      double best = std::numeric_limits<double>::infinity();
      if (dy > 0) best = kCameraHeight / dy;
      for (const Box3D& box : cam_boxes) {
        // Slab test in the box frame; ray origin is the camera, direction
        // (dx, dy, 1) so the ray parameter equals depth.
        const Vec3& c = box.center();
        const double cs = std::cos(box.yaw()), sn = std::sin(box.yaw());
        const double oa = cs * -c.x - sn * -c.z, ob = sn * -c.x + cs * -c.z;
        const double ra = cs * dx - sn, rb = sn * dx + cs;
        const double lo[3] = {-box.dims().length / 2, -box.dims().width / 2, c.y - box.dims().height};
        const double hi[3] = {box.dims().length / 2, box.dims().width / 2, c.y};
        const double o[3] = {oa, ob, 0.0};
        const double r[3] = {ra, rb, dy};
        double t0 = 0, t1 = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 3; ++k) {
          if (std::abs(r[k]) < 1e-12) {
            if (o[k] < lo[k] || o[k] > hi[k]) t0 = t1 + 1;
            continue;
          }
          double ta = (lo[k] - o[k]) / r[k], tb = (hi[k] - o[k]) / r[k];
          if (ta > tb) std::swap(ta, tb);
          t0 = std::max(t0, ta);
          t1 = std::min(t1, tb);
        }
        if (t0 <= t1 && t0 > 0) best = std::min(best, t0);
      }
      if (best <= max_range) depth.at(u, v) = static_cast<float>(best);
    }
  }
  return depth;
}

std::vector<std::string> write_toy_dataset(const fs::path& root, std::size_t frames,
                                           std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  const Calibration kitti = kitti_like_calibration();
  const double f = width * 0.8;
  const Mat34 p2 = {f, 0, width / 2.0, 0, 0, f, height / 2.0, 0, 0, 0, 1, 0};
  const Calibration calib = Calibration::from_matrices(p2, kitti.r0_rect(), kitti.tr_velo_to_cam());
  const std::string calib_text = serialize_calibration(calib);

  std::vector<std::string> ids;
  std::string split;
  for (std::size_t i = 0; i < frames; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%06zu", i);
    ids.emplace_back(id);
    split += std::string(id) + "\n";

    std::vector<Box3D> boxes;
    std::vector<LabelRecord> labels;
    const ObjectClass classes[] = {ObjectClass::Car, ObjectClass::Pedestrian, ObjectClass::Cyclist};
    const int count = uniform_int(rng, 1, 3);
    for (int k = 0; k < count; ++k) {
      const ObjectClass cls = i == 0 ? classes[k % 3] : ObjectClass::Car;
      const double z = uniform(rng, 7, 16);
      const double reach = std::max(0.0, z * (width / 2.0 - 8) / f - 3.0);
      const Box3D box({(k - 1) * reach * 0.7 + uniform(rng, -0.5, 0.5), kCameraHeight, z},
                      class_dims(cls), uniform(rng, -std::numbers::pi, std::numbers::pi),
                      Frame::Camera);
      BBox2D bb = project_box(box, calib);
      bb.left = std::clamp(bb.left, 0.0, width - 1.0);
      bb.right = std::clamp(bb.right, 0.0, width - 1.0);
      bb.top = std::clamp(bb.top, 0.0, height - 1.0);
      bb.bottom = std::clamp(bb.bottom, 0.0, height - 1.0);
      boxes.push_back(box);
      labels.push_back(label_from_box(box, cls, bb));
    }
    if (uniform(rng, 0, 1) < 0.5) labels.push_back(dontcare_label({0, 0, 12, 10}));

    const ScalarRaster depth = render_depth(calib, width, height, boxes);

    RgbImage image{width, height, std::vector<std::uint8_t>(3 * width * height)};
    for (int v = 0; v < height; ++v) {
      for (int u = 0; u < width; ++u) {
        std::uint8_t* px = &image.rgb[3 * (static_cast<std::size_t>(v) * width + u)];
        px[0] = static_cast<std::uint8_t>((u * 255) / width);
        px[1] = static_cast<std::uint8_t>((v * 255) / height);
        px[2] = static_cast<std::uint8_t>(uniform_int(rng, 0, 255));
      }
    }

    std::vector<InstanceMask> instances;
    for (const auto& l : labels) {
      if (l.class_name != ObjectClass::Car) continue;
      InstanceMask m{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height),
                     static_cast<float>(uniform(rng, 0.6, 0.99))};
      for (int v = static_cast<int>(l.bbox2d.top); v < static_cast<int>(l.bbox2d.bottom); ++v) {
        for (int u = static_cast<int>(l.bbox2d.left); u < static_cast<int>(l.bbox2d.right); ++u) {
          m.mask[static_cast<std::size_t>(v) * width + u] = 1;
        }
      }
      instances.push_back(std::move(m));
    }
    const ScalarRaster conf = build_confidence_map(width, height, instances);

    write_file(root / "calib" / (ids.back() + ".txt"), calib_text);
    write_file(root / "label_2" / (ids.back() + ".txt"), serialize_labels(labels));
    write_file(root / "depth" / (ids.back() + ".png"), write_depth_png(depth));
    write_file(root / "conf" / (ids.back() + ".png"), write_confidence_png(conf));
    write_file(root / "image_2" / (ids.back() + ".png"), write_rgb_png(image));
  }
  write_file(root / "val.txt", split);
  write_file(root / "train.txt", split);
  return ids;
}

}  // namespace plidar::oracles
