#include "plidar/kitti_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "plidar/simd/kernels.hpp"

namespace plidar {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::MalformedNumber: return "MalformedNumber";
    case ErrorCode::WrongArity: return "WrongArity";
    case ErrorCode::NotARotation: return "NotARotation";
    case ErrorCode::WrongFieldCount: return "WrongFieldCount";
    case ErrorCode::NotPng: return "NotPng";
    case ErrorCode::WrongBitDepth: return "WrongBitDepth";
    case ErrorCode::WrongChannelCount: return "WrongChannelCount";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::RasterSizeMismatch: return "RasterSizeMismatch";
    case ErrorCode::MissingFeatureRaster: return "MissingFeatureRaster";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NoSamplesForClass: return "NoSamplesForClass";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

std::string_view to_string(Frame frame) {
  return frame == Frame::Camera ? "camera" : "velodyne";
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

bool parse_double(std::string_view token, double& out) {
  // from_chars rejects a leading '+'.
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size() && std::isfinite(out);
}

bool parse_int(std::string_view token, int& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

// Shortest text that parses back to the same double.
void append_number(std::string& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

double det3(const Mat3& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

}  // namespace

void check_rotation(const Mat3& r, std::string_view what) {
  constexpr double kTol = 1e-4;
  if (std::abs(det3(r) - 1.0) >= kTol) {
    throw Error(ErrorCode::NotARotation, std::string(what) + ": determinant is not 1");
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0;
      for (int k = 0; k < 3; ++k) dot += r[i * 3 + k] * r[j * 3 + k];
      if (std::abs(dot - (i == j ? 1.0 : 0.0)) >= kTol) {
        throw Error(ErrorCode::NotARotation, std::string(what) + ": R R^T is not identity");
      }
    }
  }
}

Calibration Calibration::from_matrices(const Mat34& p2, const Mat3& r0_rect,
                                       const Mat34& tr_velo_to_cam) {
  if (!(p2[0] > 0) || !(p2[5] > 0)) {
    throw Error(ErrorCode::InvalidArgument, "P2 focal lengths must be positive");
  }
  check_rotation(r0_rect, "R0_rect");
  Mat3 rot{tr_velo_to_cam[0], tr_velo_to_cam[1], tr_velo_to_cam[2],
           tr_velo_to_cam[4], tr_velo_to_cam[5], tr_velo_to_cam[6],
           tr_velo_to_cam[8], tr_velo_to_cam[9], tr_velo_to_cam[10]};
  check_rotation(rot, "Tr_velo_to_cam");
  Calibration c;
  c.p2_ = p2;
  c.r0_rect_ = r0_rect;
  c.tr_velo_to_cam_ = tr_velo_to_cam;
  return c;
}

Calibration parse_calibration(std::string_view text) {
  // KITTI raw/tracking files spell two of the keys differently.
  static const std::map<std::string_view, std::string_view> kAliases = {
      {"R_rect", "R0_rect"}, {"Tr_velo_cam", "Tr_velo_to_cam"}};
  static const std::map<std::string_view, std::size_t> kArity = {
      {"P2", 12}, {"R0_rect", 9}, {"Tr_velo_to_cam", 12}};

  std::map<std::string_view, std::vector<double>> values;
  auto lines = split_lines(text);
  for (std::size_t line_no = 0; line_no < lines.size(); ++line_no) {
    std::string_view line = lines[line_no];
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    std::string_view key = line.substr(0, colon);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.remove_suffix(1);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.front()))) key.remove_prefix(1);
    if (auto alias = kAliases.find(key); alias != kAliases.end()) key = alias->second;
    auto arity = kArity.find(key);
    if (arity == kArity.end()) continue;

    auto tokens = split_ws(line.substr(colon + 1));
    std::vector<double> nums(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!parse_double(tokens[i], nums[i])) {
        throw Error(ErrorCode::MalformedNumber, "line " + std::to_string(line_no + 1));
      }
    }
    if (nums.size() != arity->second) {
      throw Error(ErrorCode::WrongArity, std::string(key) + ": expected " +
                                             std::to_string(arity->second) + ", got " +
                                             std::to_string(nums.size()));
    }
    values[key] = std::move(nums);
  }

  for (const auto& [key, _] : kArity) {
    if (!values.count(key)) throw Error(ErrorCode::MissingKey, std::string(key));
  }
  Mat34 p2{};
  Mat3 r0{};
  Mat34 tr{};
  std::copy(values["P2"].begin(), values["P2"].end(), p2.begin());
  std::copy(values["R0_rect"].begin(), values["R0_rect"].end(), r0.begin());
  std::copy(values["Tr_velo_to_cam"].begin(), values["Tr_velo_to_cam"].end(), tr.begin());
  return Calibration::from_matrices(p2, r0, tr);
}

std::string serialize_calibration(const Calibration& calib) {
  std::string out;
  auto emit = [&out](std::string_view key, std::span<const double> values) {
    out.append(key);
    out.push_back(':');
    for (double v : values) {
      out.push_back(' ');
      append_number(out, v);
    }
    out.push_back('\n');
  };
  emit("P2", calib.p2());
  emit("R0_rect", calib.r0_rect());
  emit("Tr_velo_to_cam", calib.tr_velo_to_cam());
  return out;
}

namespace {

constexpr std::array<std::pair<ObjectClass, std::string_view>, 9> kClassNames = {{
    {ObjectClass::Car, "Car"},
    {ObjectClass::Pedestrian, "Pedestrian"},
    {ObjectClass::Cyclist, "Cyclist"},
    {ObjectClass::Van, "Van"},
    {ObjectClass::Truck, "Truck"},
    {ObjectClass::PersonSitting, "Person_sitting"},
    {ObjectClass::Tram, "Tram"},
    {ObjectClass::Misc, "Misc"},
    {ObjectClass::DontCare, "DontCare"},
}};

}  // namespace

std::string_view to_string(ObjectClass cls) {
  for (const auto& [c, name] : kClassNames) {
    if (c == cls) return name;
  }
  return "Misc";
}

std::optional<ObjectClass> parse_object_class(std::string_view name) {
  for (const auto& [c, n] : kClassNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

std::vector<LabelRecord> parse_labels(std::string_view text, bool require_score) {
  const std::size_t expected = require_score ? 16 : 15;
  std::vector<LabelRecord> out;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto f = split_ws(lines[i]);
    if (f.empty()) continue;
    if (f.size() != expected) {
      throw Error(ErrorCode::WrongFieldCount, "line " + std::to_string(line_no) + ": expected " +
                                                  std::to_string(expected) + ", got " +
                                                  std::to_string(f.size()));
    }
    auto cls = parse_object_class(f[0]);
    if (!cls) {
      throw Error(ErrorCode::InvalidArgument,
                  "line " + std::to_string(line_no) + ": unknown class '" + std::string(f[0]) + "'");
    }
    LabelRecord r;
    r.class_name = *cls;
    auto num = [&](std::size_t field, double& dst) {
      if (!parse_double(f[field], dst)) {
        throw Error(ErrorCode::MalformedNumber,
                    "line " + std::to_string(line_no) + ", field " + std::to_string(field + 1));
      }
    };
    num(1, r.truncation);
    if (!parse_int(f[2], r.occlusion)) {
      throw Error(ErrorCode::MalformedNumber, "line " + std::to_string(line_no) + ", field 3");
    }
    num(3, r.alpha);
    num(4, r.bbox2d.left);
    num(5, r.bbox2d.top);
    num(6, r.bbox2d.right);
    num(7, r.bbox2d.bottom);
    num(8, r.height);
    num(9, r.width);
    num(10, r.length);
    num(11, r.x);
    num(12, r.y);
    num(13, r.z);
    num(14, r.rotation_y);
    if (require_score) {
      double s = 0;
      num(15, s);
      r.score = s;
    }

    if (r.class_name != ObjectClass::DontCare) {
      auto bad = [&](const char* what) {
        throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(line_no) + ": " + what);
      };
      if (!(r.bbox2d.right > r.bbox2d.left) || !(r.bbox2d.bottom > r.bbox2d.top)) bad("empty 2D box");
      if (r.height < 0 || r.width < 0 || r.length < 0) bad("negative dimension");
      if (std::abs(r.rotation_y) > std::numbers::pi + 1e-6) bad("rotation_y outside [-pi, pi]");
    }
    out.push_back(r);
  }
  return out;
}

std::string serialize_labels(std::span<const LabelRecord> labels) {
  std::string out;
  for (const auto& r : labels) {
    out.append(to_string(r.class_name));
    const double fields[] = {r.truncation, static_cast<double>(r.occlusion), r.alpha,
                             r.bbox2d.left, r.bbox2d.top, r.bbox2d.right, r.bbox2d.bottom,
                             r.height, r.width, r.length, r.x, r.y, r.z, r.rotation_y};
    for (double v : fields) {
      out.push_back(' ');
      append_number(out, v);
    }
    if (r.score) {
      out.push_back(' ');
      append_number(out, *r.score);
    }
    out.push_back('\n');
  }
  return out;
}

std::string_view to_string(RasterSemantics semantics) {
  switch (semantics) {
    case RasterSemantics::DepthMeters: return "depth_m";
    case RasterSemantics::Grayscale01: return "grayscale01";
    case RasterSemantics::Confidence01: return "confidence01";
  }
  return "unknown";
}

ScalarRaster ScalarRaster::make(int width, int height, RasterSemantics semantics,
                                std::vector<float> values) {
  if (width < 0 || height < 0 ||
      values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::LengthMismatch, "raster values do not match width x height");
  }
  ScalarRaster r;
  r.width = width;
  r.height = height;
  r.semantics = semantics;
  r.values = std::move(values);
  return r;
}

ScalarRaster ScalarRaster::filled(int width, int height, RasterSemantics semantics, float value) {
  return make(width, height, semantics,
              std::vector<float>(static_cast<std::size_t>(width) * height, value));
}

ScalarRaster rgb_to_grayscale(const RgbImage& image) {
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  if (image.rgb.size() != 3 * n) {
    throw Error(ErrorCode::WrongChannelCount, "expected 3 interleaved channels");
  }
  std::vector<float> gray(n);
  simd::active().rgb_to_gray(image.rgb, gray);
  return ScalarRaster::make(image.width, image.height, RasterSemantics::Grayscale01,
                            std::move(gray));
}

namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
}

}  // namespace

std::vector<std::uint8_t> write_pointcloud_bin(const PointCloud& cloud) {
  std::vector<std::uint8_t> bytes(cloud.size() * sizeof(PointXYZI));
  std::size_t offset = 0;
  for (const auto& p : cloud.points) {
    for (float f : {p.x, p.y, p.z, p.intensity}) {
      std::uint32_t word = to_le(std::bit_cast<std::uint32_t>(f));
      std::memcpy(bytes.data() + offset, &word, 4);
      offset += 4;
    }
  }
  return bytes;
}

PointCloud read_pointcloud_bin(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % sizeof(PointXYZI) != 0) {
    throw Error(ErrorCode::TruncatedFile,
                std::to_string(bytes.size()) + " bytes is not a multiple of 16");
  }
  PointCloud cloud;
  cloud.frame = Frame::Velodyne;
  cloud.points.resize(bytes.size() / sizeof(PointXYZI));
  std::size_t offset = 0;
  for (auto& p : cloud.points) {
    float* dst[4] = {&p.x, &p.y, &p.z, &p.intensity};
    for (float* d : dst) {
      std::uint32_t word;
      std::memcpy(&word, bytes.data() + offset, 4);
      *d = std::bit_cast<float>(to_le(word));
      offset += 4;
    }
  }
  return cloud;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_file_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span<const std::uint8_t>(
                       reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace plidar
