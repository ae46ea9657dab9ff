#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "plidar/metrics.hpp"
#include "plidar/oracles/reference_ap.hpp"
#include "plidar/oracles/synthetic.hpp"

using namespace plidar;

namespace {

LabelRecord car(double x, double z, double bbox_h = 60, int occ = 0, double trunc = 0) {
  LabelRecord l;
  l.class_name = ObjectClass::Car;
  l.bbox2d = {100, 100, 200, 100 + bbox_h};
  l.height = 1.5, l.width = 1.6, l.length = 3.9;
  l.x = x, l.y = 1.6, l.z = z;
  l.occlusion = occ;
  l.truncation = trunc;
  return l;
}

LabelRecord det(LabelRecord l, double score) {
  l.score = score;
  return l;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("difficulty assignment is nested") {
    CHECK(assign_difficulty(car(0, 10, 45)).contains(Difficulty::Easy));
    CHECK(assign_difficulty(car(0, 10, 40)).contains(Difficulty::Easy));
    const auto mod = assign_difficulty(car(0, 10, 30, 1, 0.2));
    CHECK_FALSE(mod.contains(Difficulty::Easy));
    CHECK(mod.contains(Difficulty::Moderate));
    CHECK(mod.contains(Difficulty::Hard));
    const auto hard = assign_difficulty(car(0, 10, 30, 2, 0.5));
    CHECK_FALSE(hard.contains(Difficulty::Moderate));
    CHECK(hard.contains(Difficulty::Hard));
    CHECK(assign_difficulty(car(0, 10, 20)).empty());
    CHECK(assign_difficulty(car(0, 10, 60, 3)).empty());
  }

  TEST_CASE("AP40 of a hand-sized example") {
    // 4 GT, detections ranked TP, FP, TP: points (1/4, 1), (1/4, 1/2), (2/4, 2/3).
    FrameData f;
    f.gt = {car(0, 10), car(5, 20), car(-5, 30), car(10, 40)};
    f.det = {det(car(0, 10), 0.9), det(car(30, 10), 0.8), det(car(5, 20), 0.7)};
    const MatchQuery q{ObjectClass::Car, Difficulty::Moderate, 0.7, BoxMetric::Box3D};
    const std::vector<FrameData> frames = {f};
    const auto r = ap40(frames, q);
    REQUIRE(r.has_value());
    CHECK(r->num_gt == 4);
    CHECK(r->num_tp == 2);
    CHECK(r->num_fp == 1);
    // Recall levels 1..10 reach precision 1, 11..20 reach 2/3, the rest 0.
    const double expect = 100.0 * (10 * 1.0 + 10 * (2.0 / 3)) / 40;
    CHECK(r->ap == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r->precision[9] == 1.0);
    CHECK(r->precision[10] == doctest::Approx(2.0 / 3));
    CHECK(r->precision[20] == 0.0);
    CHECK(*oracles::reference_ap40(frames, q, {}) == doctest::Approx(r->ap).epsilon(1e-12));
  }

  TEST_CASE("undefined and empty cells") {
    const MatchQuery q{ObjectClass::Pedestrian, Difficulty::Easy, 0.5, BoxMetric::Bev};
    FrameData f;
    f.gt = {car(0, 10)};
    const std::vector<FrameData> frames = {f};
    CHECK_FALSE(ap40(frames, q).has_value());
    const MatchQuery qc{ObjectClass::Car, Difficulty::Easy, 0.5, BoxMetric::Bev};
    CHECK(ap40(frames, qc)->ap == 0.0);
  }

  TEST_CASE("ties are matched in file order") {
    FrameData f;
    f.gt = {car(0, 10)};
    LabelRecord offset = car(0.3, 10);
    f.det = {det(offset, 0.5), det(car(0, 10), 0.5)};
    const MatchQuery q{ObjectClass::Car, Difficulty::Moderate, 0.5, BoxMetric::Bev};
    const auto m = match_frame(f, q, {});
    REQUIRE(m.detections.size() == 2);
    CHECK(m.detections[0].true_positive);
    CHECK_FALSE(m.detections[1].true_positive);
  }

  TEST_CASE("official versus simple handling") {
    FrameData f;
    LabelRecord dc;
    dc.class_name = ObjectClass::DontCare;
    dc.bbox2d = {500, 100, 700, 200};
    LabelRecord van = car(-10, 25);
    van.class_name = ObjectClass::Van;
    f.gt = {car(0, 10), car(5, 20, 30, 2, 0.4), van, dc};
    LabelRecord in_dc = car(30, 30);
    in_dc.bbox2d = {520, 110, 600, 190};
    LabelRecord short_det = car(40, 30, 10);
    LabelRecord van_as_car = van;
    van_as_car.class_name = ObjectClass::Car;
    f.det = {det(car(0, 10), 0.9), det(car(5, 20, 30), 0.8), det(van_as_car, 0.7), det(in_dc, 0.95),
             det(short_det, 0.5)};
    const MatchQuery q{ObjectClass::Car, Difficulty::Easy, 0.7, BoxMetric::Box3D};

    EvalOptions official;
    const auto mo = match_frame(f, q, official);
    CHECK(mo.num_gt == 1);
    REQUIRE(mo.detections.size() == 1);  // the hard car, Van match, DontCare FP and short box are ignored
    CHECK(mo.detections[0].true_positive);

    EvalOptions simple;
    simple.mode = DontCareMode::Simple;
    const auto ms = match_frame(f, q, simple);
    CHECK(ms.num_gt == 1);
    CHECK(ms.detections.size() == 5);
    int fp = 0;
    for (const auto& d : ms.detections) fp += !d.true_positive;
    CHECK(fp == 4);

    const std::vector<FrameData> frames = {f};
    CHECK(ap40(frames, q, official)->ap == 100.0);
    CHECK(ap40(frames, q, simple)->ap < 100.0);
  }

  TEST_CASE("evaluate and formatting") {
    oracles::Rng rng(12);
    std::vector<FrameData> frames;
    for (int i = 0; i < 5; ++i) frames.push_back(oracles::random_eval_frame(rng, 20));
    const std::vector<ObjectClass> classes = {ObjectClass::Car, ObjectClass::Cyclist};
    const std::vector<double> ious = {0.5, 0.7};
    const EvalReport rep = evaluate(frames, classes, ious);
    CHECK(rep.entries.size() == 2 * 2 * 3 * 2);
    const auto* e = rep.find(ObjectClass::Car, Difficulty::Hard, 0.7, BoxMetric::Bev);
    REQUIRE(e != nullptr);
    const std::string table = format_eval_table(rep);
    CHECK(table.find("Car") != std::string::npos);
    CHECK(table.find("Cyclist") != std::string::npos);
    const std::string jsonl = format_eval_jsonl(rep);
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 24);
  }

  TEST_CASE("median depth window") {
    ScalarRaster d = ScalarRaster::filled(10, 10, RasterSemantics::DepthMeters, 0.f);
    for (int v = 0; v < 10; ++v) {
      for (int u = 0; u < 10; ++u) d.at(u, v) = static_cast<float>(10 + u);
    }
    // Columns floor(2.5)=2 .. ceil(4.2)-1=4 -> depths 12, 13, 14.
    CHECK(*median_depth_in_box(d, {2.5, 1, 4.2, 3}, 1, 60) == doctest::Approx(13));
    // Even count averages the middle pair.
    CHECK(*median_depth_in_box(d, {2, 1, 4, 2}, 1, 60) == doctest::Approx(12.5));
    CHECK_FALSE(median_depth_in_box(d, {2, 1, 4, 3}, 20, 60).has_value());
    // Boxes reaching outside the raster are clipped.
    CHECK(median_depth_in_box(d, {-5, -5, 1, 1}, 1, 60).has_value());
  }

  TEST_CASE("depth report merge and formats") {
    ScalarRaster d = ScalarRaster::filled(20, 20, RasterSemantics::DepthMeters, 10.f);
    LabelRecord l = car(0, 10);
    l.bbox2d = {1, 1, 5, 5};
    const std::vector<LabelRecord> gt = {l};
    DepthDiagReport a = depth_diagnostic(gt, d);
    const DepthDiagReport b = depth_diagnostic(gt, d);
    a.merge(b);
    CHECK(a.cells.at(ObjectClass::Car)[0].count == 2);
    CHECK(a.cells.at(ObjectClass::Car)[0].correct == 2);
    CHECK(format_depth_table(a).find("100.0") != std::string::npos);
    CHECK(format_depth_csv(a).find("Car") != std::string::npos);
    CHECK(!format_depth_jsonl(a).empty());
  }
}
