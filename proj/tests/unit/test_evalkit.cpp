#include "nada/error.hpp"
#include "nada/evalkit.hpp"
#include "nada/random.hpp"
#include "oracles/brute_ap.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>

using namespace nada;
using namespace nada::evalkit;
using nada::dataio::DatasetManifest;

namespace {

DatasetManifest toy_manifest() {
  DatasetManifest m;
  m.name = "toy";
  m.classes = {"cat", "dog"};
  m.images = {
      {"i1", 100, 100, {"cat"}, {{"cat", {0, 0, 10, 10}}, {"cat", {50, 50, 70, 70}}}},
      {"i2", 100, 100, {"cat", "dog"}, {{"cat", {20, 20, 40, 40}}, {"dog", {0, 0, 30, 30}}}},
      {"i3", 100, 100, {}, {}},
  };
  return m;
}

}  // namespace

TEST_CASE("IoU") {
  const Box a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, {20, 20, 30, 30}) == 0.0);
  CHECK(iou(a, {10, 0, 20, 10}) == 0.0);
  CHECK(iou(a, {5, 5, 15, 15}) == doctest::Approx(25.0 / 175.0).epsilon(1e-15));
  CHECK_THROWS_AS(iou(a, {5, 5, 5, 9}), ValidationError);
}

TEST_CASE("greedy matching") {
  const std::vector<GroundTruth> gt{{"i", {0, 0, 10, 10}}};
  CHECK(match_detections({{"i", "c", {0, 0, 10, 10}, 1}}, gt) == std::vector<bool>{true});
  CHECK(match_detections({{"i", "c", {0, 0, 10, 10}, 1}, {"i", "c", {0, 0, 10, 9}, 0.5}}, gt) ==
        std::vector<bool>{true, false});
  // IoU 0.4
  CHECK(match_detections({{"i", "c", {0, 0, 10, 4}, 1}}, gt) == std::vector<bool>{false});
  // other image never matches
  CHECK(match_detections({{"j", "c", {0, 0, 10, 10}, 1}}, gt) == std::vector<bool>{false});
  // a claimed gt does not block the detection from a free one
  const std::vector<GroundTruth> two{{"i", {0, 0, 10, 10}}, {"i", {2, 0, 12, 10}}};
  CHECK(match_detections({{"i", "c", {0, 0, 10, 10}, 1}, {"i", "c", {1, 0, 11, 10}, 0.5}}, two) ==
        std::vector<bool>{true, true});
}

TEST_CASE("average precision") {
  CHECK(average_precision({true}, 1) == 1.0);
  CHECK(average_precision({true, false}, 2) == 0.5);
  CHECK(average_precision({false, true}, 1) == 0.5);
  CHECK(average_precision({}, 3) == 0.0);
  CHECK_FALSE(average_precision({}, 0).has_value());
  CHECK(average_precision({false}, 0) == 0.0);
  // adding a trailing FP never raises AP
  CHECK(average_precision({true, false, true, false}, 3) == *average_precision({true, false, true}, 3));
}

TEST_CASE("detection AP50") {
  const auto m = toy_manifest();
  std::vector<Detection> perfect;
  for (const auto& im : m.images) {
    for (const auto& g : im.gt_boxes) perfect.push_back({im.id, g.label, g.box, 1.0});
  }
  const auto r = detection_ap50(perfect, m);
  CHECK(r.macro_ap50 == 1.0);
  CHECK(r.ground_truth_boxes == 4);
  CHECK(r.detection.size() == 2);
  CHECK(r.detection[0].num_gt == 3);

  CHECK(detection_ap50({}, m).macro_ap50 == 0.0);
  CHECK_THROWS_AS(detection_ap50({{"i1", "bird", {0, 0, 1, 1}, 1}}, m), ValidationError);

  const std::vector<Detection> mixed{
      {"i1", "cat", {0, 0, 10, 10}, 0.9}, {"i2", "cat", {60, 60, 80, 80}, 0.8},
      {"i2", "cat", {20, 20, 40, 41}, 0.7}, {"i2", "dog", {0, 0, 30, 30}, 0.2},
      {"i3", "dog", {0, 0, 5, 5}, 0.6}};
  const auto got = detection_ap50(mixed, m);
  const auto want = oracle::brute_detection_ap(mixed, m);
  REQUIRE(want.macro);
  CHECK(std::abs(*got.macro_ap50 - *want.macro) < 1e-9);
  // cat: TP, FP, TP with 3 gts -> (1 + 2/3) / 3; dog: FP then TP -> 0.5
  CHECK(*got.detection[0].ap == doctest::Approx((1.0 + 2.0 / 3.0) / 3.0));
  CHECK(*got.detection[1].ap == doctest::Approx(0.5));
  CHECK(*got.macro_ap50 == doctest::Approx(((1.0 + 2.0 / 3.0) / 3.0 + 0.5) / 2));

  SUBCASE("rank-based: monotone confidence transforms do not change AP") {
    auto squashed = mixed;
    for (auto& d : squashed) d.confidence = std::pow(d.confidence, 3.0) * 0.5;
    CHECK(detection_ap50(squashed, m).macro_ap50 == got.macro_ap50);
  }
  SUBCASE("input order does not matter") {
    auto reversed = mixed;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(detection_ap50(reversed, m).macro_ap50 == got.macro_ap50);
  }
}

TEST_CASE("classes without ground truth are left out of the macro mean") {
  auto m = toy_manifest();
  m.classes.push_back("bird");
  const auto r = detection_ap50({{"i1", "bird", {0, 0, 5, 5}, 1.0}}, m);
  CHECK(r.detection[2].ap == 0.0);
  CHECK(r.macro_ap50 == 0.0);
  const auto none = detection_ap50({}, m);
  CHECK_FALSE(none.detection[2].ap.has_value());
}

TEST_CASE("classification metrics") {
  DatasetManifest m;
  m.name = "toy";
  m.classes = {"a", "b"};
  m.images = {{"1", 10, 10, {"a"}, {}}, {"2", 10, 10, {"a", "b"}, {}},
              {"3", 10, 10, {"b"}, {}}, {"4", 10, 10, {}, {}}};

  SUBCASE("perfect proposals") {
    std::vector<ProposalSet> ps;
    for (const auto& im : m.images) {
      ProposalSet p{im.id, {}};
      for (const auto& l : im.gt_labels) p.entries.push_back({l, 1.0});
      ps.push_back(p);
    }
    const auto r = classification_metrics(ps, m);
    for (const auto& c : r.classification) {
      CHECK(c.precision == 1.0);
      CHECK(c.recall == 1.0);
      CHECK(c.f1 == 1.0);
      CHECK(c.ap == 1.0);
    }
  }
  SUBCASE("everything everywhere") {
    std::vector<ProposalSet> ps;
    for (const auto& im : m.images) ps.push_back({im.id, {{"a", 1.0}, {"b", 1.0}}});
    const auto r = classification_metrics(ps, m);
    for (const auto& c : r.classification) {
      CHECK(c.recall == 1.0);
      CHECK(c.precision == 0.5);
    }
  }
  SUBCASE("hand-computed confusion matrix") {
    const std::vector<ProposalSet> ps{{"1", {{"a", 0.9}}},
                                      {"2", {{"b", 0.6}}},
                                      {"3", {{"a", 0.4}, {"b", 0.8}}},
                                      {"4", {}}};
    const auto r = classification_metrics(ps, m);
    const auto& a = r.classification[0];
    // a: TP {1}, FP {3}, FN {2}
    CHECK(a.tp == 1);
    CHECK(a.fp == 1);
    CHECK(a.fn == 1);
    CHECK(a.precision == 0.5);
    CHECK(a.recall == 0.5);
    CHECK(a.f1 == 0.5);
    // ranking 1 (0.9, +), 3 (0.4, -), 2 (0, +), 4 (0, -): AP = (1 + 2/3) / 2
    CHECK(*a.ap == doctest::Approx(5.0 / 6.0));
    const auto& b = r.classification[1];
    CHECK(b.tp == 2);
    CHECK(b.fp == 0);
    CHECK(b.precision == 1.0);
    CHECK(b.recall == 1.0);
    CHECK(*b.ap == 1.0);
    CHECK(*r.macro_f1 == doctest::Approx(0.75));
    CHECK(*r.macro_precision == (a.precision + b.precision) / 2);
    const auto brute = oracle::brute_classification_ap(ps, m);
    CHECK(std::abs(*brute.at("a") - *a.ap) < 1e-12);
  }
  SUBCASE("nothing proposed gives zero precision") {
    const auto r = classification_metrics({}, m);
    CHECK(r.classification[0].precision == 0.0);
    CHECK(r.classification[0].f1 == 0.0);
  }
  SUBCASE("unknown label") {
    CHECK_THROWS_AS(classification_metrics({{"1", {{"zebra", 1.0}}}}, m), ValidationError);
  }
}

TEST_CASE("random instances agree with the brute-force evaluator") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    DatasetManifest m;
    m.name = "r";
    m.classes = {"x", "y", "z"};
    std::vector<Detection> dets;
    for (int i = 0; i < 4; ++i) {
      dataio::ImageRecord im{"im" + std::to_string(i), 50, 50, {}, {}};
      for (const auto& c : m.classes) {
        if (rng.uniform() < 0.5) continue;
        im.gt_labels.push_back(c);
        const double x = rng.uniform(0, 30), y = rng.uniform(0, 30);
        im.gt_boxes.push_back({c, {x, y, x + rng.uniform(5, 20), y + rng.uniform(5, 20)}});
      }
      m.images.push_back(im);
    }
    for (int d = 0; d < 8; ++d) {
      const auto& im = m.images[static_cast<std::size_t>(rng.uniform_int(0, 3))];
      const double x = rng.uniform(0, 30), y = rng.uniform(0, 30);
      dets.push_back({im.id, m.classes[static_cast<std::size_t>(rng.uniform_int(0, 2))],
                      {x, y, x + rng.uniform(5, 20), y + rng.uniform(5, 20)},
                      std::round(rng.uniform() * 4) / 4});
    }
    const auto got = detection_ap50(dets, m);
    const auto want = oracle::brute_detection_ap(dets, m);
    CHECK(got.macro_ap50.has_value() == want.macro.has_value());
    if (got.macro_ap50 && want.macro) CHECK(std::abs(*got.macro_ap50 - *want.macro) < 1e-9);
  }
}

TEST_CASE("report rendering") {
  const auto m = toy_manifest();
  const auto r = detection_ap50({{"i1", "cat", {0, 0, 10, 10}, 1.0}}, m);
  const auto text = format_report(r);
  CHECK(text.find("all-point") != std::string::npos);
  CHECK(text.find("macro") != std::string::npos);
  CHECK(text.find("cat") != std::string::npos);
  const auto j = report_to_json(r);
  CHECK(j["detection"]["classes"].size() == 2);
  CHECK(j["counts"]["gt_boxes"] == 4);
  CHECK(j["detection"]["macro_ap50"].get<double>() == doctest::Approx(*r.macro_ap50));
}
