#include "nada/error.hpp"
#include "nada/random.hpp"
#include "nada/segbox.hpp"
#include "oracles/flood_fill.hpp"
#include "oracles/naive_otsu.hpp"

#include <doctest.h>

#include <cmath>

using namespace nada;
using namespace nada::segbox;

namespace {

GridB disc_mask(Index n, std::initializer_list<std::array<double, 3>> discs) {
  GridB m = GridB::Constant(n, n, false);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      for (const auto& d : discs) {
        const double dy = static_cast<double>(r) + 0.5 - d[0];
        const double dx = static_cast<double>(c) + 0.5 - d[1];
        if (dx * dx + dy * dy <= d[2] * d[2]) m(r, c) = true;
      }
    }
  }
  return m;
}

RegionLabeling watershed_of(const GridB& fg, const ExtractionConfig& cfg = {}) {
  const GridD map = fg.cast<double>();
  return watershed_regions(map, BinaryMask{fg, 0.5}, cfg);
}

GridD random_map(Rng& rng, Index rows, Index cols) {
  GridD m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
  return m;
}

}  // namespace

TEST_CASE("normalization") {
  GridD m(1, 3);
  m << 0.2, 0.4, 0.6;
  const auto n = normalize_map(m);
  CHECK(n(0, 0) == 0.0);
  CHECK(n(0, 1) == doctest::Approx(0.5));
  CHECK(n(0, 2) == 1.0);
  CHECK((normalize_map(GridD::Constant(3, 3, 0.3)) == 0.3).all());
  GridD full(1, 3);
  full << 0.0, 0.37, 1.0;
  CHECK((normalize_map(full) == full).all());
}

TEST_CASE("Otsu threshold") {
  SUBCASE("bimodal halves") {
    GridD m(10, 10);
    m.topRows(5).setConstant(0.1);
    m.bottomRows(5).setConstant(0.9);
    const double t = otsu_threshold(m);
    CHECK(t > 0.1);
    CHECK(t < 0.9);
    CHECK(t == oracle::naive_otsu(m));
    CHECK(binarize(m, t).count() == 50);
  }
  SUBCASE("constant map gives an empty foreground") {
    const GridD m = GridD::Constant(6, 6, 0.42);
    CHECK(otsu_threshold(m) == 0.42);
    CHECK(binarize(m, otsu_threshold(m)).count() == 0);
  }
  SUBCASE("agrees with the exhaustive maximizer on random maps") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
      GridD m = random_map(rng, 12 + trial % 9, 10 + trial % 13);
      if (trial % 2) m = (m * 0.3 + (m > 0.7).cast<double>() * 0.6).min(1.0);
      CHECK(otsu_threshold(m) == oracle::naive_otsu(m));
    }
  }
  SUBCASE("histogram bins") {
    CHECK(histogram_bin(0.0, 256) == 0);
    CHECK(histogram_bin(1.0, 256) == 255);
    CHECK(histogram_bin(0.5, 256) == 128);
    CHECK(histogram_bin(-0.1, 256) == 0);
  }
}

TEST_CASE("binarize is strict") {
  GridD m(2, 2);
  m << 0.2, 0.8, 0.5, 0.5;
  const auto b = binarize(m, 0.5);
  CHECK(b.count() == 1);
  CHECK(b.foreground(0, 1));
  GridD z(1, 3);
  z << 0.0, 0.3, 0.0;
  CHECK(binarize(z, 0.0).count() == 1);
  CHECK(binarize(GridD::Constant(3, 3, 1.0), 1.0).count() == 0);
}

TEST_CASE("distance transform matches brute force") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const GridB fg = random_map(rng, 9 + trial % 6, 7 + trial % 8) > 0.25;
    const GridD fast = distance_transform(fg);
    const GridD slow = oracle::brute_distance(fg);
    CHECK((fast - slow).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("connected components match a reference flood fill") {
  Rng rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const GridB fg = random_map(rng, 16, 16) > 0.55;
    const auto lib = connected_components(fg);
    const auto ref = oracle::flood_components(fg);
    CHECK(lib.count == ref.count);
    CHECK(oracle::same_partition(lib.ids, ref.ids));
  }
}

TEST_CASE("watershed") {
  SUBCASE("empty mask") {
    const auto w = watershed_of(GridB::Constant(8, 8, false));
    CHECK(w.count == 0);
    CHECK((w.ids == 0).all());
  }
  SUBCASE("solid square is one region") {
    GridB fg = GridB::Constant(32, 32, false);
    fg.block(5, 7, 12, 12).setConstant(true);
    const auto w = watershed_of(fg);
    CHECK(w.count == 1);
    CHECK(oracle::check_partition(fg, w.ids, w.count).empty());
  }
  SUBCASE("elongated rectangle with a flat ridge is one region") {
    GridB fg = GridB::Constant(32, 32, false);
    fg.block(8, 4, 10, 6).setConstant(true);
    CHECK(watershed_of(fg).count == 1);
    GridB bar = GridB::Constant(40, 40, false);
    bar.block(10, 2, 4, 36).setConstant(true);
    CHECK(watershed_of(bar).count == 1);
  }
  SUBCASE("two disjoint blobs") {
    const GridB fg = disc_mask(48, {{{12, 12, 6}}, {{34, 30, 8}}});
    const auto w = watershed_of(fg);
    CHECK(w.count == 2);
    CHECK(oracle::same_partition(w.ids, oracle::flood_components(fg).ids));
  }
  SUBCASE("dumbbell splits along the neck") {
    const GridB fg = disc_mask(64, {{{32, 24, 10}}, {{32, 40, 10}}});
    REQUIRE(oracle::flood_components(fg).count == 1);
    const auto w = watershed_of(fg);
    CHECK(w.count == 2);
    CHECK(oracle::check_partition(fg, w.ids, w.count).empty());
    // each disc centre lands in a different region
    CHECK(w.ids(31, 23) != w.ids(31, 39));
    // every pixel left of the neck belongs to the left disc's region
    for (Index r = 0; r < 64; ++r) {
      for (Index c = 0; c < 29; ++c) {
        if (fg(r, c)) CHECK(w.ids(r, c) == w.ids(31, 23));
      }
    }
  }
  SUBCASE("mismatched dims") {
    CHECK_THROWS_AS(watershed_regions(GridD::Zero(3, 3), BinaryMask{GridB::Constant(3, 4, true), 0}, {}),
                    ValidationError);
  }
  SUBCASE("random masks are partitioned") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
      const GridB fg = random_map(rng, 20, 24) > 0.4;
      const auto w = watershed_of(fg);
      CHECK(oracle::check_partition(fg, w.ids, w.count).empty());
    }
  }
}

TEST_CASE("regions to boxes") {
  RegionLabeling l{GridI::Zero(64, 64), 1};
  l.ids.block(2, 3, 3, 4).setConstant(1);  // rows 2..4, cols 3..6
  const auto boxes = regions_to_boxes(l, 640, 640, 0.001);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == Box{30, 20, 70, 50});
  const auto doubled = regions_to_boxes(l, 1280, 1280, 0.001);
  CHECK(doubled[0] == Box{60, 40, 140, 100});

  CHECK(regions_to_boxes(RegionLabeling{GridI::Zero(8, 8), 0}, 10, 10, 0.005).empty());

  RegionLabeling dot{GridI::Zero(64, 64), 1};
  dot.ids(10, 10) = 1;
  CHECK(regions_to_boxes(dot, 512, 512, 0.005).empty());

  SUBCASE("ordered by area and pinned to the image edge") {
    RegionLabeling two{GridI::Zero(10, 10), 2};
    two.ids.block(0, 0, 2, 2).setConstant(1);
    two.ids.block(5, 5, 5, 5).setConstant(2);
    const auto b = regions_to_boxes(two, 30, 30, 0.01);
    REQUIRE(b.size() == 2);
    CHECK(b[0] == Box{15, 15, 30, 30});
    CHECK(b[1] == Box{0, 0, 6, 6});
  }
}

TEST_CASE("extraction") {
  SUBCASE("all-zero map yields nothing") {
    CHECK(extract_boxes(GridD::Zero(16, 16), 100, 100, {}).empty());
  }
  SUBCASE("bump yields one tight box with saliency") {
    GridD m = GridD::Constant(32, 32, 0.01);
    m.block(8, 4, 10, 6).setConstant(0.8);
    const auto ex = extract(m, 320, 320, {});
    REQUIRE(ex.boxes.size() == 1);
    CHECK(ex.boxes[0].box == Box{40, 80, 100, 180});
    CHECK(ex.boxes[0].saliency == doctest::Approx(0.8));
    CHECK(ex.mask.count() == 60);
  }
  SUBCASE("fixed-threshold foreground shrinks as the threshold rises") {
    Rng rng(37);
    const GridD m = random_map(rng, 24, 24);
    ExtractionConfig cfg;
    cfg.mode = ThresholdMode::Fixed;
    Index previous = m.size() + 1;
    for (int i = 1; i <= 9; ++i) {
      cfg.fixed_threshold = i / 10.0;
      const Index count = extract(m, 24, 24, cfg).mask.count();
      CHECK(count <= previous);
      previous = count;
    }
  }
  SUBCASE("config validation") {
    ExtractionConfig cfg;
    cfg.mode = ThresholdMode::Fixed;
    cfg.fixed_threshold = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.fixed_threshold = 0.5;
    cfg.min_region_area = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
}
