#include "nada/attnagg.hpp"
#include "nada/error.hpp"
#include "nada/random.hpp"

#include <doctest.h>

using namespace nada;
using namespace nada::attnagg;
using nada::dataio::AttentionStack;

namespace {

GridF grid(std::initializer_list<std::initializer_list<float>> rows) {
  GridF g(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (float v : row) g(r, c++) = v;
    ++r;
  }
  return g;
}

}  // namespace

TEST_CASE("bilinear resampling") {
  SUBCASE("same size is an exact copy") {
    Rng rng(1);
    GridF m(5, 7);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(rng.uniform());
    CHECK((resize_bilinear(m, 5, 7) == m.cast<double>()).all());
  }
  SUBCASE("constants are preserved") {
    const GridF m = GridF::Constant(2, 2, 0.3f);
    const auto up = resize_bilinear(m, 4, 4);
    CHECK((up == static_cast<double>(0.3f)).all());
  }
  SUBCASE("column ramp stays monotone") {
    const auto up = resize_bilinear(grid({{0, 1}, {0, 1}}), 4, 4);
    for (Index r = 0; r < 4; ++r) {
      for (Index c = 1; c < 4; ++c) CHECK(up(r, c) >= up(r, c - 1));
    }
    CHECK(up(0, 0) == 0.0);
    CHECK(up(0, 3) == 1.0);
    CHECK(up(0, 1) == doctest::Approx(0.25));
  }
  SUBCASE("output stays within the input range") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
      GridF m(3 + trial % 5, 2 + trial % 7);
      for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(rng.uniform(0, 5));
      const auto up = resize_bilinear(m, 17, 23);
      CHECK(up.minCoeff() >= static_cast<double>(m.minCoeff()));
      CHECK(up.maxCoeff() <= static_cast<double>(m.maxCoeff()));
    }
  }
}

TEST_CASE("alignment") {
  auto s = AttentionStack::zeros("a", 1, 2, 1, {{4, 6}, {2, 3}});
  s.map(0, 1, 0).setConstant(0.5f);
  CHECK(alignment_target(s) == GridSize{4, 6});
  const auto aligned = align_maps(s);
  CHECK(aligned.size == GridSize{4, 6});
  CHECK((aligned.map(0, 1, 0) == 0.5).all());
  CHECK((aligned.map(0, 0, 0) == 0.0).all());
}

TEST_CASE("token averaging") {
  SUBCASE("single map is the identity") {
    auto s = AttentionStack::zeros("a", 1, 1, 1, {{2, 2}});
    s.map(0, 0, 0) = grid({{0.1f, 0.7f}, {0.3f, 0.9f}});
    CHECK((average_token_maps(s, 0).values == s.map(0, 0, 0).cast<double>()).all());
  }
  SUBCASE("two timesteps") {
    auto s = AttentionStack::zeros("a", 2, 1, 1, {{2, 2}});
    s.map(0, 0, 0) = grid({{0, 0.2f}, {0.4f, 0.6f}});
    s.map(1, 0, 0) = grid({{0.2f, 0.2f}, {0, 0.2f}});
    const auto a = average_token_maps(s, 0).values;
    CHECK(a(0, 0) == doctest::Approx(0.1));
    CHECK(a(0, 1) == doctest::Approx(0.2));
    CHECK(a(1, 0) == doctest::Approx(0.2));
    CHECK(a(1, 1) == doctest::Approx(0.4));
  }
  SUBCASE("zero stack") {
    const auto s = AttentionStack::zeros("a", 3, 2, 2, {{4, 4}, {2, 2}});
    CHECK((average_token_maps(s, 1).values == 0.0).all());
  }
  SUBCASE("token out of range") {
    const auto s = AttentionStack::zeros("a", 1, 1, 2, {{2, 2}});
    CHECK_THROWS_AS(average_token_maps(s, 2), ValidationError);
  }
  SUBCASE("aligned and streaming paths agree") {
    Rng rng(4);
    auto s = AttentionStack::zeros("a", 3, 3, 2, {{8, 8}, {4, 4}, {2, 2}});
    for (auto& m : s.maps) {
      for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(rng.uniform());
    }
    CHECK((average_token_maps(s, 1).values == average_token_maps(align_maps(s), 1).values).all());
  }
}

TEST_CASE("label maps") {
  auto s = AttentionStack::zeros("a", 1, 1, 3, {{1, 2}});
  s.map(0, 0, 0) = grid({{0.4f, 1.2f}});
  s.map(0, 0, 1) = grid({{0.8f, 1.6f}});
  s.map(0, 0, 2) = grid({{0.25f, 3.0f}});
  s.label_spans["pair"] = {0, 1};
  s.label_spans["one"] = {2};
  const auto pair = label_map(s, "pair");
  CHECK(pair.label == "pair");
  CHECK(pair.image_id == "a");
  CHECK(pair.values(0, 0) == doctest::Approx(0.6));
  CHECK(pair.values(0, 1) == 1.0);  // 1.4 before the clamp
  const auto one = label_map(s, "one");
  CHECK(one.values(0, 0) == static_cast<double>(0.25f));
  CHECK(one.values(0, 1) == 1.0);
  CHECK_THROWS_WITH_AS(label_map(s, "missing"), doctest::Contains("missing"), ValidationError);
}
