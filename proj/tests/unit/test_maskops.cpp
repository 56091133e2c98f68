#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "uosam/maskops.hpp"

using namespace uosam;
using maskops::Connectivity;

TEST_CASE("connected_components on visibly disjoint blobs") {
  BinaryMask m({4, 4});
  m.set(0, 0);
  m.set(1, 0);
  m.set(3, 3);
  const auto cc = maskops::connected_components(m, Connectivity::Four);
  REQUIRE(cc.size() == 2);
  CHECK(cc[0].pixel_count == 2);
  CHECK(cc[1].pixel_count == 1);
  CHECK(cc[1].first_x == 3);
  CHECK(cc[1].first_y == 3);
}

TEST_CASE("connected_components: diagonal neighbours join only under 8-connectivity") {
  BinaryMask m({2, 2});
  m.set(0, 0);
  m.set(1, 1);
  CHECK(maskops::connected_components(m, Connectivity::Four).size() == 2);
  CHECK(maskops::connected_components(m, Connectivity::Eight).size() == 1);
}

TEST_CASE("connected_components of an empty mask") {
  CHECK(maskops::connected_components(BinaryMask({5, 5})).empty());
}

TEST_CASE("connected_components matches flood fill on 200 random masks") {
  oracle::Rng rng(31);
  for (int n = 0; n < 200; ++n) {
    const auto m = oracle::random_mask(rng, {32, 32}, 0.3 + 0.3 * (n % 3) / 2.0);
    for (int conn : {4, 8}) {
      const auto got = maskops::connected_components(m, conn == 4 ? Connectivity::Four : Connectivity::Eight);
      const auto want = oracle::flood_fill_components(m, conn);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].pixel_count == want[i].size);
        CHECK(got[i].mask == want[i].mask);
        CHECK(got[i].bbox == want[i].bbox);
      }
    }
  }
}

TEST_CASE("largest_component_containing") {
  BinaryMask m({8, 8});
  for (int x = 0; x < 3; ++x) m.set(x, 0);                      // 3 px
  for (int y = 3; y < 8; ++y) m.set(6, y);                      // 5 px
  const auto c = maskops::largest_component_containing(m, {1, 0, Polarity::Positive});
  CHECK(c.pixel_count == 3);
  // Point on background falls back to the largest component.
  const auto d = maskops::largest_component_containing(m, {4, 4, Polarity::Positive});
  CHECK(d.pixel_count == 5);
  CHECK_THROWS_AS(maskops::largest_component_containing(BinaryMask({3, 3}), {0, 0, Polarity::Positive}), Error);
}

TEST_CASE("largest_component_containing agrees with flood fill from p") {
  oracle::Rng rng(32);
  for (int n = 0; n < 100; ++n) {
    const auto m = oracle::random_mask(rng, {20, 20}, 0.55);
    if (m.empty()) continue;
    const PointPrompt p{static_cast<int>(rng() % 20), static_cast<int>(rng() % 20), Polarity::Positive};
    if (!m.at(p.x, p.y)) continue;
    const auto got = maskops::largest_component_containing(m, p, Connectivity::Eight);
    for (const auto& comp : oracle::flood_fill_components(m, 8)) {
      if (comp.mask.at(p.x, p.y)) CHECK(got.mask == comp.mask);
    }
  }
}

TEST_CASE("mask_iou") {
  const Extent e{6, 6};
  const auto a = testing::rect_mask(e, 0, 0, 1, 1);
  CHECK(maskops::mask_iou(a, a) == 1.0);
  CHECK(maskops::mask_iou(a, testing::rect_mask(e, 3, 3, 4, 4)) == 0.0);
  CHECK(maskops::mask_iou(a, testing::rect_mask(e, 1, 0, 2, 1)) == doctest::Approx(2.0 / 6.0));
  CHECK(maskops::mask_iou(BinaryMask(e), BinaryMask(e)) == 1.0);
  CHECK_THROWS_AS(maskops::mask_iou(a, BinaryMask({5, 6})), Error);
}

TEST_CASE("nms_filter keeps the better of two identical masks") {
  const Extent e{8, 8};
  const auto m = testing::rect_mask(e, 1, 1, 4, 4);
  const auto kept = maskops::nms_filter({{m, 0.8}, {m, 0.9}}, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 0.9);
}

TEST_CASE("nms_filter keeps disjoint masks at any threshold") {
  const Extent e{8, 8};
  std::vector<MaskProposal> props{{testing::rect_mask(e, 0, 0, 1, 1), 0.5},
                                  {testing::rect_mask(e, 3, 3, 4, 4), 0.7},
                                  {testing::rect_mask(e, 6, 0, 7, 1), 0.6}};
  for (double t : {0.0, 0.3, 1.0}) CHECK(maskops::nms_filter(props, t).size() == 3);
}

TEST_CASE("nms_filter matches the O(n^2) greedy reference") {
  oracle::Rng rng(33);
  for (int n = 0; n < 100; ++n) {
    std::vector<MaskProposal> props;
    const int count = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < count; ++k) {
      props.push_back({oracle::random_shapes(rng, {24, 24}, 1), static_cast<double>(rng() % 5) / 4.0});
    }
    const double t = static_cast<double>(rng() % 11) / 10.0;
    const auto got = maskops::nms_filter(props, t);
    const auto want = oracle::greedy_nms(props, t);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].mask == want[i].mask);
      CHECK(got[i].score == want[i].score);
    }
  }
}

TEST_CASE("boundary_band examples") {
  const Extent e{9, 9};
  const auto line = testing::rect_mask(e, 1, 4, 7, 4);
  CHECK(maskops::boundary_band(line, 1) == line);

  const auto square = testing::rect_mask(e, 2, 2, 6, 6);
  const auto ring = maskops::boundary_band(square, 1);
  CHECK(ring.count() == 16);
  CHECK_FALSE(ring.at(4, 4));
  CHECK(ring.at(2, 4));

  CHECK(maskops::boundary_band(BinaryMask(e), 2).empty());
}

TEST_CASE("boundary_band equals a distance-to-boundary oracle") {
  oracle::Rng rng(34);
  for (int n = 0; n < 40; ++n) {
    const auto m = oracle::random_shapes(rng, {24, 24}, 2);
    const int band = 1 + static_cast<int>(rng() % 4);
    // Boundary pixels: set pixels with a 4-neighbour that is unset or outside.
    BinaryMask boundary({24, 24});
    for (int y = 0; y < 24; ++y) {
      for (int x = 0; x < 24; ++x) {
        if (!m.at(x, y)) continue;
        const bool edge = x == 0 || y == 0 || x == 23 || y == 23 || !m.at(x - 1, y) || !m.at(x + 1, y) ||
                          !m.at(x, y - 1) || !m.at(x, y + 1);
        if (edge) boundary.set(x, y);
      }
    }
    const auto dist = oracle::chebyshev_distance(boundary);
    const auto band_mask = maskops::boundary_band(m, band);
    for (std::size_t i = 0; i < dist.size(); ++i) CHECK(band_mask.test(i) == (m.test(i) && dist[i] < band));
  }
}

TEST_CASE("bounding_box and box_mask") {
  const Extent e{10, 6};
  CHECK_FALSE(maskops::bounding_box(BinaryMask(e)).has_value());
  const auto m = testing::rect_mask(e, 2, 1, 5, 3);
  const auto box = maskops::bounding_box(m);
  REQUIRE(box);
  CHECK(*box == BoxPrompt{2, 1, 5, 3});
  CHECK(maskops::box_mask(e, *box) == m);
}
