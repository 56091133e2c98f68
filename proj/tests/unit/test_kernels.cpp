#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "uosam/kernels.hpp"
#include "uosam/lro.hpp"

using namespace uosam;

TEST_CASE("confidence map: parallel equals serial") {
  oracle::Rng rng(21);
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (int n = 0; n < 30; ++n) {
    const int rows = 1 + static_cast<int>(rng() % 24);
    const int cols = 1 + static_cast<int>(rng() % 24);
    const int ch = 1 + static_cast<int>(rng() % 16);
    std::vector<float> data(static_cast<std::size_t>(rows) * cols * ch);
    for (auto& v : data) v = g(rng);
    const FeatureMap f(rows, cols, ch, data, 4.0, {cols * 4, rows * 4});
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(rows) * cols);
    for (auto& b : bits) b = rng() % 2;
    bits[0] = 1;
    const auto fg = lro::crop_foreground(f, DownsampledMask(rows, cols, bits));
    CHECK(kernels::confidence_map_serial(f, fg) == kernels::confidence_map_parallel(f, fg));
  }
}

TEST_CASE("confusion: parallel equals serial") {
  oracle::Rng rng(22);
  for (int n = 0; n < 30; ++n) {
    const Extent e{1 + static_cast<int>(rng() % 200), 1 + static_cast<int>(rng() % 200)};
    const auto pred = oracle::random_label_map(rng, e, 5, 0.05);
    const auto gt = oracle::random_label_map(rng, e, 5, 0.05);
    std::vector<std::uint64_t> a(25), b(25), va(5), vb(5);
    kernels::confusion_serial(pred.labels(), gt.labels(), 255, 5, a, va);
    kernels::confusion_parallel(pred.labels(), gt.labels(), 255, 5, b, vb);
    CHECK(a == b);
    CHECK(va == vb);
  }
}

TEST_CASE("boundary band: parallel equals serial") {
  oracle::Rng rng(23);
  for (int n = 0; n < 60; ++n) {
    const Extent e{1 + static_cast<int>(rng() % 40), 1 + static_cast<int>(rng() % 40)};
    const auto m = n % 2 ? oracle::random_mask(rng, e, 0.6) : oracle::random_shapes(rng, e, 2);
    const int band = 1 + static_cast<int>(rng() % 6);
    CHECK(kernels::boundary_band_serial(m, band) == kernels::boundary_band_parallel(m, band));
  }
}

TEST_CASE("dilate matches the Chebyshev distance oracle") {
  oracle::Rng rng(24);
  for (int n = 0; n < 40; ++n) {
    const Extent e{1 + static_cast<int>(rng() % 30), 1 + static_cast<int>(rng() % 30)};
    const auto m = oracle::random_mask(rng, e, 0.05);
    const int r = static_cast<int>(rng() % 5);
    const auto d = kernels::dilate(m, r);
    const auto dist = oracle::chebyshev_distance(m);
    for (std::size_t i = 0; i < dist.size(); ++i) CHECK(d.test(i) == (dist[i] <= r));
  }
}

TEST_CASE("erode keeps pixels whose in-image window is fully set") {
  oracle::Rng rng(25);
  for (int n = 0; n < 40; ++n) {
    const Extent e{1 + static_cast<int>(rng() % 30), 1 + static_cast<int>(rng() % 30)};
    const auto m = oracle::random_shapes(rng, e, 2);
    const int r = static_cast<int>(rng() % 4);
    const auto out = kernels::erode(m, r);
    for (int y = 0; y < e.height; ++y) {
      for (int x = 0; x < e.width; ++x) {
        bool all = true;
        for (int yy = y - r; yy <= y + r; ++yy) {
          for (int xx = x - r; xx <= x + r; ++xx) {
            if (e.contains(xx, yy) && !m.at(xx, yy)) all = false;
          }
        }
        CHECK(out.at(x, y) == all);
      }
    }
  }
}
