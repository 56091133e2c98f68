#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "uosam/kernels.hpp"
#include "uosam/lro.hpp"
#include "uosam/synth.hpp"

using namespace uosam;

namespace {

/// Replays fixed proposal lists and records the prompts it saw.
class ScriptedBackend final : public seg::SegmenterBackend {
 public:
  std::vector<std::vector<MaskProposal>> replies;
  std::vector<PromptSet> seen;

  std::string name() const override { return "scripted"; }
  int max_concurrent_requests() const override { return 1; }
  FeatureMap embed(const Image&) override { fail(ErrorCode::BackendFailure, "not used"); }
  std::vector<MaskProposal> decode(const seg::DecodeRequest& request) override {
    seen.push_back(request.prompts);
    return replies.at(seen.size() - 1);
  }
};

FeatureMap zero_features(int rows, int cols, int channels, double stride, Extent image) {
  return FeatureMap(rows, cols, channels, std::vector<float>(static_cast<std::size_t>(rows) * cols * channels, 0.0f),
                    stride, image);
}

}  // namespace

TEST_CASE("confidence map: identical vector scores 1, orthogonal 0") {
  std::vector<float> data(3 * 4 * 3, 0.0f);
  auto at = [&](int r, int c) { return data.begin() + (r * 4 + c) * 3; };
  at(1, 2)[0] = 2.0f;  // target direction
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r != 1 || c != 2) at(r, c)[1 + (r + c) % 2] = 1.0f;
    }
  }
  const FeatureMap f(3, 4, 3, data, 1.0, {4, 3});
  const ForegroundFeatureSet fg(3, {1.0f, 0.0f, 0.0f});
  const auto s = lro::build_confidence_map(f, fg);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) CHECK(s.at(r, c) == (r == 1 && c == 2 ? 1.0 : 0.0));
  }
}

TEST_CASE("confidence map matches the brute-force oracle on 4x4x8 features") {
  oracle::Rng rng(51);
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (int n = 0; n < 50; ++n) {
    std::vector<float> data(4 * 4 * 8);
    for (auto& v : data) v = g(rng);
    const FeatureMap f(4, 4, 8, data, 4.0, {16, 16});
    std::vector<std::uint8_t> bits(16, 0);
    for (int k = 0; k < 5; ++k) bits[(n + 3 * k) % 16] = 1;
    const DownsampledMask fg(4, 4, bits);
    const auto got = lro::build_confidence_map(f, lro::crop_foreground(f, fg));
    const auto want = oracle::brute_confidence(f, fg);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(got.values()[i] == doctest::Approx(want[i]).epsilon(1e-9));
  }
}

TEST_CASE("select_points: argmax and argmin in (x, y)") {
  std::vector<double> v(4 * 5, 0.5);
  v[2 * 5 + 3] = 0.9;
  v[0] = 0.1;
  const ConfidenceMap conf(4, 5, v);
  const auto [pos, neg] = lro::select_points(conf, 1.0, {5, 4});
  CHECK(pos == PointPrompt{3, 2, Polarity::Positive});
  CHECK(neg == PointPrompt{0, 0, Polarity::Negative});
}

TEST_CASE("select_points: constant map picks cell (0,0) for both") {
  const ConfidenceMap conf(3, 3, std::vector<double>(9, 0.25));
  const auto [pos, neg] = lro::select_points(conf, 8.0, {24, 24});
  CHECK(pos.x == 4);
  CHECK(pos.y == 4);
  CHECK(neg.x == pos.x);
  CHECK(neg.y == pos.y);
}

TEST_CASE("select_points agrees with a linear scan on random maps") {
  oracle::Rng rng(52);
  std::uniform_int_distribution<int> level(0, 6);
  for (int n = 0; n < 500; ++n) {
    const int rows = 1 + static_cast<int>(rng() % 8);
    const int cols = 1 + static_cast<int>(rng() % 8);
    std::vector<double> v(static_cast<std::size_t>(rows) * cols);
    for (auto& x : v) x = level(rng) / 6.0;
    int best = 0;
    int worst = 0;
    for (int i = 0; i < rows * cols; ++i) {
      if (v[i] > v[best]) best = i;
      if (v[i] < v[worst]) worst = i;
    }
    const auto [pos, neg] = lro::select_points(ConfidenceMap(rows, cols, v), 1.0, {cols, rows});
    CHECK(pos.x == best % cols);
    CHECK(pos.y == best / cols);
    CHECK(neg.x == worst % cols);
    CHECK(neg.y == worst / cols);
  }
}

TEST_CASE("select_box") {
  const Extent e{12, 12};
  BinaryMask m = testing::rect_mask(e, 1, 1, 3, 3);
  CHECK(lro::select_box(m, {2, 2, Polarity::Positive}) == BoxPrompt{1, 1, 3, 3});
  BinaryMask two = testing::rect_mask(e, 0, 0, 2, 2);
  for (int x = 8; x < 10; ++x) {
    for (int y = 8; y < 10; ++y) two.set(x, y);
  }
  CHECK(lro::select_box(two, {5, 5, Polarity::Positive}) == BoxPrompt{0, 0, 2, 2});
}

TEST_CASE("select_box equals the flood-fill bbox of the component under p") {
  oracle::Rng rng(53);
  for (int n = 0; n < 100; ++n) {
    const auto m = oracle::random_shapes(rng, {24, 24}, 3);
    const auto comps = oracle::flood_fill_components(m, 8);
    if (comps.empty()) continue;
    const auto& c = comps[rng() % comps.size()];
    const PointPrompt p{c.first_x, c.first_y, Polarity::Positive};
    CHECK(lro::select_box(m, p) == c.bbox);
  }
}

TEST_CASE("mask_to_feature_grid falls back to the containing cell for tiny masks") {
  const Extent e{16, 16};
  const auto f = zero_features(4, 4, 2, 4.0, e);
  BinaryMask m(e);
  m.set(0, 0);  // NN sampling reads pixel (2, 2) for cell (0, 0)
  const auto grid = lro::mask_to_feature_grid(m, f);
  CHECK(grid.count() == 1);
  CHECK(grid.at(0, 0));
}

TEST_CASE("cascaded_refine picks the highest-scoring step-1 proposal and sends it on") {
  const Extent e{10, 10};
  ScriptedBackend backend;
  const auto a = testing::rect_mask(e, 0, 0, 2, 2);
  const auto b = testing::rect_mask(e, 3, 3, 6, 6);
  const auto c = testing::rect_mask(e, 1, 1, 8, 8);
  backend.replies = {{{a, 0.2}, {b, 0.9}, {c, 0.5}}, {{c, 0.7}, {b, 0.95}, {BinaryMask(e), 0.99}}};
  lro::ObjectPrompts prompts{{4, 4, Polarity::Positive}, {0, 9, Polarity::Negative}, {3, 3, 6, 6},
                             ConfidenceMap(1, 1, {1.0}), false};
  const auto f = zero_features(1, 1, 1, 10.0, e);
  const auto r = lro::cascaded_refine(backend, f, prompts, c);
  REQUIRE(backend.seen.size() == 2);
  CHECK(r.first_step.mask == b);
  CHECK(backend.seen[1].mask_prompt == b);
  CHECK(backend.seen[1].box == BoxPrompt{3, 3, 6, 6});
  CHECK(backend.seen[1].points.size() == 2);
  // The empty 0.99 proposal is skipped.
  CHECK(r.final.mask == b);
  CHECK(r.final.score == 0.95);
  CHECK_FALSE(r.degraded);
}

TEST_CASE("cascaded_refine falls back to the coarse mask when step 1 is empty") {
  const Extent e{6, 6};
  ScriptedBackend backend;
  backend.replies = {{{BinaryMask(e), 0.8}}};
  const auto coarse = testing::rect_mask(e, 1, 1, 3, 3);
  lro::ObjectPrompts prompts{{2, 2, Polarity::Positive}, {5, 5, Polarity::Negative}, {1, 1, 3, 3},
                             ConfidenceMap(1, 1, {1.0}), false};
  const auto r = lro::cascaded_refine(backend, zero_features(1, 1, 1, 6.0, e), prompts, coarse);
  CHECK(r.degraded);
  CHECK(r.final.mask == coarse);
  CHECK(backend.seen.size() == 1);
}

TEST_CASE("cascaded_refine raises EmptyProposal when every step-2 mask is empty") {
  const Extent e{6, 6};
  ScriptedBackend backend;
  backend.replies = {{{testing::rect_mask(e, 1, 1, 2, 2), 0.8}}, {{BinaryMask(e), 0.8}}};
  lro::ObjectPrompts prompts{{1, 1, Polarity::Positive}, {5, 5, Polarity::Negative}, {1, 1, 2, 2},
                             ConfidenceMap(1, 1, {1.0}), false};
  try {
    lro::cascaded_refine(backend, zero_features(1, 1, 1, 6.0, e), prompts, testing::rect_mask(e, 1, 1, 2, 2));
    FAIL("expected EmptyProposal");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::EmptyProposal);
  }
}

TEST_CASE("refine_object recovers the object from a dilated coarse mask with two decodes") {
  synth::SceneSpec spec;
  spec.seed = 77;
  spec.object_count = 2;
  const auto s = synth::generate_scene(spec);
  seg::MockOracleBackend mock;
  testing::CountingBackend counting(mock);
  const auto& [id, gt] = s.oracle.objects()[0];
  const auto r = lro::refine_object(counting, s.image, kernels::dilate(gt, 3), id);
  CHECK(r.final.mask == gt);
  CHECK(r.final.score == 1.0);
  CHECK(r.class_id == id);
  CHECK(counting.embeds == 1);
  CHECK(counting.decodes == 2);
}

TEST_CASE("refine_object recovers the object from an eroded coarse mask") {
  synth::SceneSpec spec;
  spec.seed = 78;
  spec.object_count = 3;
  const auto s = synth::generate_scene(spec);
  seg::MockOracleBackend mock;
  for (const auto& [id, gt] : s.oracle.objects()) {
    CHECK(lro::refine_object(mock, s.image, kernels::erode(gt, 2), id).final.mask == gt);
  }
}

TEST_CASE("refine_object with a 1-px coarse mask uses that pixel as the box") {
  synth::SceneSpec spec;
  spec.seed = 79;
  const auto s = synth::generate_scene(spec);
  const auto& gt = s.oracle.objects()[0].second;
  const auto p = synth::centroid_nearest_pixel(gt);
  BinaryMask coarse(gt.extent());
  coarse.set(p.x, p.y);
  seg::MockOracleBackend mock;
  const auto features = mock.embed(s.image);
  const auto prompts = lro::derive_prompts(features, coarse);
  CHECK(prompts.box == BoxPrompt{p.x, p.y, p.x, p.y});
  const auto r = lro::refine_object(mock, features, coarse, 1);
  CHECK_FALSE(r.final.mask.empty());
}

TEST_CASE("refine_object rejects an empty coarse mask") {
  seg::MockOracleBackend mock;
  const Extent e{8, 8};
  const seg::OracleScene scene(e, {{1, testing::rect_mask(e, 2, 2, 5, 5)}});
  try {
    lro::refine_object(mock, scene.image(), BinaryMask(e));
    FAIL("expected EmptyMask");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::EmptyMask);
  }
}
