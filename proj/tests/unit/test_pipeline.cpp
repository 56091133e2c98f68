#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "uosam/pipeline.hpp"
#include "uosam/png_io.hpp"

using namespace uosam;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

cli::SynthOptions small_synth(std::size_t count) {
  cli::SynthOptions o;
  o.count = count;
  o.seed = 3;
  o.width = 96;
  o.height = 96;
  o.corruption.dilate_px = 2;
  return o;
}

std::vector<LabelMap> read_dir(const fs::path& dir, std::size_t count) {
  std::vector<LabelMap> out;
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04zu.png", i);
    out.push_back(png_io::read_label_map(dir / name));
  }
  return out;
}

}  // namespace

TEST_CASE("config accepts nested and dotted keys") {
  cli::PipelineConfig c;
  cli::apply_config_json(c, nlohmann::json::parse(R"({"gro": {"min_score": 0.5, "enabled": false},
                                                      "grid.points_per_side": 8, "workers": 3})"));
  CHECK(c.min_score == 0.5);
  CHECK_FALSE(c.enable_gro);
  CHECK(c.grid_points_per_side == 8);
  CHECK(c.workers == 3);
  CHECK(cli::config_to_json(c)["gro.min_score"] == 0.5);
}

TEST_CASE("config rejects unknown keys and bad values") {
  cli::PipelineConfig c;
  auto code_of = [&](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of([&] { cli::set_config_value(c, "gro.bogus", "1"); }) == ErrorCode::Config);
  CHECK(code_of([&] { cli::set_config_value(c, "workers", "many"); }) == ErrorCode::Config);
  c.nms_iou = 1.5;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::Config);
}

TEST_CASE("config file loading") {
  testing::TempDir dir("cfg");
  std::ofstream(dir.path() / "c.json") << R"({"mock": {"stride": 2}, "eval.beta_sq": 1.0})";
  const auto c = cli::load_config_file(dir.path() / "c.json");
  CHECK(c.mock_stride == 2);
  CHECK(c.beta_sq == 1.0);
  std::ofstream(dir.path() / "bad.json") << "{";
  CHECK_THROWS_AS(cli::load_config_file(dir.path() / "bad.json"), Error);
}

TEST_CASE("environment selects the bridge backend") {
  cli::PipelineConfig c;
  ::setenv("UO_SAM_BRIDGE", "tcp:127.0.0.1:9", 1);
  cli::apply_environment(c);
  ::unsetenv("UO_SAM_BRIDGE");
  CHECK(c.backend == "tcp:127.0.0.1:9");
}

TEST_CASE("grid defaults scale with the longer image side") {
  cli::PipelineConfig c;
  const auto g = c.grid_for({1024, 512});
  CHECK(g.points_per_side == 32);
  CHECK(g.spacing == 32.0);
  CHECK(g.offset == 16.0);
  c.grid_offset = 3.0;
  CHECK(c.grid_for({64, 64}).offset == 3.0);
}

TEST_CASE("discover_dataset pairs files by suffix") {
  testing::TempDir dir("disc");
  const LabelMap m(2, 2, {0, 1, 1, 0});
  const Image img(2, 2, std::vector<std::uint8_t>(12, 0));
  for (const char* n : {"b", "a"}) {
    png_io::write_image(dir.path() / (std::string(n) + ".png"), img);
    png_io::write_label_map(dir.path() / (std::string(n) + "_coarse.png"), m);
  }
  png_io::write_label_map(dir.path() / "a_gt.png", m);
  const auto items = cli::discover_dataset(dir.path());
  REQUIRE(items.size() == 2);
  CHECK(items[0].name == "a");
  CHECK(items[0].gt.has_value());
  CHECK_FALSE(items[1].gt.has_value());
  CHECK(items[1].coarse.filename() == "b_coarse.png");
}

TEST_CASE("identity pipeline reproduces the coarse maps byte for byte") {
  testing::TempDir dir("ident");
  cli::run_synth(small_synth(4), dir.path() / "data");
  cli::PipelineConfig c;
  c.enable_lro = false;
  c.enable_gro = false;
  const auto summary = cli::run_refine(c, dir.path() / "data", dir.path() / "out");
  CHECK(summary.failed == 0);
  CHECK(summary.exit_code() == cli::kExitOk);
  for (int i = 0; i < 4; ++i) {
    const std::string f = "scene_000" + std::to_string(i) + ".png";
    CHECK(slurp(dir.path() / "out" / f) == slurp(dir.path() / "data" / "coarse" / f));
  }
}

TEST_CASE("a missing coarse file fails that image only") {
  testing::TempDir dir("miss");
  cli::run_synth(small_synth(3), dir.path() / "data");
  fs::remove(dir.path() / "data" / "coarse" / "scene_0001.png");
  cli::PipelineConfig c;
  c.grid_points_per_side = 8;
  const auto summary = cli::run_refine(c, dir.path() / "data", dir.path() / "out");
  CHECK(summary.processed == 3);
  CHECK(summary.failed == 1);
  CHECK(summary.exit_code() == cli::kExitPartial);
  CHECK(fs::exists(dir.path() / "out" / "scene_0000.png"));
  CHECK_FALSE(fs::exists(dir.path() / "out" / "scene_0001.png"));
  CHECK(fs::exists(dir.path() / "out" / "scene_0002.png"));
  std::ifstream log(dir.path() / "out" / "run_log.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["ok"] == (j["image"] != "scene_0001"));
    ++lines;
  }
  CHECK(lines == 3);
}

TEST_CASE("refinement is deterministic across worker counts and adds no classes") {
  testing::TempDir dir("det");
  cli::run_synth(small_synth(6), dir.path() / "data");
  cli::PipelineConfig c;
  c.grid_points_per_side = 8;
  c.workers = 1;
  cli::run_refine(c, dir.path() / "data", dir.path() / "w1");
  c.workers = 4;
  cli::run_refine(c, dir.path() / "data", dir.path() / "w4");
  const auto coarse = read_dir(dir.path() / "data" / "coarse", 6);
  const auto w1 = read_dir(dir.path() / "w1", 6);
  const auto w4 = read_dir(dir.path() / "w4", 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(w1[i] == w4[i]);
    const std::set<ClassId> before(coarse[i].labels().begin(), coarse[i].labels().end());
    for (ClassId id : w1[i].labels()) CHECK((id == 0 || before.count(id) == 1));
  }
}

TEST_CASE("refined outputs match the ground truth under the mock oracle") {
  testing::TempDir dir("exact");
  cli::run_synth(small_synth(5), dir.path() / "data");
  cli::PipelineConfig c;
  c.grid_points_per_side = 8;
  cli::run_refine(c, dir.path() / "data", dir.path() / "out");
  const auto r = cli::run_eval(dir.path() / "out", dir.path() / "data" / "gt", c, dir.path() / "data" / "coarse");
  CHECK(r.miou == 1.0);
  REQUIRE(r.deltas);
  CHECK(r.deltas->miou > 0.0);
}

TEST_CASE("eval: prediction equal to ground truth") {
  testing::TempDir dir("evalid");
  cli::run_synth(small_synth(4), dir.path() / "data");
  const auto gt = dir.path() / "data" / "gt";
  cli::PipelineConfig c;
  const auto report_path = dir.path() / "report.json";
  const auto per_image = dir.path() / "per_image.jsonl";
  const auto r = cli::run_eval(gt, gt, c, gt, {report_path, per_image});
  CHECK(r.miou == 1.0);
  CHECK(r.b_miou == 1.0);
  CHECK(r.pixel_acc == 1.0);
  CHECK(r.img_acc == 1.0);
  CHECK(r.f_beta == 1.0);
  REQUIRE(r.deltas);
  CHECK(cli::format_comparison(r, r).find("(0.0)") != std::string::npos);

  std::ifstream in(report_path);
  const auto report = nlohmann::json::parse(in);
  CHECK(report["images"] == 4);
  CHECK(report.contains("assumptions"));
  CHECK(report["metrics"]["miou"] == 1.0);

  std::ifstream lines(per_image);
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(lines, line)) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 5);
  CHECK(rows.back()["aggregate"] == true);
  CHECK(rows.front()["image"] == "scene_0000");
}

TEST_CASE("eval agrees with the loop oracle on coarse maps") {
  testing::TempDir dir("evaloracle");
  cli::run_synth(small_synth(6), dir.path() / "data");
  cli::PipelineConfig c;
  const auto r = cli::run_eval(dir.path() / "data" / "coarse", dir.path() / "data" / "gt", c);
  const auto preds = read_dir(dir.path() / "data" / "coarse", 6);
  const auto gts = read_dir(dir.path() / "data" / "gt", 6);
  CHECK(r.miou == doctest::Approx(oracle::loop_miou(preds, gts)).epsilon(1e-12));
  CHECK(r.pixel_acc == doctest::Approx(oracle::loop_pixel_accuracy(preds, gts)).epsilon(1e-12));
}

TEST_CASE("eval rejects unpaired files") {
  testing::TempDir dir("unpaired");
  cli::run_synth(small_synth(3), dir.path() / "data");
  fs::remove(dir.path() / "data" / "coarse" / "scene_0002.png");
  try {
    cli::run_eval(dir.path() / "data" / "coarse", dir.path() / "data" / "gt", cli::PipelineConfig{});
    FAIL("expected UnpairedFiles");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnpairedFiles);
    CHECK(std::string(e.what()).find("scene_0002") != std::string::npos);
  }
}

TEST_CASE("stats over a synthetic set with three objects per image") {
  testing::TempDir dir("stats");
  auto o = small_synth(50);
  o.min_objects = 3;
  o.max_objects = 3;
  o.corruption = {};
  cli::run_synth(o, dir.path() / "data");
  std::ostringstream err;
  const auto h = cli::run_stats(dir.path() / "data" / "gt", cli::PipelineConfig{}, err);
  CHECK(h.buckets[2] == 50);
  CHECK(err.str().empty());
  const auto table = cli::format_histogram("synthetic", h);
  CHECK(table.find("Categories in each image") != std::string::npos);
  CHECK(table.find(">5") != std::string::npos);
}

TEST_CASE("stats warns on an empty directory") {
  testing::TempDir dir("empty");
  std::ostringstream err;
  const auto h = cli::run_stats(dir.path(), cli::PipelineConfig{}, err);
  CHECK(err.str().find("warning") != std::string::npos);
  CHECK(h.zero_count == 0);
}

TEST_CASE("comparison table shows signed deltas") {
  metrics::EvalReport base;
  base.miou = 0.700;
  metrics::EvalReport refined = base;
  refined.miou = 0.766;
  CHECK(cli::format_comparison(base, refined).find("(+6.6)") != std::string::npos);
}

TEST_CASE("synth manifest records the generator and items") {
  testing::TempDir dir("synth");
  cli::run_synth(small_synth(2), dir.path());
  std::ifstream in(dir.path() / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["generator"]["seed"] == 3);
  CHECK(j["items"].size() == 2);
  CHECK(j["items"][1]["name"] == "scene_0001");
  const auto specs = cli::synth_specs(small_synth(2));
  CHECK(j["items"][0]["seed"] == specs[0].seed);
}
