// uo_sam: refine coarse unsupervised segmentation label maps with a
// promptable segmenter, evaluate them, and generate synthetic fixtures.

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "acceptance.hpp"
#include "uosam/pipeline.hpp"

namespace {

using namespace uosam;
namespace fs = std::filesystem;

struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> backend;
  std::optional<int> workers;
  bool no_lro = false;
  bool no_gro = false;
  std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* app, ConfigFlags& flags) {
  app->add_option("--config", flags.config_path, "JSON config file");
  app->add_option("--backend", flags.backend, "mock, stdio:<command> or tcp:<host>:<port>");
  app->add_option("--workers", flags.workers, "Images processed in parallel");
  app->add_flag("--no-lro", flags.no_lro, "Skip the local region optimizer");
  app->add_flag("--no-gro", flags.no_gro, "Skip the global region optimizer");
  for (const auto& key : cli::config_keys()) {
    if (key == "backend" || key == "workers") continue;
    app->add_option_function<std::string>(
        "--" + key, [&flags, key](const std::string& v) { flags.overrides[key] = v; }, "Config field " + key);
  }
}

cli::PipelineConfig build_config(const ConfigFlags& flags) {
  cli::PipelineConfig config = flags.config_path.empty() ? cli::PipelineConfig{} : cli::load_config_file(flags.config_path);
  for (const auto& [k, v] : flags.overrides) cli::set_config_value(config, k, v);
  if (flags.backend) config.backend = *flags.backend;
  if (flags.workers) config.workers = *flags.workers;
  if (flags.no_lro) config.enable_lro = false;
  if (flags.no_gro) config.enable_gro = false;
  cli::apply_environment(config);
  config.validate();
  return config;
}

int run_refine(const ConfigFlags& flags, const fs::path& input, const fs::path& output) {
  const auto config = build_config(flags);
  const auto summary = cli::run_refine(config, input, output);
  for (const auto& log : summary.logs) {
    if (!log.ok) std::cerr << "failed: " << log.name << ": " << log.error << '\n';
  }
  std::cout << "processed " << summary.processed << " images, " << summary.failed << " failed\n";
  return summary.exit_code();
}

int run_eval(const ConfigFlags& flags, const fs::path& pred, const fs::path& gt,
             const std::optional<fs::path>& baseline, const std::optional<fs::path>& report,
             const std::optional<fs::path>& per_image) {
  const auto config = build_config(flags);
  cli::EvalOutputs outputs{report, per_image};
  const auto result = cli::run_eval(pred, gt, config, baseline, outputs);
  auto j = uosam::metrics::to_json(result);
  std::cout << j.dump(2) << '\n';
  if (result.deltas) {
    const auto& d = *result.deltas;
    std::cout << "delta vs " << d.baseline_name << ": mIoU " << metrics::format_delta(d.miou) << ", b-mIoU "
              << metrics::format_delta(d.b_miou) << ", pAcc " << metrics::format_delta(d.pixel_acc) << ", Img-Acc "
              << metrics::format_delta(d.img_acc) << ", F_beta " << metrics::format_delta(d.f_beta) << '\n';
  }
  return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Refine coarse unsupervised segmentation masks with a promptable segmenter"};
  app.require_subcommand(1);

  ConfigFlags refine_flags;
  fs::path refine_in;
  fs::path refine_out;
  auto* refine = app.add_subcommand("refine", "Refine every image of a dataset directory");
  refine->add_option("input_dir", refine_in, "Directory with images, coarse maps and optional manifest.json")
      ->required();
  refine->add_option("output_dir", refine_out, "Where refined label maps and run_log.jsonl go")->required();
  add_config_flags(refine, refine_flags);

  ConfigFlags eval_flags;
  fs::path eval_pred;
  fs::path eval_gt;
  std::optional<fs::path> eval_baseline;
  std::optional<fs::path> eval_report;
  std::optional<fs::path> eval_per_image;
  auto* eval = app.add_subcommand("eval", "Score predicted label maps against ground truth");
  eval->add_option("pred_dir", eval_pred)->required();
  eval->add_option("gt_dir", eval_gt)->required();
  eval->add_option("--baseline", eval_baseline, "Baseline predictions; adds deltas to the report");
  eval->add_option("--report", eval_report, "Write the JSON report here");
  eval->add_option("--per-image", eval_per_image, "Write per-image metrics as JSON lines here");
  add_config_flags(eval, eval_flags);

  ConfigFlags stats_flags;
  fs::path stats_dir;
  std::string stats_name = "dataset";
  auto* stats = app.add_subcommand("stats", "Histogram of categories per ground-truth image");
  stats->add_option("gt_dir", stats_dir)->required();
  stats->add_option("--name", stats_name, "Row label");
  add_config_flags(stats, stats_flags);

  cli::SynthOptions synth_options;
  fs::path synth_dir;
  std::vector<std::string> synth_shapes;
  auto* synth = app.add_subcommand("synth", "Generate synthetic image/coarse/gt fixtures");
  synth->add_option("output_dir", synth_dir)->required();
  synth->add_option("--count", synth_options.count);
  synth->add_option("--seed", synth_options.seed);
  synth->add_option("--width", synth_options.width);
  synth->add_option("--height", synth_options.height);
  synth->add_option("--min-objects", synth_options.min_objects);
  synth->add_option("--max-objects", synth_options.max_objects);
  synth->add_option("--dilate", synth_options.corruption.dilate_px);
  synth->add_option("--erode", synth_options.corruption.erode_px);
  synth->add_option("--noise", synth_options.corruption.boundary_noise_prob);
  synth->add_option("--drop", synth_options.corruption.drop_fragment_prob);
  synth->add_option("--shapes", synth_shapes, "Any of disk, rectangle, blob")->delimiter(',');

  fs::path selftest_dir;
  auto* selftest = app.add_subcommand("selftest", "Run the mock-oracle acceptance suite");
  selftest->add_option("--work-dir", selftest_dir, "Scratch directory (default: a temporary one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitBadConfig;
  }

  try {
    if (*refine) return run_refine(refine_flags, refine_in, refine_out);
    if (*eval) return run_eval(eval_flags, eval_pred, eval_gt, eval_baseline, eval_report, eval_per_image);
    if (*stats) {
      const auto config = build_config(stats_flags);
      std::cout << cli::format_histogram(stats_name, cli::run_stats(stats_dir, config, std::cerr));
      return cli::kExitOk;
    }
    if (*synth) {
      if (!synth_shapes.empty()) {
        synth_options.shapes.clear();
        for (const auto& s : synth_shapes) synth_options.shapes.push_back(synth::shape_from_string(s));
      }
      cli::run_synth(synth_options, synth_dir);
      std::cout << "wrote " << synth_options.count << " scenes to " << synth_dir.string() << '\n';
      return cli::kExitOk;
    }
    if (*selftest) {
      acceptance::Options options;
      options.work_dir = selftest_dir;
      return acceptance::exit_status(acceptance::run_all(options, std::cout));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::Config:
      case ErrorCode::InvalidArgument:
      case ErrorCode::UnpairedFiles:
      case ErrorCode::Io:
        return cli::kExitBadConfig;
      default:
        return cli::kExitPartial;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitPartial;
  }
  return cli::kExitOk;
}
