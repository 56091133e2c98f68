#pragma once

// End-to-end orchestration behind the uo_sam command line: configuration,
// dataset pairing, refinement runs, evaluation, statistics and fixture
// generation.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uosam/gro.hpp"
#include "uosam/lro.hpp"
#include "uosam/metrics.hpp"
#include "uosam/segmenter.hpp"
#include "uosam/synth.hpp"

namespace uosam::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitBadConfig = 2;

struct PipelineConfig {
  /// "mock", "stdio:<command>" or "tcp:<host>:<port>".
  std::string backend = "mock";
  bool bridge_inline = false;
  int mock_stride = 4;
  int mock_classes = 20;

  int grid_points_per_side = 32;
  std::optional<double> grid_offset;
  std::optional<double> grid_spacing;
  int crop_layers = 1;
  double crop_overlap = 0.0;
  double min_score = 0.8;
  double nms_iou = 0.7;

  double band_fraction = 0.02;
  double beta_sq = 0.3;
  int class_count = 0;

  int workers = 1;
  bool enable_lro = true;
  bool enable_gro = true;
  int connectivity = 8;
  int ignore_id = kDefaultIgnoreId;

  /// Throws Config for out-of-range values.
  void validate() const;

  /// Grid for an image: the configured spec, or g = max(W, H) / N and o = g / 2.
  GridSpec grid_for(Extent image) const;
  lro::LroOptions lro_options() const;
  gro::GroOptions gro_options() const;
  metrics::EvalOptions eval_options() const;
};

/// Dotted names accepted in config files and as --<name> flags.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual value; Config on unknown key or bad value.
void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value);

/// Nested objects and dotted keys are both accepted.
void apply_config_json(PipelineConfig& config, const nlohmann::json& json);
PipelineConfig load_config_file(const fs::path& path);
nlohmann::json config_to_json(const PipelineConfig& config);

/// UO_SAM_BRIDGE, when set, replaces the backend address.
void apply_environment(PipelineConfig& config);

/// Creates one backend per worker: a shared mock, or one bridge connection each.
class BackendPool {
 public:
  explicit BackendPool(const PipelineConfig& config);
  seg::SegmenterBackend& acquire(int worker);

 private:
  PipelineConfig config_;
  std::shared_ptr<seg::MockOracleBackend> mock_;
  std::vector<std::unique_ptr<seg::SegmenterBackend>> bridges_;
  std::mutex mutex_;
};

struct DatasetItem {
  std::string name;
  fs::path image;
  fs::path coarse;
  std::optional<fs::path> gt;
};

/// manifest.json ({"items": [{image, coarse, gt?}]} or a bare array) when
/// present, else X.png paired with X_coarse.png (and X_gt.png if present).
/// A missing coarse file surfaces when the item is processed. Sorted by name.
std::vector<DatasetItem> discover_dataset(const fs::path& input_dir);

struct ObjectLog {
  ClassId class_id = 0;
  double score = 0.0;
  bool degraded = false;
  bool degenerate_points = false;
  std::string fallback;
};

struct ImageLog {
  std::string name;
  bool ok = true;
  std::string error;
  std::vector<ObjectLog> objects;
  std::size_t gro_proposals = 0;
};

nlohmann::json to_json(const ImageLog& log);

/// split_by_class -> refine_object per class -> M_LRO -> image-wide
/// segmentation + category voting. Stages follow enable_lro / enable_gro.
LabelMap refine_label_map(seg::SegmenterBackend& backend, const Image& image, const LabelMap& coarse,
                          const PipelineConfig& config, ImageLog* log = nullptr);

/// Pastes refined per-class masks into a label map. Contested pixels go to
/// the higher score, then the lower class ID. Uncovered pixels become
/// background, except ignore pixels of the coarse map which stay ignore.
LabelMap assemble_lro_map(const LabelMap& coarse, const std::vector<lro::RefinementResult>& results);

struct RunSummary {
  std::size_t processed = 0;
  std::size_t failed = 0;
  std::vector<ImageLog> logs;

  int exit_code() const { return failed == 0 ? kExitOk : kExitPartial; }
};

/// Writes <output_dir>/<name>.png per item plus run_log.jsonl sorted by name.
RunSummary run_refine(const PipelineConfig& config, const fs::path& input_dir, const fs::path& output_dir);

struct EvalOutputs {
  std::optional<fs::path> report_json;
  std::optional<fs::path> per_image_jsonl;
};

/// Pairs <name>.png files of the two directories; UnpairedFiles when the
/// name sets differ. With a baseline directory the report carries deltas.
metrics::EvalReport run_eval(const fs::path& pred_dir, const fs::path& gt_dir, const PipelineConfig& config,
                             const std::optional<fs::path>& baseline_dir = std::nullopt,
                             const EvalOutputs& outputs = {});

nlohmann::json eval_report_json(const metrics::EvalReport& report, const PipelineConfig& config, std::size_t images,
                                int class_count);

/// Human-readable comparison lines such as "mIoU  29.2 -> 35.8 (+6.6)".
std::string format_comparison(const metrics::EvalReport& baseline, const metrics::EvalReport& refined);

/// Bucketed category counts of every *.png under gt_dir. Warns on `err`
/// when the directory holds no label maps.
metrics::CategoryHistogram run_stats(const fs::path& gt_dir, const PipelineConfig& config, std::ostream& err);

/// Table-1 style row block.
std::string format_histogram(const std::string& row_name, const metrics::CategoryHistogram& histogram);

struct SynthOptions {
  std::size_t count = 50;
  std::uint64_t seed = 1;
  int width = 128;
  int height = 128;
  int min_objects = 1;
  int max_objects = 3;
  std::vector<synth::ShapeKind> shapes{synth::ShapeKind::Disk, synth::ShapeKind::Rectangle, synth::ShapeKind::Blob};
  synth::Corruption corruption;
};

/// Scene i uses seed = i-th output of SplitMix64(options.seed), object
/// count drawn from a second stream seeded with options.seed ^ 1.
std::vector<synth::SceneSpec> synth_specs(const SynthOptions& options);

/// Writes images/, coarse/, gt/ PNG triplets and manifest.json.
void run_synth(const SynthOptions& options, const fs::path& output_dir);

}  // namespace uosam::cli
