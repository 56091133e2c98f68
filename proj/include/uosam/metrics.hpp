#pragma once

// Evaluation protocol: confusion-based mIoU and pixel accuracy, boundary
// mIoU, image-level accuracy, foreground F-measure, per-image category
// statistics and baseline deltas.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uosam/core.hpp"

namespace uosam::metrics {

/// Rows are ground truth, columns are predictions. Pixels predicted as the
/// ignore ID are kept per ground-truth row in void_pred so they still count
/// as misses.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int class_count);

  int class_count() const { return class_count_; }
  std::uint64_t at(int gt, int pred) const { return counts_[static_cast<std::size_t>(gt) * class_count_ + pred]; }
  std::uint64_t void_predictions(int gt) const { return void_pred_[gt]; }
  std::uint64_t row_total(int gt) const;
  std::uint64_t col_total(int pred) const;
  std::uint64_t trace() const;
  std::uint64_t total() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

  std::vector<std::uint64_t>& counts() { return counts_; }
  std::vector<std::uint64_t>& void_counts() { return void_pred_; }

 private:
  int class_count_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> void_pred_;
};

ConfusionMatrix confusion(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts, int class_count);
ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, int class_count);

struct MiouResult {
  double miou = 0.0;
  /// nullopt for classes absent from both prediction and ground truth.
  std::vector<std::optional<double>> per_class;
};

/// Throws NoScoredClasses when every class has an empty union.
MiouResult miou(const ConfusionMatrix& cm);

struct BoundaryOptions {
  double band_fraction = 0.02;
};

/// band_px = max(1, round(band_fraction * diagonal)) per image; IoU per class
/// restricted to the union of the two masks' boundary bands, accumulated
/// over images.
double boundary_miou(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts, int class_count,
                     double band_fraction = 0.02);

int band_pixels(Extent extent, double band_fraction);

/// Throws NoScoredPixels for an empty matrix.
double pixel_accuracy(const ConfusionMatrix& cm);

/// Largest-area predicted foreground class of an image must belong to the
/// ground-truth class set. Ties go to the smaller class ID.
bool image_correct(const LabelMap& pred, const LabelMap& gt);
double image_accuracy(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts);

struct ForegroundCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
};

ForegroundCounts foreground_counts(const LabelMap& pred, const LabelMap& gt);
double f_beta(const ForegroundCounts& counts, double beta_sq);
/// Mean per-image F-measure on class > 0 foreground.
double f_measure(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts, double beta_sq = 0.3);

struct CategoryHistogram {
  /// Images with 1, 2, 3, 4, 5 and more than 5 categories.
  std::array<std::size_t, 6> buckets{};
  std::size_t zero_count = 0;
};

CategoryHistogram category_stats(const std::vector<LabelMap>& gts);
int category_count(const LabelMap& gt);

struct EvalOptions {
  int class_count = 0;
  double band_fraction = 0.02;
  double beta_sq = 0.3;
};

struct MetricDeltas {
  std::string baseline_name;
  double miou = 0.0;
  double b_miou = 0.0;
  double pixel_acc = 0.0;
  double img_acc = 0.0;
  double f_beta = 0.0;
};

struct EvalReport {
  double miou = 0.0;
  double b_miou = 0.0;
  double pixel_acc = 0.0;
  double img_acc = 0.0;
  double f_beta = 0.0;
  std::vector<std::optional<double>> per_class_iou;
  std::optional<MetricDeltas> deltas;
};

EvalReport evaluate(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts, const EvalOptions& options);

/// refined - baseline per metric, in percent rounded to one decimal.
MetricDeltas report_delta(const EvalReport& baseline, const EvalReport& refined, std::string baseline_name = {});

/// "+6.6", "-0.4", "0.0".
std::string format_delta(double delta_percent);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const MetricDeltas& deltas);
nlohmann::json to_json(const CategoryHistogram& histogram);

/// Assumptions the metrics rely on, written into every report header.
nlohmann::json assumptions_json(const EvalOptions& options);

}  // namespace uosam::metrics
