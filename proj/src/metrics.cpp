#include "uosam/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "uosam/kernels.hpp"
#include "uosam/maskops.hpp"

namespace uosam::metrics {

namespace {

void check_pairs(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts) {
  require(preds.size() == gts.size(), ErrorCode::DimensionMismatch, "prediction and ground-truth counts differ");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require(preds[i].extent() == gts[i].extent(), ErrorCode::DimensionMismatch,
            "prediction and ground truth differ in size");
  }
}

std::array<std::size_t, 256> class_areas(const LabelMap& map) {
  std::array<std::size_t, 256> areas{};
  for (ClassId id : map.labels()) ++areas[id];
  return areas;
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(int class_count)
    : class_count_(class_count),
      counts_(static_cast<std::size_t>(std::max(class_count, 0)) * std::max(class_count, 0), 0),
      void_pred_(static_cast<std::size_t>(std::max(class_count, 0)), 0) {
  require(class_count >= 1 && class_count <= 255, ErrorCode::InvalidArgument, "class_count must lie in [1, 255]");
}

std::uint64_t ConfusionMatrix::row_total(int gt) const {
  std::uint64_t sum = void_pred_[gt];
  for (int p = 0; p < class_count_; ++p) sum += at(gt, p);
  return sum;
}

std::uint64_t ConfusionMatrix::col_total(int pred) const {
  std::uint64_t sum = 0;
  for (int g = 0; g < class_count_; ++g) sum += at(g, pred);
  return sum;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t sum = 0;
  for (int c = 0; c < class_count_; ++c) sum += at(c, c);
  return sum;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (auto v : counts_) sum += v;
  for (auto v : void_pred_) sum += v;
  return sum;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  require(other.class_count_ == class_count_, ErrorCode::DimensionMismatch, "confusion class counts differ");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  for (std::size_t i = 0; i < void_pred_.size(); ++i) void_pred_[i] += other.void_pred_[i];
  return *this;
}

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, int class_count) {
  require(pred.extent() == gt.extent(), ErrorCode::DimensionMismatch, "prediction and ground truth differ in size");
  ConfusionMatrix cm(class_count);
  gt.validate(class_count);
  for (ClassId id : pred.labels()) {
    if (id != gt.ignore_id() && id >= class_count) {
      fail(ErrorCode::LabelOutOfRange, "predicted label " + std::to_string(id) + " >= class count");
    }
  }
  kernels::confusion_parallel(pred.labels(), gt.labels(), gt.ignore_id(), class_count, cm.counts(), cm.void_counts());
  return cm;
}

ConfusionMatrix confusion(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts, int class_count) {
  check_pairs(preds, gts);
  ConfusionMatrix cm(class_count);
  for (std::size_t i = 0; i < preds.size(); ++i) cm += confusion(preds[i], gts[i], class_count);
  return cm;
}

MiouResult miou(const ConfusionMatrix& cm) {
  MiouResult result;
  double sum = 0.0;
  int scored = 0;
  for (int c = 0; c < cm.class_count(); ++c) {
    const std::uint64_t inter = cm.at(c, c);
    const std::uint64_t uni = cm.row_total(c) + cm.col_total(c) - inter;
    if (uni == 0) {
      result.per_class.emplace_back(std::nullopt);
      continue;
    }
    const double iou = static_cast<double>(inter) / static_cast<double>(uni);
    result.per_class.emplace_back(iou);
    sum += iou;
    ++scored;
  }
  if (scored == 0) fail(ErrorCode::NoScoredClasses, "no class has a non-empty union");
  result.miou = sum / scored;
  return result;
}

int band_pixels(Extent extent, double band_fraction) {
  require(band_fraction > 0.0, ErrorCode::InvalidArgument, "band_fraction must be > 0");
  const double diagonal = std::hypot(static_cast<double>(extent.width), static_cast<double>(extent.height));
  return std::max(1, static_cast<int>(std::lround(band_fraction * diagonal)));
}

double boundary_miou(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts, int class_count,
                     double band_fraction) {
  check_pairs(preds, gts);
  require(band_fraction > 0.0, ErrorCode::InvalidArgument, "band_fraction must be > 0");
  std::vector<std::uint64_t> inter(class_count, 0);
  std::vector<std::uint64_t> uni(class_count, 0);
  for (std::size_t n = 0; n < preds.size(); ++n) {
    const auto& pred = preds[n];
    const auto& gt = gts[n];
    gt.validate(class_count);
    const int band = band_pixels(gt.extent(), band_fraction);
    const auto pred_areas = class_areas(pred);
    const auto gt_areas = class_areas(gt);
    for (int c = 0; c < class_count; ++c) {
      if (c == gt.ignore_id() || (pred_areas[c] == 0 && gt_areas[c] == 0)) continue;
      BinaryMask p(gt.extent());
      BinaryMask g(gt.extent());
      for (std::size_t i = 0; i < gt.labels().size(); ++i) {
        if (gt[i] == gt.ignore_id()) continue;
        if (pred[i] == c) p.set(i);
        if (gt[i] == c) g.set(i);
      }
      const auto pb = maskops::boundary_band(p, band);
      const auto gb = maskops::boundary_band(g, band);
      for (std::size_t i = 0; i < gt.labels().size(); ++i) {
        if (!pb.test(i) && !gb.test(i)) continue;
        inter[c] += (p.test(i) && g.test(i)) ? 1 : 0;
        uni[c] += (p.test(i) || g.test(i)) ? 1 : 0;
      }
    }
  }
  double sum = 0.0;
  int scored = 0;
  for (int c = 0; c < class_count; ++c) {
    if (uni[c] == 0) continue;
    sum += static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
    ++scored;
  }
  if (scored == 0) fail(ErrorCode::NoScoredClasses, "no class has a non-empty boundary union");
  return sum / scored;
}

double pixel_accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) fail(ErrorCode::NoScoredPixels, "confusion matrix is empty");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

bool image_correct(const LabelMap& pred, const LabelMap& gt) {
  require(pred.extent() == gt.extent(), ErrorCode::DimensionMismatch, "prediction and ground truth differ in size");
  const auto pred_areas = class_areas(pred);
  const auto gt_areas = class_areas(gt);
  int top = -1;
  for (int c = 1; c < 256; ++c) {
    if (c == pred.ignore_id() || pred_areas[c] == 0) continue;
    if (top < 0 || pred_areas[c] > pred_areas[top]) top = c;
  }
  return top > 0 && top != gt.ignore_id() && gt_areas[top] > 0;
}

double image_accuracy(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts) {
  check_pairs(preds, gts);
  if (preds.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += image_correct(preds[i], gts[i]) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

ForegroundCounts foreground_counts(const LabelMap& pred, const LabelMap& gt) {
  require(pred.extent() == gt.extent(), ErrorCode::DimensionMismatch, "prediction and ground truth differ in size");
  ForegroundCounts counts;
  for (std::size_t i = 0; i < gt.labels().size(); ++i) {
    if (gt[i] == gt.ignore_id()) continue;
    const bool p = pred[i] != kBackgroundId && pred[i] != pred.ignore_id();
    const bool g = gt[i] != kBackgroundId;
    counts.tp += (p && g) ? 1 : 0;
    counts.fp += (p && !g) ? 1 : 0;
    counts.fn += (!p && g) ? 1 : 0;
  }
  return counts;
}

double f_beta(const ForegroundCounts& counts, double beta_sq) {
  require(beta_sq > 0.0, ErrorCode::InvalidArgument, "beta_sq must be > 0");
  const double precision = ratio(counts.tp, counts.tp + counts.fp);
  const double recall = ratio(counts.tp, counts.tp + counts.fn);
  const double denom = beta_sq * precision + recall;
  if (denom == 0.0) return 0.0;
  return (1.0 + beta_sq) * precision * recall / denom;
}

double f_measure(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts, double beta_sq) {
  check_pairs(preds, gts);
  require(beta_sq > 0.0, ErrorCode::InvalidArgument, "beta_sq must be > 0");
  if (preds.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) sum += f_beta(foreground_counts(preds[i], gts[i]), beta_sq);
  return sum / static_cast<double>(preds.size());
}

int category_count(const LabelMap& gt) {
  const auto areas = class_areas(gt);
  int n = 0;
  for (int c = 1; c < 256; ++c) {
    if (c != gt.ignore_id() && areas[c] > 0) ++n;
  }
  return n;
}

CategoryHistogram category_stats(const std::vector<LabelMap>& gts) {
  CategoryHistogram h;
  for (const auto& gt : gts) {
    const int n = category_count(gt);
    if (n == 0) {
      ++h.zero_count;
    } else {
      ++h.buckets[std::min(n, 6) - 1];
    }
  }
  return h;
}

EvalReport evaluate(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts, const EvalOptions& options) {
  check_pairs(preds, gts);
  int class_count = options.class_count;
  if (class_count <= 0) {
    int max_id = 0;
    for (const auto* maps : {&preds, &gts}) {
      for (const auto& m : *maps) {
        for (ClassId id : m.labels()) {
          if (id != m.ignore_id()) max_id = std::max<int>(max_id, id);
        }
      }
    }
    class_count = max_id + 1;
  }
  const auto cm = confusion(preds, gts, class_count);
  auto iou = miou(cm);
  EvalReport report;
  report.miou = iou.miou;
  report.per_class_iou = std::move(iou.per_class);
  report.pixel_acc = pixel_accuracy(cm);
  report.b_miou = boundary_miou(preds, gts, class_count, options.band_fraction);
  report.img_acc = image_accuracy(preds, gts);
  report.f_beta = f_measure(preds, gts, options.beta_sq);
  return report;
}

namespace {

double delta_percent(double baseline, double refined) { return std::round((refined - baseline) * 1000.0) / 10.0; }

}  // namespace

MetricDeltas report_delta(const EvalReport& baseline, const EvalReport& refined, std::string baseline_name) {
  return {std::move(baseline_name),
          delta_percent(baseline.miou, refined.miou),
          delta_percent(baseline.b_miou, refined.b_miou),
          delta_percent(baseline.pixel_acc, refined.pixel_acc),
          delta_percent(baseline.img_acc, refined.img_acc),
          delta_percent(baseline.f_beta, refined.f_beta)};
}

std::string format_delta(double delta_percent) {
  const long tenths = std::lround(delta_percent * 10.0);
  if (tenths == 0) return "0.0";
  const long mag = std::labs(tenths);
  return std::string(tenths > 0 ? "+" : "-") + std::to_string(mag / 10) + "." + std::to_string(mag % 10);
}

nlohmann::json to_json(const MetricDeltas& d) {
  return {{"baseline", d.baseline_name},
          {"miou", format_delta(d.miou)},
          {"b_miou", format_delta(d.b_miou)},
          {"pixel_acc", format_delta(d.pixel_acc)},
          {"img_acc", format_delta(d.img_acc)},
          {"f_beta", format_delta(d.f_beta)}};
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& v : report.per_class_iou) per_class.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
  nlohmann::json out = {{"miou", report.miou},       {"b_miou", report.b_miou}, {"pixel_acc", report.pixel_acc},
                        {"img_acc", report.img_acc}, {"f_beta", report.f_beta}, {"per_class_iou", per_class}};
  if (report.deltas) out["deltas"] = to_json(*report.deltas);
  return out;
}

nlohmann::json to_json(const CategoryHistogram& h) {
  return {{"1", h.buckets[0]}, {"2", h.buckets[1]}, {"3", h.buckets[2]},   {"4", h.buckets[3]},
          {"5", h.buckets[4]}, {">5", h.buckets[5]}, {"zero", h.zero_count}};
}

nlohmann::json assumptions_json(const EvalOptions& options) {
  return {{"miou_absent_classes", "excluded from the mean"},
          {"b_miou_band", "max(1, round(" + std::to_string(options.band_fraction) + " * diagonal)) px"},
          {"f_beta_beta_sq", options.beta_sq},
          {"img_acc_rule", "largest predicted foreground class is in the ground-truth class set"},
          {"empty_iou", "IoU of two empty masks is 1"}};
}

}  // namespace uosam::metrics
