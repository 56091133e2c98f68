#include "uosam/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace uosam::kernels {

namespace {

void check_fg(const FeatureMap& features, const ForegroundFeatureSet& fg) {
  require(fg.count() >= 1, ErrorCode::EmptyForeground, "foreground feature set is empty");
  require(fg.channels() == features.channels(), ErrorCode::DimensionMismatch,
          "foreground channel count != feature channel count");
}

// Mean of the unit-normalised foreground vectors; zero vectors add nothing
// but still count towards n.
std::vector<double> mean_unit_vector(const ForegroundFeatureSet& fg) {
  const int channels = fg.channels();
  std::vector<double> mean(channels, 0.0);
  for (std::size_t i = 0; i < fg.count(); ++i) {
    const auto v = fg.vector(i);
    double norm_sq = 0.0;
    for (float x : v) norm_sq += static_cast<double>(x) * x;
    if (norm_sq <= 0.0) continue;
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (int k = 0; k < channels; ++k) mean[k] += v[k] * inv;
  }
  const double n = static_cast<double>(fg.count());
  for (auto& m : mean) m /= n;
  return mean;
}

double cell_confidence(std::span<const float> f, const std::vector<double>& mean) {
  double dot = 0.0;
  double norm_sq = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    dot += f[k] * mean[k];
    norm_sq += static_cast<double>(f[k]) * f[k];
  }
  if (norm_sq <= 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(norm_sq), -1.0, 1.0);
}

// Sliding-window count along rows then columns; `keep` decides the output
// bit from the window's set count and its in-bounds size.
template <typename Keep>
BinaryMask box_filter(const BinaryMask& mask, int radius, bool parallel, Keep keep) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> rows(mask.bits().size());
#pragma omp parallel for if (parallel) schedule(static)
  for (int y = 0; y < h; ++y) {
    std::vector<int> prefix(w + 1, 0);
    for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + (mask.at(x, y) ? 1 : 0);
    for (int x = 0; x < w; ++x) {
      const int lo = std::max(0, x - radius);
      const int hi = std::min(w - 1, x + radius);
      rows[static_cast<std::size_t>(y) * w + x] = keep(prefix[hi + 1] - prefix[lo], hi - lo + 1) ? 1 : 0;
    }
  }
  std::vector<std::uint8_t> out(rows.size());
#pragma omp parallel for if (parallel) schedule(static)
  for (int x = 0; x < w; ++x) {
    std::vector<int> prefix(h + 1, 0);
    for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + rows[static_cast<std::size_t>(y) * w + x];
    for (int y = 0; y < h; ++y) {
      const int lo = std::max(0, y - radius);
      const int hi = std::min(h - 1, y + radius);
      out[static_cast<std::size_t>(y) * w + x] = keep(prefix[hi + 1] - prefix[lo], hi - lo + 1) ? 1 : 0;
    }
  }
  return BinaryMask(mask.extent(), std::move(out));
}

bool is_boundary(const BinaryMask& mask, int x, int y) {
  if (!mask.at(x, y)) return false;
  constexpr int dx[] = {1, -1, 0, 0};
  constexpr int dy[] = {0, 0, 1, -1};
  for (int k = 0; k < 4; ++k) {
    const int nx = x + dx[k];
    const int ny = y + dy[k];
    if (!mask.extent().contains(nx, ny) || !mask.at(nx, ny)) return true;
  }
  return false;
}

}  // namespace

std::vector<double> confidence_map_serial(const FeatureMap& features, const ForegroundFeatureSet& fg) {
  check_fg(features, fg);
  const auto mean = mean_unit_vector(fg);
  std::vector<double> out(static_cast<std::size_t>(features.rows()) * features.cols());
  for (int r = 0; r < features.rows(); ++r) {
    for (int c = 0; c < features.cols(); ++c) {
      out[static_cast<std::size_t>(r) * features.cols() + c] = cell_confidence(features.at(r, c), mean);
    }
  }
  return out;
}

std::vector<double> confidence_map_parallel(const FeatureMap& features, const ForegroundFeatureSet& fg) {
  check_fg(features, fg);
  const auto mean = mean_unit_vector(fg);
  const int rows = features.rows();
  const int cols = features.cols();
  std::vector<double> out(static_cast<std::size_t>(rows) * cols);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out[static_cast<std::size_t>(r) * cols + c] = cell_confidence(features.at(r, c), mean);
    }
  }
  return out;
}

void confusion_serial(std::span<const ClassId> pred, std::span<const ClassId> gt, ClassId ignore, int class_count,
                      std::span<std::uint64_t> counts, std::span<std::uint64_t> void_pred) {
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == ignore) continue;
    if (pred[i] == ignore) {
      ++void_pred[gt[i]];
    } else {
      ++counts[static_cast<std::size_t>(gt[i]) * class_count + pred[i]];
    }
  }
}

void confusion_parallel(std::span<const ClassId> pred, std::span<const ClassId> gt, ClassId ignore, int class_count,
                        std::span<std::uint64_t> counts, std::span<std::uint64_t> void_pred) {
  const auto n = static_cast<std::int64_t>(gt.size());
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(counts.size(), 0);
    std::vector<std::uint64_t> local_void(void_pred.size(), 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      if (gt[i] == ignore) continue;
      if (pred[i] == ignore) {
        ++local_void[gt[i]];
      } else {
        ++local[static_cast<std::size_t>(gt[i]) * class_count + pred[i]];
      }
    }
#pragma omp critical(uosam_confusion_merge)
    {
      for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += local[k];
      for (std::size_t k = 0; k < void_pred.size(); ++k) void_pred[k] += local_void[k];
    }
  }
}

BinaryMask boundary_band_serial(const BinaryMask& mask, int band_px) {
  require(band_px >= 1, ErrorCode::InvalidArgument, "band_px must be >= 1");
  const int reach = band_px - 1;
  BinaryMask out(mask.extent());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      bool near = false;
      for (int yy = std::max(0, y - reach); yy <= std::min(mask.height() - 1, y + reach) && !near; ++yy) {
        for (int xx = std::max(0, x - reach); xx <= std::min(mask.width() - 1, x + reach); ++xx) {
          if (is_boundary(mask, xx, yy)) {
            near = true;
            break;
          }
        }
      }
      if (near) out.set(x, y);
    }
  }
  return out;
}

BinaryMask boundary_band_parallel(const BinaryMask& mask, int band_px) {
  require(band_px >= 1, ErrorCode::InvalidArgument, "band_px must be >= 1");
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> edge(mask.bits().size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) edge[static_cast<std::size_t>(y) * w + x] = is_boundary(mask, x, y) ? 1 : 0;
  }
  BinaryMask near =
      box_filter(BinaryMask(mask.extent(), std::move(edge)), band_px - 1, true, [](int n, int) { return n > 0; });
  std::vector<std::uint8_t> out(mask.bits().size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y) * w + x;
      out[i] = (mask.test(i) && near.test(i)) ? 1 : 0;
    }
  }
  return BinaryMask(mask.extent(), std::move(out));
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  require(radius >= 0, ErrorCode::InvalidArgument, "radius must be >= 0");
  if (radius == 0) return mask;
  return box_filter(mask, radius, true, [](int n, int) { return n > 0; });
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  require(radius >= 0, ErrorCode::InvalidArgument, "radius must be >= 0");
  if (radius == 0) return mask;
  return box_filter(mask, radius, true, [](int n, int size) { return n == size; });
}

}  // namespace uosam::kernels
