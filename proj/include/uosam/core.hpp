#pragma once

// Domain types shared by every stage of the refinement pipeline.
//
// Coordinates are (x = column, y = row) with the origin at the top-left
// corner; all rasters are stored row-major. Types validate their invariants
// on construction and are immutable afterwards unless noted.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uosam/error.hpp"

namespace uosam {

using ClassId = std::uint8_t;

inline constexpr ClassId kBackgroundId = 0;
inline constexpr ClassId kDefaultIgnoreId = 255;

struct Extent {
  int width = 0;
  int height = 0;

  std::size_t area() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// 8-bit RGB raster.
class Image {
 public:
  Image() = default;
  Image(int width, int height, std::vector<std::uint8_t> rgb);

  int width() const { return extent_.width; }
  int height() const { return extent_.height; }
  Extent extent() const { return extent_; }
  std::span<const std::uint8_t> data() const { return data_; }

  const std::uint8_t* pixel(int x, int y) const {
    return data_.data() + (static_cast<std::size_t>(y) * extent_.width + x) * 3;
  }

  /// Copy of the inclusive rectangle [x0, x1] x [y0, y1].
  Image crop(int x0, int y0, int x1, int y1) const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  Extent extent_;
  std::vector<std::uint8_t> data_;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(Extent extent);
  BinaryMask(Extent extent, std::vector<std::uint8_t> bits);

  int width() const { return extent_.width; }
  int height() const { return extent_.height; }
  Extent extent() const { return extent_; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set(int x, int y, bool value = true) { bits_[index(x, y)] = value ? 1 : 0; }
  void set(std::size_t i, bool value = true) { bits_[i] = value ? 1 : 0; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * extent_.width + x; }

  Extent extent_;
  std::vector<std::uint8_t> bits_;
};

class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int width, int height, std::vector<ClassId> labels, ClassId ignore_id = kDefaultIgnoreId);
  LabelMap(Extent extent, ClassId fill, ClassId ignore_id = kDefaultIgnoreId);

  int width() const { return extent_.width; }
  int height() const { return extent_.height; }
  Extent extent() const { return extent_; }
  ClassId ignore_id() const { return ignore_id_; }
  std::span<const ClassId> labels() const { return labels_; }

  ClassId at(int x, int y) const { return labels_[static_cast<std::size_t>(y) * extent_.width + x]; }
  ClassId operator[](std::size_t i) const { return labels_[i]; }
  void set(std::size_t i, ClassId id) { labels_[i] = id; }
  void set(int x, int y, ClassId id) { labels_[static_cast<std::size_t>(y) * extent_.width + x] = id; }

  /// Throws LabelOutOfRange if any non-ignore label is >= class_count.
  void validate(int class_count) const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  Extent extent_;
  std::vector<ClassId> labels_;
  ClassId ignore_id_ = kDefaultIgnoreId;
};

/// H x W x C embedding produced by a segmenter backend.
///
/// `stride` maps feature cells to image pixels: cell (r, c) covers the pixel
/// at floor((c + 0.5) * stride), floor((r + 0.5) * stride). `embedding_id`
/// lets a backend find server-side state for this embedding; it is empty
/// when the backend keeps none.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int rows, int cols, int channels, std::vector<float> data, double stride, Extent image,
             std::string embedding_id = {});

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int channels() const { return channels_; }
  double stride() const { return stride_; }
  Extent image_extent() const { return image_; }
  const std::string& embedding_id() const { return embedding_id_; }
  std::span<const float> data() const { return data_; }

  std::span<const float> at(int r, int c) const {
    return {data_.data() + (static_cast<std::size_t>(r) * cols_ + c) * channels_,
            static_cast<std::size_t>(channels_)};
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
  double stride_ = 1.0;
  Extent image_;
  std::string embedding_id_;
};

/// Coarse mask resampled onto the feature grid.
class DownsampledMask {
 public:
  DownsampledMask(int rows, int cols, std::vector<std::uint8_t> bits);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool at(int r, int c) const { return bits_[static_cast<std::size_t>(r) * cols_ + c] != 0; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::size_t count() const;

  friend bool operator==(const DownsampledMask&, const DownsampledMask&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Feature vectors under the set cells of a DownsampledMask, row-major.
class ForegroundFeatureSet {
 public:
  ForegroundFeatureSet(int channels, std::vector<float> vectors);

  std::size_t count() const { return channels_ == 0 ? 0 : vectors_.size() / channels_; }
  int channels() const { return channels_; }
  std::span<const float> vector(std::size_t i) const {
    return {vectors_.data() + i * channels_, static_cast<std::size_t>(channels_)};
  }

 private:
  int channels_ = 0;
  std::vector<float> vectors_;
};

class ConfidenceMap {
 public:
  ConfidenceMap(int rows, int cols, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double at(int r, int c) const { return values_[static_cast<std::size_t>(r) * cols_ + c]; }
  std::span<const double> values() const { return values_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

enum class Polarity { Positive, Negative };

struct PointPrompt {
  int x = 0;
  int y = 0;
  Polarity polarity = Polarity::Positive;
  friend bool operator==(const PointPrompt&, const PointPrompt&) = default;
};

/// Inclusive pixel rectangle.
struct BoxPrompt {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
  bool contains(int x, int y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
  friend bool operator==(const BoxPrompt&, const BoxPrompt&) = default;
};

void validate_box(const BoxPrompt& box, Extent image);

struct PromptSet {
  std::vector<PointPrompt> points;
  std::optional<BoxPrompt> box;
  std::optional<BinaryMask> mask_prompt;

  bool empty() const { return points.empty() && !box && !mask_prompt; }
  /// Throws InvalidArgument when no prompt is present or a prompt leaves the image.
  void validate(Extent image) const;
};

struct MaskProposal {
  BinaryMask mask;
  double score = 0.0;
};

/// Point grid x = o + i * g, y = o + j * g for i, j in [0, N).
struct GridSpec {
  int points_per_side = 32;
  double offset = 0.0;
  double spacing = 1.0;

  void validate() const;
  /// Default grid for a square side: g = side / N, o = g / 2.
  static GridSpec for_side(int points_per_side, int side);
};

/// One entry per distinct class that is neither background nor ignore, in
/// ascending class order.
std::vector<std::pair<ClassId, BinaryMask>> split_by_class(const LabelMap& map);

/// Nearest-neighbour resample: cell (r, c) takes the source pixel at
/// (floor((c + 0.5) * w / W), floor((r + 0.5) * h / H)).
DownsampledMask downsample_mask(const BinaryMask& mask, int rows, int cols);

/// Same sampling rule with an explicit pixel stride; cells whose sample pixel
/// falls outside the mask are unset.
DownsampledMask downsample_mask(const BinaryMask& mask, int rows, int cols, double stride);

/// Feature-cell centre to image pixel, clamped to the image.
PointPrompt cell_to_pixel(int row, int col, double stride, Extent image, Polarity polarity);

}  // namespace uosam
