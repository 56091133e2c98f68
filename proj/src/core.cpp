#include "uosam/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace uosam {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::EmptyForeground: return "EmptyForeground";
    case ErrorCode::EmptyProposal: return "EmptyProposal";
    case ErrorCode::NoObject: return "NoObject";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::Oversize: return "Oversize";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::NoScoredClasses: return "NoScoredClasses";
    case ErrorCode::NoScoredPixels: return "NoScoredPixels";
    case ErrorCode::PlacementFailure: return "PlacementFailure";
    case ErrorCode::UnpairedFiles: return "UnpairedFiles";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

namespace {

void require_extent(int width, int height) {
  require(width >= 1 && height >= 1, ErrorCode::InvalidArgument, "raster dimensions must be >= 1");
}

}  // namespace

Image::Image(int width, int height, std::vector<std::uint8_t> rgb) : extent_{width, height}, data_(std::move(rgb)) {
  require_extent(width, height);
  require(data_.size() == extent_.area() * 3, ErrorCode::InvalidArgument, "image data length != width*height*3");
}

Image Image::crop(int x0, int y0, int x1, int y1) const {
  validate_box({x0, y0, x1, y1}, extent_);
  const int w = x1 - x0 + 1;
  const int h = y1 - y0 + 1;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    const auto* src = pixel(x0, y0 + y);
    std::copy(src, src + static_cast<std::size_t>(w) * 3, out.begin() + static_cast<std::ptrdiff_t>(y) * w * 3);
  }
  return Image(w, h, std::move(out));
}

BinaryMask::BinaryMask(Extent extent) : extent_(extent), bits_(extent.area(), 0) {
  require_extent(extent.width, extent.height);
}

BinaryMask::BinaryMask(Extent extent, std::vector<std::uint8_t> bits) : extent_(extent), bits_(std::move(bits)) {
  require_extent(extent.width, extent.height);
  require(bits_.size() == extent_.area(), ErrorCode::InvalidArgument, "mask length != width*height");
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

LabelMap::LabelMap(int width, int height, std::vector<ClassId> labels, ClassId ignore_id)
    : extent_{width, height}, labels_(std::move(labels)), ignore_id_(ignore_id) {
  require_extent(width, height);
  require(labels_.size() == extent_.area(), ErrorCode::InvalidArgument, "label length != width*height");
}

LabelMap::LabelMap(Extent extent, ClassId fill, ClassId ignore_id)
    : extent_(extent), labels_(extent.area(), fill), ignore_id_(ignore_id) {
  require_extent(extent.width, extent.height);
}

void LabelMap::validate(int class_count) const {
  for (ClassId id : labels_) {
    if (id != ignore_id_ && id >= class_count) {
      fail(ErrorCode::LabelOutOfRange,
           "label " + std::to_string(id) + " >= class count " + std::to_string(class_count));
    }
  }
}

FeatureMap::FeatureMap(int rows, int cols, int channels, std::vector<float> data, double stride, Extent image,
                       std::string embedding_id)
    : rows_(rows),
      cols_(cols),
      channels_(channels),
      data_(std::move(data)),
      stride_(stride),
      image_(image),
      embedding_id_(std::move(embedding_id)) {
  require(rows >= 1 && cols >= 1 && channels >= 1, ErrorCode::InvalidArgument, "feature dims must be >= 1");
  require(data_.size() == static_cast<std::size_t>(rows) * cols * channels, ErrorCode::InvalidArgument,
          "feature data length != H*W*C");
  require(std::isfinite(stride) && stride > 0, ErrorCode::InvalidArgument, "stride must be > 0");
  require_extent(image.width, image.height);
  require(std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); }),
          ErrorCode::InvalidArgument, "feature values must be finite");
}

DownsampledMask::DownsampledMask(int rows, int cols, std::vector<std::uint8_t> bits)
    : rows_(rows), cols_(cols), bits_(std::move(bits)) {
  require(rows >= 1 && cols >= 1, ErrorCode::InvalidArgument, "downsampled dims must be >= 1");
  require(bits_.size() == static_cast<std::size_t>(rows) * cols, ErrorCode::InvalidArgument,
          "downsampled length != H*W");
}

std::size_t DownsampledMask::count() const {
  return static_cast<std::size_t>(std::count_if(bits_.begin(), bits_.end(), [](auto b) { return b != 0; }));
}

ForegroundFeatureSet::ForegroundFeatureSet(int channels, std::vector<float> vectors)
    : channels_(channels), vectors_(std::move(vectors)) {
  require(channels >= 1, ErrorCode::InvalidArgument, "channels must be >= 1");
  require(vectors_.size() % channels == 0, ErrorCode::InvalidArgument, "foreground data not a multiple of C");
}

ConfidenceMap::ConfidenceMap(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  require(rows >= 1 && cols >= 1, ErrorCode::InvalidArgument, "confidence dims must be >= 1");
  require(values_.size() == static_cast<std::size_t>(rows) * cols, ErrorCode::InvalidArgument,
          "confidence length != H*W");
  require(std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); }),
          ErrorCode::InvalidArgument, "confidence values must be finite");
}

void validate_box(const BoxPrompt& box, Extent image) {
  require(box.x_min <= box.x_max && box.y_min <= box.y_max, ErrorCode::InvalidArgument, "box min > max");
  require(image.contains(box.x_min, box.y_min) && image.contains(box.x_max, box.y_max), ErrorCode::InvalidArgument,
          "box outside image");
}

void PromptSet::validate(Extent image) const {
  require(!empty(), ErrorCode::InvalidArgument, "prompt set is empty");
  for (const auto& p : points) {
    require(image.contains(p.x, p.y), ErrorCode::InvalidArgument, "point prompt outside image");
  }
  if (box) validate_box(*box, image);
  if (mask_prompt) {
    require(mask_prompt->extent() == image, ErrorCode::DimensionMismatch, "mask prompt size != image size");
  }
}

void GridSpec::validate() const {
  require(points_per_side >= 1, ErrorCode::InvalidArgument, "points_per_side must be >= 1");
  require(std::isfinite(spacing) && spacing > 0, ErrorCode::InvalidArgument, "grid spacing must be > 0");
  require(std::isfinite(offset) && offset >= 0, ErrorCode::InvalidArgument, "grid offset must be >= 0");
}

GridSpec GridSpec::for_side(int points_per_side, int side) {
  require(points_per_side >= 1 && side >= 1, ErrorCode::InvalidArgument, "grid side and N must be >= 1");
  const double g = static_cast<double>(side) / points_per_side;
  return {points_per_side, g / 2.0, g};
}

std::vector<std::pair<ClassId, BinaryMask>> split_by_class(const LabelMap& map) {
  std::array<std::size_t, 256> first_seen{};
  std::array<bool, 256> present{};
  const auto labels = map.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const ClassId id = labels[i];
    if (id == kBackgroundId || id == map.ignore_id()) continue;
    if (!present[id]) first_seen[id] = i;
    present[id] = true;
  }
  std::vector<std::pair<ClassId, BinaryMask>> out;
  for (int id = 0; id < 256; ++id) {
    if (!present[id]) continue;
    BinaryMask mask(map.extent());
    for (std::size_t i = first_seen[id]; i < labels.size(); ++i) {
      if (labels[i] == id) mask.set(i);
    }
    out.emplace_back(static_cast<ClassId>(id), std::move(mask));
  }
  return out;
}

DownsampledMask downsample_mask(const BinaryMask& mask, int rows, int cols) {
  require(rows >= 1 && cols >= 1, ErrorCode::InvalidArgument, "target dims must be >= 1");
  const auto h = static_cast<std::int64_t>(mask.height());
  const auto w = static_cast<std::int64_t>(mask.width());
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const auto sy = static_cast<int>((2 * r + 1) * h / (2 * static_cast<std::int64_t>(rows)));
    for (int c = 0; c < cols; ++c) {
      const auto sx = static_cast<int>((2 * c + 1) * w / (2 * static_cast<std::int64_t>(cols)));
      bits[static_cast<std::size_t>(r) * cols + c] = mask.at(sx, sy) ? 1 : 0;
    }
  }
  return {rows, cols, std::move(bits)};
}

DownsampledMask downsample_mask(const BinaryMask& mask, int rows, int cols, double stride) {
  require(rows >= 1 && cols >= 1, ErrorCode::InvalidArgument, "target dims must be >= 1");
  require(stride > 0, ErrorCode::InvalidArgument, "stride must be > 0");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const auto sy = static_cast<long>(std::floor((r + 0.5) * stride));
    if (sy >= mask.height()) break;
    for (int c = 0; c < cols; ++c) {
      const auto sx = static_cast<long>(std::floor((c + 0.5) * stride));
      if (sx >= mask.width()) break;
      bits[static_cast<std::size_t>(r) * cols + c] = mask.at(static_cast<int>(sx), static_cast<int>(sy)) ? 1 : 0;
    }
  }
  return {rows, cols, std::move(bits)};
}

PointPrompt cell_to_pixel(int row, int col, double stride, Extent image, Polarity polarity) {
  const auto x = static_cast<long>(std::floor((col + 0.5) * stride));
  const auto y = static_cast<long>(std::floor((row + 0.5) * stride));
  return {static_cast<int>(std::clamp<long>(x, 0, image.width - 1)),
          static_cast<int>(std::clamp<long>(y, 0, image.height - 1)), polarity};
}

}  // namespace uosam
