#include "uosam/segmenter.hpp"

#include <algorithm>
#include <cstdio>

#include "uosam/kernels.hpp"
#include "uosam/maskops.hpp"

namespace uosam::seg {

void DecodeRequest::validate() const {
  require(proposals_requested >= 1, ErrorCode::InvalidArgument, "proposals_requested must be >= 1");
  prompts.validate(features.image_extent());
}

namespace {

struct PaletteTable {
  std::array<Rgb, 256> colors{};
  std::unordered_map<std::uint32_t, ClassId> inverse;

  PaletteTable() {
    for (int i = 0; i < 256; ++i) {
      int c = i;
      Rgb rgb{0, 0, 0};
      for (int j = 0; j < 8; ++j) {
        rgb[0] |= static_cast<std::uint8_t>(((c >> 0) & 1) << (7 - j));
        rgb[1] |= static_cast<std::uint8_t>(((c >> 1) & 1) << (7 - j));
        rgb[2] |= static_cast<std::uint8_t>(((c >> 2) & 1) << (7 - j));
        c >>= 3;
      }
      colors[i] = rgb;
      inverse.emplace(pack(rgb), static_cast<ClassId>(i));
    }
  }

  static std::uint32_t pack(const Rgb& c) {
    return (static_cast<std::uint32_t>(c[0]) << 16) | (static_cast<std::uint32_t>(c[1]) << 8) | c[2];
  }
};

const PaletteTable& palette() {
  static const PaletteTable table;
  return table;
}

std::string content_id(const Image& image) {
  // FNV-1a over dims and pixels.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint8_t b) {
    h ^= b;
    h *= 1099511628211ULL;
  };
  for (int v : {image.width(), image.height()}) {
    for (int s = 0; s < 32; s += 8) mix(static_cast<std::uint8_t>(v >> s));
  }
  for (std::uint8_t b : image.data()) mix(b);
  char buf[24];
  std::snprintf(buf, sizeof buf, "mock-%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LabelMap labels_from_image(const Image& image) {
  std::vector<ClassId> labels(image.extent().area());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const auto* p = image.pixel(x, y);
      labels[static_cast<std::size_t>(y) * image.width() + x] = palette_class({p[0], p[1], p[2]});
    }
  }
  return LabelMap(image.width(), image.height(), std::move(labels));
}

}  // namespace

Rgb palette_color(ClassId id) { return palette().colors[id]; }

ClassId palette_class(const Rgb& color) {
  const auto& inv = palette().inverse;
  const auto it = inv.find(PaletteTable::pack(color));
  if (it == inv.end()) fail(ErrorCode::InvalidArgument, "colour is not in the class palette");
  return it->second;
}

OracleScene::OracleScene(Extent extent, std::vector<std::pair<ClassId, BinaryMask>> objects)
    : extent_(extent), objects_(std::move(objects)), labels_(extent, kBackgroundId) {
  std::vector<bool> seen(256, false);
  for (const auto& [id, mask] : objects_) {
    require(id != kBackgroundId && id != kDefaultIgnoreId, ErrorCode::InvalidArgument,
            "oracle object class must not be background or ignore");
    require(!seen[id], ErrorCode::InvalidArgument, "oracle object classes must be distinct");
    seen[id] = true;
    require(mask.extent() == extent, ErrorCode::DimensionMismatch, "oracle object size != scene size");
    for (std::size_t i = 0; i < mask.bits().size(); ++i) {
      if (!mask.test(i)) continue;
      require(labels_[i] == kBackgroundId, ErrorCode::InvalidArgument, "oracle objects overlap");
      labels_.set(i, id);
    }
  }
  std::vector<std::uint8_t> rgb(extent.area() * 3);
  for (std::size_t i = 0; i < extent.area(); ++i) {
    const auto c = palette_color(labels_[i]);
    std::copy(c.begin(), c.end(), rgb.begin() + static_cast<std::ptrdiff_t>(i * 3));
  }
  image_ = Image(extent.width, extent.height, std::move(rgb));
}

OracleScene OracleScene::from_image(const Image& image) {
  return OracleScene(image.extent(), split_by_class(labels_from_image(image)));
}

double mock_score(int k) { return static_cast<double>(10 - k) / 10.0; }

MockOracleBackend::MockOracleBackend(MockOptions options) : options_(options) {
  require(options_.stride >= 1, ErrorCode::InvalidArgument, "mock stride must be >= 1");
  require(options_.number_of_classes >= 1 && options_.number_of_classes <= 254, ErrorCode::InvalidArgument,
          "mock number_of_classes must lie in [1, 254]");
  require(options_.cache_capacity >= 1, ErrorCode::InvalidArgument, "mock cache capacity must be >= 1");
}

FeatureMap MockOracleBackend::embed(const Image& image) {
  auto labels = std::make_shared<const LabelMap>(labels_from_image(image));
  const int stride = options_.stride;
  const int channels = options_.number_of_classes + 1;
  const int rows = (image.height() + stride - 1) / stride;
  const int cols = (image.width() + stride - 1) / stride;
  std::vector<float> data(static_cast<std::size_t>(rows) * cols * channels, 0.0f);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto p = cell_to_pixel(r, c, stride, image.extent(), Polarity::Positive);
      const ClassId id = labels->at(p.x, p.y);
      if (id >= channels) {
        fail(ErrorCode::BackendFailure, "class " + std::to_string(id) + " exceeds mock channel count");
      }
      data[(static_cast<std::size_t>(r) * cols + c) * channels + id] = 1.0f;
    }
  }

  std::string id = content_id(image);
  {
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(id); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
    } else {
      lru_.emplace_front(id, std::move(labels));
      index_[id] = lru_.begin();
      if (lru_.size() > options_.cache_capacity) {
        index_.erase(lru_.back().first);
        lru_.pop_back();
      }
    }
  }
  return FeatureMap(rows, cols, channels, std::move(data), stride, image.extent(), std::move(id));
}

std::shared_ptr<const LabelMap> MockOracleBackend::lookup(const FeatureMap& features) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(features.embedding_id()); it != index_.end()) return it->second->second;
  }
  // Full-resolution one-hot features carry the whole scene; read it back.
  if (features.stride() == 1.0 && features.rows() == features.image_extent().height &&
      features.cols() == features.image_extent().width) {
    std::vector<ClassId> labels(static_cast<std::size_t>(features.rows()) * features.cols());
    for (int r = 0; r < features.rows(); ++r) {
      for (int c = 0; c < features.cols(); ++c) {
        const auto v = features.at(r, c);
        labels[static_cast<std::size_t>(r) * features.cols() + c] =
            static_cast<ClassId>(std::max_element(v.begin(), v.end()) - v.begin());
      }
    }
    return std::make_shared<const LabelMap>(features.cols(), features.rows(), std::move(labels));
  }
  fail(ErrorCode::BackendFailure, "unknown_embedding: " + features.embedding_id());
}

std::vector<MaskProposal> MockOracleBackend::decode(const DecodeRequest& request) {
  request.validate();
  require(request.proposals_requested <= 11, ErrorCode::InvalidArgument, "mock supports at most 11 proposals");
  const auto labels = lookup(request.features);
  const auto objects = split_by_class(*labels);
  const auto& prompts = request.prompts;

  auto vetoed = [&](ClassId id) {
    return std::any_of(prompts.points.begin(), prompts.points.end(), [&](const PointPrompt& p) {
      return p.polarity == Polarity::Negative && labels->at(p.x, p.y) == id;
    });
  };

  const BinaryMask* chosen = nullptr;
  for (const auto& p : prompts.points) {
    if (p.polarity != Polarity::Positive) continue;
    const ClassId id = labels->at(p.x, p.y);
    if (id == kBackgroundId || id == labels->ignore_id() || vetoed(id)) continue;
    for (const auto& [oid, mask] : objects) {
      if (oid == id) chosen = &mask;
    }
    if (chosen) break;
  }
  auto best_overlap = [&](const BinaryMask& region) -> const BinaryMask* {
    const BinaryMask* best = nullptr;
    double best_iou = 0.0;
    for (const auto& [oid, mask] : objects) {
      if (vetoed(oid)) continue;
      const double iou = maskops::mask_iou(mask, region);
      if (iou > best_iou) {
        best_iou = iou;
        best = &mask;
      }
    }
    return best;
  };
  if (!chosen && prompts.box) chosen = best_overlap(maskops::box_mask(labels->extent(), *prompts.box));
  if (!chosen && prompts.mask_prompt && !prompts.mask_prompt->empty()) chosen = best_overlap(*prompts.mask_prompt);
  if (!chosen) fail(ErrorCode::NoObject, "no oracle object matches the prompts");

  std::vector<MaskProposal> out;
  out.reserve(request.proposals_requested);
  for (int k = 0; k < request.proposals_requested; ++k) {
    out.push_back({k == 0 ? *chosen : kernels::erode(*chosen, k), mock_score(k)});
  }
  return out;
}

}  // namespace uosam::seg
