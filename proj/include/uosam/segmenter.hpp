#pragma once

// Promptable-segmenter backend contract plus the deterministic geometric
// mock used as a test oracle.

#include <array>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "uosam/core.hpp"

namespace uosam::seg {

struct DecodeRequest {
  const FeatureMap& features;
  PromptSet prompts;
  int proposals_requested = 3;

  void validate() const;
};

/// embed and decode must be deterministic for identical inputs. Callers keep
/// at most max_concurrent_requests() calls in flight on one instance.
class SegmenterBackend {
 public:
  virtual ~SegmenterBackend() = default;

  virtual std::string name() const = 0;
  virtual int max_concurrent_requests() const = 0;
  virtual FeatureMap embed(const Image& image) = 0;
  virtual std::vector<MaskProposal> decode(const DecodeRequest& request) = 0;
};

using Rgb = std::array<std::uint8_t, 3>;

/// Class colour used when rendering oracle scenes (the PASCAL VOC colormap).
Rgb palette_color(ClassId id);

/// Inverse of palette_color; throws InvalidArgument for a colour outside the palette.
ClassId palette_class(const Rgb& color);

/// Ground truth for the mock backend: disjoint objects and their rendering.
class OracleScene {
 public:
  OracleScene(Extent extent, std::vector<std::pair<ClassId, BinaryMask>> objects);

  /// Recovers the scene from a palette-rendered image.
  static OracleScene from_image(const Image& image);

  Extent extent() const { return extent_; }
  const std::vector<std::pair<ClassId, BinaryMask>>& objects() const { return objects_; }
  const LabelMap& labels() const { return labels_; }
  const Image& image() const { return image_; }

 private:
  Extent extent_;
  std::vector<std::pair<ClassId, BinaryMask>> objects_;
  LabelMap labels_;
  Image image_;
};

struct MockOptions {
  int stride = 4;
  int number_of_classes = 20;
  std::size_t cache_capacity = 64;
};

/// Geometric oracle standing in for a real promptable segmenter.
///
/// embed() reads class IDs back from the palette colours and returns one-hot
/// features (C = number_of_classes + 1) sampled at each cell centre.
/// decode() picks the object under the first positive point, else the object
/// with the highest IoU against the box, else against the mask prompt.
/// Objects under any negative point are vetoed. Proposal 0 is the object's
/// exact mask with score 1.0; proposal k is the object eroded by k pixels
/// with score 1.0 - 0.1k.
class MockOracleBackend final : public SegmenterBackend {
 public:
  explicit MockOracleBackend(MockOptions options = {});

  std::string name() const override { return "mock"; }
  int max_concurrent_requests() const override { return 1 << 16; }
  FeatureMap embed(const Image& image) override;
  std::vector<MaskProposal> decode(const DecodeRequest& request) override;

  const MockOptions& options() const { return options_; }

 private:
  std::shared_ptr<const LabelMap> lookup(const FeatureMap& features);

  MockOptions options_;
  std::mutex mutex_;
  std::uint64_t next_id_ = 0;
  std::list<std::pair<std::string, std::shared_ptr<const LabelMap>>> lru_;
  std::unordered_map<std::string, decltype(lru_)::iterator> index_;
};

/// Score of the k-th mock proposal.
double mock_score(int k);

}  // namespace uosam::seg
