#include "uosam/lro.hpp"

#include <algorithm>
#include <cmath>

#include "uosam/kernels.hpp"

namespace uosam::lro {

ForegroundFeatureSet crop_foreground(const FeatureMap& features, const DownsampledMask& mask) {
  require(mask.rows() == features.rows() && mask.cols() == features.cols(), ErrorCode::DimensionMismatch,
          "downsampled mask grid != feature grid");
  std::vector<float> vectors;
  vectors.reserve(mask.count() * features.channels());
  for (int r = 0; r < features.rows(); ++r) {
    for (int c = 0; c < features.cols(); ++c) {
      if (!mask.at(r, c)) continue;
      const auto v = features.at(r, c);
      vectors.insert(vectors.end(), v.begin(), v.end());
    }
  }
  return ForegroundFeatureSet(features.channels(), std::move(vectors));
}

DownsampledMask mask_to_feature_grid(const BinaryMask& coarse, const FeatureMap& features) {
  require(coarse.extent() == features.image_extent(), ErrorCode::DimensionMismatch,
          "coarse mask size != embedded image size");
  auto grid = downsample_mask(coarse, features.rows(), features.cols(), features.stride());
  if (grid.count() > 0 || coarse.empty()) return grid;

  std::vector<std::uint8_t> bits(static_cast<std::size_t>(features.rows()) * features.cols(), 0);
  for (int y = 0; y < coarse.height(); ++y) {
    for (int x = 0; x < coarse.width(); ++x) {
      if (!coarse.at(x, y)) continue;
      const int r = std::min(features.rows() - 1, static_cast<int>(y / features.stride()));
      const int c = std::min(features.cols() - 1, static_cast<int>(x / features.stride()));
      bits[static_cast<std::size_t>(r) * features.cols() + c] = 1;
    }
  }
  return {features.rows(), features.cols(), std::move(bits)};
}

ConfidenceMap build_confidence_map(const FeatureMap& features, const ForegroundFeatureSet& fg) {
  return ConfidenceMap(features.rows(), features.cols(), kernels::confidence_map_parallel(features, fg));
}

std::pair<PointPrompt, PointPrompt> select_points(const ConfidenceMap& conf, double stride, Extent image) {
  const auto values = conf.values();
  std::size_t best = 0;
  std::size_t worst = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
    if (values[i] < values[worst]) worst = i;
  }
  const int cols = conf.cols();
  return {cell_to_pixel(static_cast<int>(best) / cols, static_cast<int>(best) % cols, stride, image,
                        Polarity::Positive),
          cell_to_pixel(static_cast<int>(worst) / cols, static_cast<int>(worst) % cols, stride, image,
                        Polarity::Negative)};
}

BoxPrompt select_box(const BinaryMask& coarse, const PointPrompt& p_pos, maskops::Connectivity connectivity) {
  return maskops::largest_component_containing(coarse, p_pos, connectivity).bbox;
}

ObjectPrompts derive_prompts(const FeatureMap& features, const BinaryMask& coarse, const LroOptions& options) {
  if (coarse.empty()) fail(ErrorCode::EmptyMask, "coarse class mask is empty");
  const auto grid = mask_to_feature_grid(coarse, features);
  auto confidence = build_confidence_map(features, crop_foreground(features, grid));
  auto [p_pos, p_neg] = select_points(confidence, features.stride(), features.image_extent());
  const auto [lo, hi] = std::minmax_element(confidence.values().begin(), confidence.values().end());
  const bool constant = *lo == *hi;
  const BoxPrompt box = select_box(coarse, p_pos, options.connectivity);
  return {p_pos, p_neg, box, std::move(confidence), constant};
}

const MaskProposal& best_proposal(const std::vector<MaskProposal>& proposals) {
  require(!proposals.empty(), ErrorCode::EmptyProposal, "decoder returned no proposals");
  const auto it = std::max_element(proposals.begin(), proposals.end(),
                                   [](const MaskProposal& a, const MaskProposal& b) { return a.score < b.score; });
  return *it;
}

RefinementResult cascaded_refine(seg::SegmenterBackend& backend, const FeatureMap& features,
                                 const ObjectPrompts& prompts, const BinaryMask& coarse, const LroOptions& options) {
  require(coarse.extent() == features.image_extent(), ErrorCode::DimensionMismatch,
          "coarse mask size != embedded image size");
  RefinementResult result;
  result.degenerate_points = prompts.degenerate_points;

  PromptSet first;
  first.points = {prompts.p_pos, prompts.p_neg};
  first.box = prompts.box;
  const auto step1 = backend.decode({features, std::move(first), options.proposals_requested});
  result.first_step = best_proposal(step1);
  if (result.first_step.mask.extent() != coarse.extent()) {
    fail(ErrorCode::BackendFailure, "decoder mask size != image size");
  }
  if (result.first_step.mask.empty()) {
    result.degraded = true;
    result.final = {coarse, 0.0};
    return result;
  }

  PromptSet second;
  second.points = {prompts.p_pos, prompts.p_neg};
  second.box = maskops::bounding_box(result.first_step.mask);
  second.mask_prompt = result.first_step.mask;
  const auto step2 = backend.decode({features, std::move(second), options.proposals_requested});

  const MaskProposal* chosen = nullptr;
  for (const auto& p : step2) {
    if (p.mask.extent() != coarse.extent()) fail(ErrorCode::BackendFailure, "decoder mask size != image size");
    if (p.mask.empty()) continue;
    if (!chosen || p.score > chosen->score) chosen = &p;
  }
  if (!chosen) fail(ErrorCode::EmptyProposal, "every second-step proposal is empty");
  result.final = *chosen;
  result.final.score = std::max(0.0, result.final.score);
  return result;
}

RefinementResult refine_object(seg::SegmenterBackend& backend, const FeatureMap& features,
                               const BinaryMask& coarse_class_mask, ClassId class_id, const LroOptions& options) {
  const auto prompts = derive_prompts(features, coarse_class_mask, options);
  auto result = cascaded_refine(backend, features, prompts, coarse_class_mask, options);
  result.class_id = class_id;
  return result;
}

RefinementResult refine_object(seg::SegmenterBackend& backend, const Image& image,
                               const BinaryMask& coarse_class_mask, ClassId class_id, const LroOptions& options) {
  if (coarse_class_mask.empty()) fail(ErrorCode::EmptyMask, "coarse class mask is empty");
  require(coarse_class_mask.extent() == image.extent(), ErrorCode::DimensionMismatch, "coarse mask size != image size");
  const auto features = backend.embed(image);
  return refine_object(backend, features, coarse_class_mask, class_id, options);
}

}  // namespace uosam::lro
