#pragma once

// Local region optimizer: derives point and box prompts for one object from
// its coarse mask and refines it with two cascaded decoder passes.

#include "uosam/core.hpp"
#include "uosam/maskops.hpp"
#include "uosam/segmenter.hpp"

namespace uosam::lro {

struct ObjectPrompts {
  PointPrompt p_pos;
  PointPrompt p_neg;
  BoxPrompt box;
  ConfidenceMap confidence;
  /// Set when the confidence map is constant and p_pos == p_neg.
  bool degenerate_points = false;
};

struct RefinementResult {
  ClassId class_id = 0;
  MaskProposal first_step;
  MaskProposal final;
  /// Step 1 returned an empty best mask; `final` is the coarse mask.
  bool degraded = false;
  bool degenerate_points = false;
};

struct LroOptions {
  maskops::Connectivity connectivity = maskops::Connectivity::Eight;
  int proposals_requested = 3;
};

/// Feature vectors under the set cells, row-major.
ForegroundFeatureSet crop_foreground(const FeatureMap& features, const DownsampledMask& mask);

/// Coarse mask on the feature grid. When nearest-neighbour sampling misses
/// every pixel of a non-empty mask, each set pixel marks the cell containing it.
DownsampledMask mask_to_feature_grid(const BinaryMask& coarse, const FeatureMap& features);

/// S = mean over the foreground set of the per-cell cosine similarity.
ConfidenceMap build_confidence_map(const FeatureMap& features, const ForegroundFeatureSet& fg);

/// Argmax / argmin cells mapped to pixel centres; ties go to the smallest
/// row-major index.
std::pair<PointPrompt, PointPrompt> select_points(const ConfidenceMap& conf, double stride, Extent image);

/// Tight box of the largest component containing p_pos (or of the largest
/// component overall when p_pos is off the mask).
BoxPrompt select_box(const BinaryMask& coarse, const PointPrompt& p_pos,
                     maskops::Connectivity connectivity = maskops::Connectivity::Eight);

ObjectPrompts derive_prompts(const FeatureMap& features, const BinaryMask& coarse, const LroOptions& options = {});

/// Highest-scoring proposal; the first one wins ties.
const MaskProposal& best_proposal(const std::vector<MaskProposal>& proposals);

/// Two decoder passes: {p_pos, p_neg, box}, then {p_pos, p_neg, bbox of the
/// first mask, first mask as dense prompt}. Issues exactly two decode calls
/// unless step 1 yields an empty mask, in which case the coarse mask comes
/// back flagged `degraded`.
RefinementResult cascaded_refine(seg::SegmenterBackend& backend, const FeatureMap& features,
                                 const ObjectPrompts& prompts, const BinaryMask& coarse,
                                 const LroOptions& options = {});

RefinementResult refine_object(seg::SegmenterBackend& backend, const FeatureMap& features,
                               const BinaryMask& coarse_class_mask, ClassId class_id = 0,
                               const LroOptions& options = {});

/// Embeds `image` and refines one object.
RefinementResult refine_object(seg::SegmenterBackend& backend, const Image& image,
                               const BinaryMask& coarse_class_mask, ClassId class_id = 0,
                               const LroOptions& options = {});

}  // namespace uosam::lro
