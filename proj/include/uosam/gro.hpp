#pragma once

// Global region optimizer: grid-prompted image-wide segmentation over crop
// boxes, followed by category voting against the LRO label map.

#include <utility>
#include <vector>

#include "uosam/core.hpp"
#include "uosam/segmenter.hpp"

namespace uosam::gro {

struct CropBox {
  BoxPrompt region;
  int layer = 0;
  int row = 0;
  int col = 0;
  friend bool operator==(const CropBox&, const CropBox&) = default;
};

struct GlobalProposalSet {
  /// Image-resolution proposals in NMS keep order (score descending).
  std::vector<MaskProposal> proposals;
};

struct GroOptions {
  double min_score = 0.8;
  double nms_iou = 0.7;
  int proposals_requested = 3;
  /// Upper bound on concurrent decodes; 0 uses the OpenMP default. The
  /// backend's max_concurrent_requests() always caps it.
  int threads = 0;
};

/// Row-major grid (j outer, i inner) of round(o + i*g), round(o + j*g),
/// rounding halves away from zero.
std::vector<std::pair<int, int>> generate_grid(const GridSpec& spec);

/// Layer 0 is the full image; layer k tiles it 2^k x 2^k with tiles of side
/// ceil(side / 2^k * (1 + overlap)) spread evenly from edge to edge.
/// Ordered by (layer, row, col).
std::vector<CropBox> generate_crop_boxes(int width, int height, int layers, double overlap);

/// Grid point (x, y) of the full-image grid mapped into a crop of size
/// (cw, ch): (x * cw / W, y * ch / H) with integer division.
std::vector<std::pair<int, int>> grid_for_crop(const std::vector<std::pair<int, int>>& grid, Extent image,
                                               const CropBox& crop);

/// For every crop: embed the crop, decode one positive point per grid
/// point, keep that point's best proposal, paste it back at image
/// resolution. Proposals below min_score or empty are dropped and the pool
/// (ordered by crop then point) goes through greedy NMS.
GlobalProposalSet image_wide_segment(seg::SegmenterBackend& backend, const Image& image, const GridSpec& spec,
                                     const std::vector<CropBox>& crops, const GroOptions& options = {});

/// Majority vote of lro_map labels under each proposal, highest score first;
/// earlier proposals keep the pixels they claim. Votes ignore ignore_id and
/// ties go to the smaller class ID. Pixels outside every proposal, and
/// proposals that cover only ignore pixels, keep their lro_map label.
LabelMap category_vote_fuse(const GlobalProposalSet& global, const LabelMap& lro_map);

}  // namespace uosam::gro
