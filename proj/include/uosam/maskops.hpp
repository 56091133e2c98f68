#pragma once

#include <optional>
#include <vector>

#include "uosam/core.hpp"

namespace uosam::maskops {

enum class Connectivity { Four = 4, Eight = 8 };

struct Component {
  int id = 0;
  std::size_t pixel_count = 0;
  BinaryMask mask;
  BoxPrompt bbox;
  /// First pixel in row-major order.
  int first_x = 0;
  int first_y = 0;
};

/// Components sorted by pixel_count descending, ties by the row-major
/// position of their first pixel. Ids follow that order starting at 0.
std::vector<Component> connected_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::Eight);

/// Component under `point` when it is set; otherwise the globally largest
/// component. Throws EmptyMask for a mask with no set bits.
Component largest_component_containing(const BinaryMask& mask, const PointPrompt& point,
                                       Connectivity connectivity = Connectivity::Eight);

/// Tight inclusive bounding box; nullopt for an empty mask.
std::optional<BoxPrompt> bounding_box(const BinaryMask& mask);

/// |a & b| / |a | b|. Two empty masks have IoU 1 by convention.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// Greedy NMS: visit by score descending (stable on input order), keep a
/// proposal iff its IoU with every kept proposal is <= iou_threshold.
std::vector<MaskProposal> nms_filter(const std::vector<MaskProposal>& proposals, double iou_threshold);

/// Set pixels within band_px (Chebyshev, exclusive) of the mask boundary.
BinaryMask boundary_band(const BinaryMask& mask, int band_px);

BinaryMask box_mask(Extent extent, const BoxPrompt& box);

}  // namespace uosam::maskops
