#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// pipeline and a serial reference with the same arithmetic; tests assert the
// two agree and bench/ compares their throughput.

#include <cstdint>
#include <span>
#include <vector>

#include "uosam/core.hpp"

namespace uosam::kernels {

/// Mean cosine similarity of every feature cell against the foreground set.
/// Uses mean_i cos(f, l_i) = (f / |f|) . mean_i (l_i / |l_i|); zero-norm
/// vectors contribute 0. Results are clamped to [-1, 1].
std::vector<double> confidence_map_serial(const FeatureMap& features, const ForegroundFeatureSet& fg);
std::vector<double> confidence_map_parallel(const FeatureMap& features, const ForegroundFeatureSet& fg);

/// Adds per-pixel (gt, pred) pairs into a row-major class_count^2 matrix.
/// Pixels whose gt equals `ignore` are skipped; pixels whose pred equals
/// `ignore` go to void_pred[gt]. Labels must already be range-checked.
void confusion_serial(std::span<const ClassId> pred, std::span<const ClassId> gt, ClassId ignore, int class_count,
                      std::span<std::uint64_t> counts, std::span<std::uint64_t> void_pred);
void confusion_parallel(std::span<const ClassId> pred, std::span<const ClassId> gt, ClassId ignore, int class_count,
                        std::span<std::uint64_t> counts, std::span<std::uint64_t> void_pred);

/// Set pixels of `mask` whose Chebyshev distance to the nearest boundary
/// pixel is < band_px. A boundary pixel is a set pixel with an unset or
/// out-of-bounds 4-neighbour.
BinaryMask boundary_band_serial(const BinaryMask& mask, int band_px);
BinaryMask boundary_band_parallel(const BinaryMask& mask, int band_px);

/// Square (Chebyshev) structuring element of radius r.
BinaryMask dilate(const BinaryMask& mask, int radius);
BinaryMask erode(const BinaryMask& mask, int radius);

}  // namespace uosam::kernels
