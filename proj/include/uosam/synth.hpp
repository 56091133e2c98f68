#pragma once

// Seeded synthetic scenes: disjoint geometric objects with ground truth and a
// controllably corrupted coarse label map.

#include <cstdint>
#include <string>
#include <vector>

#include "uosam/core.hpp"
#include "uosam/segmenter.hpp"

namespace uosam::synth {

/// SplitMix64. Constants and derivations are fixed so fixtures can be
/// reproduced in any language:
///   state += 0x9E3779B97F4A7C15
///   z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
/// uniform() = (next() >> 11) * 2^-53; uniform_int(lo, hi) = lo + next() % (hi - lo + 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  double uniform();
  int uniform_int(int lo, int hi);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

enum class ShapeKind { Disk, Rectangle, Blob };

std::string to_string(ShapeKind kind);
ShapeKind shape_from_string(const std::string& name);

struct Corruption {
  int dilate_px = 0;
  int erode_px = 0;
  double boundary_noise_prob = 0.0;
  double drop_fragment_prob = 0.0;

  bool any() const {
    return dilate_px != 0 || erode_px != 0 || boundary_noise_prob != 0.0 || drop_fragment_prob != 0.0;
  }
};

struct SceneSpec {
  std::uint64_t seed = 0;
  int width = 128;
  int height = 128;
  int object_count = 1;
  std::vector<ShapeKind> shapes{ShapeKind::Disk, ShapeKind::Rectangle, ShapeKind::Blob};
  int min_radius = 12;
  int max_radius = 22;
  /// Minimum background gap between objects.
  int separation_px = 2;
  int max_attempts = 500;
  Corruption corruption;
};

struct Scene {
  Image image;
  LabelMap ground_truth;
  LabelMap coarse;
  seg::OracleScene oracle;
  std::vector<ShapeKind> kinds;
};

/// Object k gets class k. Throws PlacementFailure when an object cannot be
/// placed within max_attempts.
///
/// Corruption, in order: each object's mask is eroded by erode_px then
/// dilated by dilate_px (dilation only claims ground-truth background, lower
/// classes first); each pixel on a label boundary is reassigned with
/// probability boundary_noise_prob to a differing 4-neighbour's label
/// (never beyond that class's ground-truth dilation); each quadrant of an
/// object's coarse mask about its centroid is dropped with probability
/// drop_fragment_prob. An object left with no pixels gets back its
/// centroid-nearest pixel.
Scene generate_scene(const SceneSpec& spec);

/// Pixel of the mask closest to its centroid; ties go to the first in
/// row-major order. Throws EmptyMask.
PointPrompt centroid_nearest_pixel(const BinaryMask& mask);

BinaryMask shape_mask(Extent extent, ShapeKind kind, int cx, int cy, int radius, SplitMix64& rng);

}  // namespace uosam::synth
