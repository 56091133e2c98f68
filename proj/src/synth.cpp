#include "uosam/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "uosam/kernels.hpp"

namespace uosam::synth {

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

int SplitMix64::uniform_int(int lo, int hi) {
  require(lo <= hi, ErrorCode::InvalidArgument, "uniform_int: lo > hi");
  const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
  return static_cast<int>(lo + static_cast<std::int64_t>(next() % span));
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Disk: return "disk";
    case ShapeKind::Rectangle: return "rectangle";
    case ShapeKind::Blob: return "blob";
  }
  return "disk";
}

ShapeKind shape_from_string(const std::string& name) {
  if (name == "disk") return ShapeKind::Disk;
  if (name == "rectangle") return ShapeKind::Rectangle;
  if (name == "blob") return ShapeKind::Blob;
  fail(ErrorCode::InvalidArgument, "unknown shape '" + name + "'");
}

namespace {

void paint_disk(BinaryMask& mask, double cx, double cy, double r) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
  const int x1 = std::min(mask.width() - 1, static_cast<int>(std::ceil(cx + r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
  const int y1 = std::min(mask.height() - 1, static_cast<int>(std::ceil(cy + r)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      if (dx * dx + dy * dy <= r * r) mask.set(x, y);
    }
  }
}

bool overlaps(const BinaryMask& a, const BinaryMask& b) {
  for (std::size_t i = 0; i < a.bits().size(); ++i) {
    if (a.test(i) && b.test(i)) return true;
  }
  return false;
}

BinaryMask class_mask(const LabelMap& map, ClassId id) {
  BinaryMask out(map.extent());
  for (std::size_t i = 0; i < map.labels().size(); ++i) {
    if (map[i] == id) out.set(i);
  }
  return out;
}

}  // namespace

BinaryMask shape_mask(Extent extent, ShapeKind kind, int cx, int cy, int radius, SplitMix64& rng) {
  BinaryMask mask(extent);
  switch (kind) {
    case ShapeKind::Disk:
      paint_disk(mask, cx, cy, radius);
      break;
    case ShapeKind::Rectangle: {
      const int half_w = rng.uniform_int((radius * 3 + 4) / 5, radius);
      const int half_h = rng.uniform_int((radius * 3 + 4) / 5, radius);
      for (int y = std::max(0, cy - half_h); y <= std::min(extent.height - 1, cy + half_h); ++y) {
        for (int x = std::max(0, cx - half_w); x <= std::min(extent.width - 1, cx + half_w); ++x) mask.set(x, y);
      }
      break;
    }
    case ShapeKind::Blob: {
      paint_disk(mask, cx, cy, radius * 0.7);
      for (int k = 0; k < 2; ++k) {
        const double angle = rng.uniform() * 2.0 * 3.14159265358979323846;
        const double dist = radius * 0.45;
        paint_disk(mask, cx + dist * std::cos(angle), cy + dist * std::sin(angle), radius * 0.5);
      }
      break;
    }
  }
  return mask;
}

PointPrompt centroid_nearest_pixel(const BinaryMask& mask) {
  double sx = 0.0;
  double sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      sx += x;
      sy += y;
      ++n;
    }
  }
  if (n == 0) fail(ErrorCode::EmptyMask, "mask has no set bits");
  const double cx = sx / n;
  const double cy = sy / n;
  PointPrompt best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      const double d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      if (d < best_d) {
        best_d = d;
        best = {x, y, Polarity::Positive};
      }
    }
  }
  return best;
}

Scene generate_scene(const SceneSpec& spec) {
  require(spec.object_count >= 1 && spec.object_count <= 254, ErrorCode::InvalidArgument,
          "object_count must lie in [1, 254]");
  require(!spec.shapes.empty(), ErrorCode::InvalidArgument, "at least one shape kind is required");
  require(spec.min_radius >= 1 && spec.min_radius <= spec.max_radius, ErrorCode::InvalidArgument,
          "radius range is invalid");
  const auto& c = spec.corruption;
  require(c.dilate_px >= 0 && c.erode_px >= 0, ErrorCode::InvalidArgument, "corruption radii must be >= 0");
  require(c.boundary_noise_prob >= 0 && c.boundary_noise_prob <= 1 && c.drop_fragment_prob >= 0 &&
              c.drop_fragment_prob <= 1,
          ErrorCode::InvalidArgument, "corruption probabilities must lie in [0, 1]");

  const Extent extent{spec.width, spec.height};
  SplitMix64 rng(spec.seed);
  BinaryMask occupied(extent);
  std::vector<std::pair<ClassId, BinaryMask>> objects;
  std::vector<ShapeKind> kinds;

  for (int k = 1; k <= spec.object_count; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
      const ShapeKind kind = spec.shapes[rng.uniform_int(0, static_cast<int>(spec.shapes.size()) - 1)];
      const int radius = rng.uniform_int(spec.min_radius, spec.max_radius);
      if (2 * radius + 1 > spec.width || 2 * radius + 1 > spec.height) continue;
      const int cx = rng.uniform_int(radius, spec.width - 1 - radius);
      const int cy = rng.uniform_int(radius, spec.height - 1 - radius);
      BinaryMask mask = shape_mask(extent, kind, cx, cy, radius, rng);
      if (mask.empty()) continue;
      if (!objects.empty() && overlaps(kernels::dilate(occupied, spec.separation_px), mask)) continue;
      for (std::size_t i = 0; i < mask.bits().size(); ++i) {
        if (mask.test(i)) occupied.set(i);
      }
      objects.emplace_back(static_cast<ClassId>(k), std::move(mask));
      kinds.push_back(kind);
      placed = true;
    }
    if (!placed) {
      fail(ErrorCode::PlacementFailure, "could not place object " + std::to_string(k) + " after " +
                                            std::to_string(spec.max_attempts) + " attempts");
    }
  }

  seg::OracleScene oracle(extent, objects);
  const LabelMap& gt = oracle.labels();

  // Shape corruption: erode then dilate each object, claiming background only.
  std::vector<BinaryMask> reach;  // ground-truth dilation per object
  LabelMap coarse(extent, kBackgroundId);
  for (const auto& [id, mask] : objects) reach.push_back(kernels::dilate(mask, c.dilate_px));
  for (const auto& [id, mask] : objects) {
    const BinaryMask grown = kernels::dilate(kernels::erode(mask, c.erode_px), c.dilate_px);
    for (std::size_t i = 0; i < grown.bits().size(); ++i) {
      if (!grown.test(i)) continue;
      if ((gt[i] == kBackgroundId && coarse[i] == kBackgroundId) || gt[i] == id) coarse.set(i, id);
    }
  }

  if (c.boundary_noise_prob > 0.0) {
    const LabelMap snapshot = coarse;
    constexpr int dx[] = {1, -1, 0, 0};
    constexpr int dy[] = {0, 0, 1, -1};
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        std::array<ClassId, 4> other{};
        int n = 0;
        for (int k = 0; k < 4; ++k) {
          const int nx = x + dx[k];
          const int ny = y + dy[k];
          if (!extent.contains(nx, ny)) continue;
          const ClassId l = snapshot.at(nx, ny);
          if (l != snapshot.at(x, y)) other[n++] = l;
        }
        if (n == 0 || !rng.bernoulli(c.boundary_noise_prob)) continue;
        const ClassId target = other[rng.uniform_int(0, n - 1)];
        if (target != kBackgroundId && !reach[target - 1].at(x, y)) continue;
        coarse.set(x, y, target);
      }
    }
  }

  if (c.drop_fragment_prob > 0.0) {
    for (const auto& [id, mask] : objects) {
      const auto centre = centroid_nearest_pixel(mask);
      for (int quadrant = 0; quadrant < 4; ++quadrant) {
        if (!rng.bernoulli(c.drop_fragment_prob)) continue;
        for (int y = 0; y < spec.height; ++y) {
          for (int x = 0; x < spec.width; ++x) {
            const int q = (x >= centre.x ? 1 : 0) + (y >= centre.y ? 2 : 0);
            if (q == quadrant && coarse.at(x, y) == id) coarse.set(x, y, kBackgroundId);
          }
        }
      }
    }
  }

  for (const auto& [id, mask] : objects) {
    if (!class_mask(coarse, id).empty()) continue;
    const auto p = centroid_nearest_pixel(mask);
    coarse.set(p.x, p.y, id);
  }

  Image image = oracle.image();
  return {std::move(image), gt, std::move(coarse), std::move(oracle), std::move(kinds)};
}

}  // namespace uosam::synth
