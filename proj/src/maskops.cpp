#include "uosam/maskops.hpp"

#include <algorithm>
#include <numeric>

#include "uosam/kernels.hpp"

namespace uosam::maskops {

namespace {

class DisjointSet {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<int> parent_;
};

struct Pooled {
  const BinaryMask* mask;
  std::size_t count;
  std::optional<BoxPrompt> bbox;
};

double pooled_iou(const Pooled& a, const Pooled& b) {
  if (a.count == 0 && b.count == 0) return 1.0;
  if (!a.bbox || !b.bbox) return 0.0;
  const int x0 = std::max(a.bbox->x_min, b.bbox->x_min);
  const int y0 = std::max(a.bbox->y_min, b.bbox->y_min);
  const int x1 = std::min(a.bbox->x_max, b.bbox->x_max);
  const int y1 = std::min(a.bbox->y_max, b.bbox->y_max);
  std::size_t inter = 0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (a.mask->at(x, y) && b.mask->at(x, y)) ++inter;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.count + b.count - inter);
}

}  // namespace

std::vector<Component> connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> label(mask.bits().size(), -1);
  DisjointSet sets;

  // First pass: provisional labels from already-visited neighbours.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      int current = -1;
      auto link = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w) return;
        const int n = label[static_cast<std::size_t>(ny) * w + nx];
        if (n < 0) return;
        if (current < 0) {
          current = n;
        } else {
          sets.unite(current, n);
        }
      };
      link(x - 1, y);
      link(x, y - 1);
      if (connectivity == Connectivity::Eight) {
        link(x - 1, y - 1);
        link(x + 1, y - 1);
      }
      label[static_cast<std::size_t>(y) * w + x] = current < 0 ? sets.make() : current;
    }
  }

  // Second pass: resolve roots in first-pixel order.
  std::vector<int> root_to_component;
  std::vector<Component> components;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y) * w + x;
      if (label[i] < 0) continue;
      const int root = sets.find(label[i]);
      if (static_cast<std::size_t>(root) >= root_to_component.size()) root_to_component.resize(root + 1, -1);
      int& slot = root_to_component[root];
      if (slot < 0) {
        slot = static_cast<int>(components.size());
        Component c;
        c.mask = BinaryMask(mask.extent());
        c.bbox = {x, y, x, y};
        c.first_x = x;
        c.first_y = y;
        components.push_back(std::move(c));
      }
      auto& c = components[slot];
      c.mask.set(i);
      ++c.pixel_count;
      c.bbox.x_min = std::min(c.bbox.x_min, x);
      c.bbox.x_max = std::max(c.bbox.x_max, x);
      c.bbox.y_max = std::max(c.bbox.y_max, y);
    }
  }

  // Components were created in first-pixel order, so a stable sort keeps
  // that order among equal sizes.
  std::stable_sort(components.begin(), components.end(),
                   [](const Component& a, const Component& b) { return a.pixel_count > b.pixel_count; });
  for (std::size_t k = 0; k < components.size(); ++k) components[k].id = static_cast<int>(k);
  return components;
}

Component largest_component_containing(const BinaryMask& mask, const PointPrompt& point, Connectivity connectivity) {
  require(mask.extent().contains(point.x, point.y), ErrorCode::InvalidArgument, "point outside mask");
  auto components = connected_components(mask, connectivity);
  if (components.empty()) fail(ErrorCode::EmptyMask, "mask has no set bits");
  if (mask.at(point.x, point.y)) {
    for (auto& c : components) {
      if (c.mask.at(point.x, point.y)) return std::move(c);
    }
  }
  return std::move(components.front());
}

std::optional<BoxPrompt> bounding_box(const BinaryMask& mask) {
  std::optional<BoxPrompt> box;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      if (!box) {
        box = BoxPrompt{x, y, x, y};
      } else {
        box->x_min = std::min(box->x_min, x);
        box->x_max = std::max(box->x_max, x);
        box->y_max = y;
      }
    }
  }
  return box;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  require(a.extent() == b.extent(), ErrorCode::DimensionMismatch, "mask_iou: dimensions differ");
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto ab = a.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    inter += (ab[i] & bb[i]);
    uni += (ab[i] | bb[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<MaskProposal> nms_filter(const std::vector<MaskProposal>& proposals, double iou_threshold) {
  require(iou_threshold >= 0.0 && iou_threshold <= 1.0, ErrorCode::InvalidArgument,
          "iou_threshold must lie in [0, 1]");
  if (proposals.empty()) return {};
  const Extent extent = proposals.front().mask.extent();
  for (const auto& p : proposals) {
    require(p.mask.extent() == extent, ErrorCode::DimensionMismatch, "nms_filter: proposal sizes differ");
  }

  std::vector<std::size_t> order(proposals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return proposals[a].score > proposals[b].score; });

  std::vector<Pooled> kept_info;
  std::vector<MaskProposal> kept;
  for (std::size_t idx : order) {
    const auto& p = proposals[idx];
    Pooled info{&p.mask, p.mask.count(), bounding_box(p.mask)};
    const bool keep = std::all_of(kept_info.begin(), kept_info.end(),
                                  [&](const Pooled& k) { return pooled_iou(info, k) <= iou_threshold; });
    if (keep) {
      kept_info.push_back(info);
      kept.push_back(p);
    }
  }
  return kept;
}

BinaryMask boundary_band(const BinaryMask& mask, int band_px) { return kernels::boundary_band_parallel(mask, band_px); }

BinaryMask box_mask(Extent extent, const BoxPrompt& box) {
  validate_box(box, extent);
  BinaryMask out(extent);
  for (int y = box.y_min; y <= box.y_max; ++y) {
    for (int x = box.x_min; x <= box.x_max; ++x) out.set(x, y);
  }
  return out;
}

}  // namespace uosam::maskops
