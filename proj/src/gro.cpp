#include "uosam/gro.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <numeric>
#include <optional>

#include <omp.h>

#include "uosam/lro.hpp"
#include "uosam/maskops.hpp"

namespace uosam::gro {

std::vector<std::pair<int, int>> generate_grid(const GridSpec& spec) {
  spec.validate();
  const int n = spec.points_per_side;
  std::vector<long> coord(n);
  for (int i = 0; i < n; ++i) coord[i] = std::lround(spec.offset + i * spec.spacing);
  std::vector<std::pair<int, int>> points;
  points.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) points.emplace_back(static_cast<int>(coord[i]), static_cast<int>(coord[j]));
  }
  return points;
}

std::vector<CropBox> generate_crop_boxes(int width, int height, int layers, double overlap) {
  require(width >= 1 && height >= 1, ErrorCode::InvalidArgument, "image dims must be >= 1");
  require(layers >= 1, ErrorCode::InvalidArgument, "layers must be >= 1");
  require(layers <= 12, ErrorCode::InvalidArgument, "layers must be <= 12");
  require(overlap >= 0.0 && overlap < 1.0, ErrorCode::InvalidArgument, "overlap must lie in [0, 1)");

  std::vector<CropBox> boxes{{{0, 0, width - 1, height - 1}, 0, 0, 0}};
  auto starts = [overlap](int side, int n) {
    const int tile = std::min(side, static_cast<int>(std::ceil(static_cast<double>(side) / n * (1.0 + overlap))));
    std::vector<std::pair<int, int>> spans;
    for (int i = 0; i < n; ++i) {
      const int start = n == 1 ? 0 : static_cast<int>(static_cast<long>(i) * (side - tile) / (n - 1));
      spans.emplace_back(start, start + tile - 1);
    }
    return spans;
  };
  for (int layer = 1; layer < layers; ++layer) {
    const int n = 1 << layer;
    const auto xs = starts(width, n);
    const auto ys = starts(height, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        boxes.push_back({{xs[c].first, ys[r].first, xs[c].second, ys[r].second}, layer, r, c});
      }
    }
  }
  return boxes;
}

std::vector<std::pair<int, int>> grid_for_crop(const std::vector<std::pair<int, int>>& grid, Extent image,
                                               const CropBox& crop) {
  const long cw = crop.region.width();
  const long ch = crop.region.height();
  std::vector<std::pair<int, int>> out;
  out.reserve(grid.size());
  for (const auto& [x, y] : grid) {
    if (!image.contains(x, y)) continue;
    out.emplace_back(static_cast<int>(x * cw / image.width), static_cast<int>(y * ch / image.height));
  }
  return out;
}

namespace {

BinaryMask paste(const BinaryMask& crop_mask, Extent image, const BoxPrompt& region) {
  BinaryMask full(image);
  for (int y = 0; y < crop_mask.height(); ++y) {
    for (int x = 0; x < crop_mask.width(); ++x) {
      if (crop_mask.at(x, y)) full.set(region.x_min + x, region.y_min + y);
    }
  }
  return full;
}

}  // namespace

GlobalProposalSet image_wide_segment(seg::SegmenterBackend& backend, const Image& image, const GridSpec& spec,
                                     const std::vector<CropBox>& crops, const GroOptions& options) {
  require(options.nms_iou >= 0.0 && options.nms_iou <= 1.0, ErrorCode::InvalidArgument, "nms_iou must lie in [0, 1]");
  const auto grid = generate_grid(spec);
  int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
  threads = std::max(1, std::min(threads, backend.max_concurrent_requests()));

  std::vector<MaskProposal> pool;
  for (const auto& crop : crops) {
    validate_box(crop.region, image.extent());
    const bool full = crop.region == BoxPrompt{0, 0, image.width() - 1, image.height() - 1};
    const Image view = full ? image : image.crop(crop.region.x_min, crop.region.y_min, crop.region.x_max,
                                                 crop.region.y_max);
    const FeatureMap features = backend.embed(view);
    const auto points = grid_for_crop(grid, image.extent(), crop);

    std::vector<std::optional<MaskProposal>> best(points.size());
    std::vector<std::exception_ptr> errors(points.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (std::size_t k = 0; k < points.size(); ++k) {
      try {
        PromptSet prompts;
        prompts.points = {{points[k].first, points[k].second, Polarity::Positive}};
        const auto proposals = backend.decode({features, std::move(prompts), options.proposals_requested});
        best[k] = lro::best_proposal(proposals);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoObject) errors[k] = std::current_exception();
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
    for (auto& p : best) {
      if (!p || p->score < options.min_score || p->mask.empty()) continue;
      if (p->mask.extent() != view.extent()) fail(ErrorCode::BackendFailure, "decoder mask size != crop size");
      pool.push_back({full ? std::move(p->mask) : paste(p->mask, image.extent(), crop.region), p->score});
    }
  }
  return {maskops::nms_filter(pool, options.nms_iou)};
}

LabelMap category_vote_fuse(const GlobalProposalSet& global, const LabelMap& lro_map) {
  for (const auto& p : global.proposals) {
    require(p.mask.extent() == lro_map.extent(), ErrorCode::DimensionMismatch, "proposal size != label map size");
  }
  std::vector<std::size_t> order(global.proposals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return global.proposals[a].score > global.proposals[b].score;
  });

  LabelMap fused = lro_map;
  std::vector<std::uint8_t> claimed(lro_map.extent().area(), 0);
  const auto labels = lro_map.labels();
  for (std::size_t idx : order) {
    const auto bits = global.proposals[idx].mask.bits();
    std::array<std::size_t, 256> votes{};
    bool any = false;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (!bits[i] || labels[i] == lro_map.ignore_id()) continue;
      ++votes[labels[i]];
      any = true;
    }
    if (!any) continue;
    const auto winner = static_cast<ClassId>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (!bits[i] || claimed[i]) continue;
      claimed[i] = 1;
      fused.set(i, winner);
    }
  }
  return fused;
}

}  // namespace uosam::gro
