#pragma once

// Feature tensors on disk: "UOFT", u32 version (1), u32 ndim, ndim x u32
// dims, then little-endian f32 data. All integers little-endian.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "uosam/core.hpp"
#include "uosam/framing.hpp"

namespace uosam::tensor_io {

inline constexpr std::uint32_t kVersion = 1;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

wire::Bytes encode(const Tensor& tensor);
Tensor decode(std::span<const std::uint8_t> bytes);

void save(const std::filesystem::path& path, const Tensor& tensor);
Tensor load(const std::filesystem::path& path);

/// (H, W, C) tensor of the feature data.
Tensor from_features(const FeatureMap& features);
FeatureMap to_features(const Tensor& tensor, double stride, Extent image);

}  // namespace uosam::tensor_io
