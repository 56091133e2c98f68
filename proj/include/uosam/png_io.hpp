#pragma once

#include <filesystem>

#include "uosam/core.hpp"

namespace uosam::png_io {

/// Single-channel 8-bit (grey or palette indices) PNG as class IDs.
LabelMap read_label_map(const std::filesystem::path& path, ClassId ignore_id = kDefaultIgnoreId);
void write_label_map(const std::filesystem::path& path, const LabelMap& map);

/// Any 8/16-bit PNG converted to 8-bit RGB.
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& image);

}  // namespace uosam::png_io
