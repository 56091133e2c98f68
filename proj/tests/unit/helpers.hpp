#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "uosam/segmenter.hpp"

namespace uosam::testing {

/// Forwards to another backend and counts calls.
class CountingBackend final : public seg::SegmenterBackend {
 public:
  explicit CountingBackend(seg::SegmenterBackend& inner) : inner_(inner) {}

  std::string name() const override { return "counting"; }
  int max_concurrent_requests() const override { return inner_.max_concurrent_requests(); }
  FeatureMap embed(const Image& image) override {
    ++embeds;
    return inner_.embed(image);
  }
  std::vector<MaskProposal> decode(const seg::DecodeRequest& request) override {
    ++decodes;
    return inner_.decode(request);
  }

  std::atomic<int> embeds{0};
  std::atomic<int> decodes{0};

 private:
  seg::SegmenterBackend& inner_;
};

/// Fresh directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("uosam_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline BinaryMask rect_mask(Extent e, int x0, int y0, int x1, int y1) {
  BinaryMask m(e);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) m.set(x, y);
  }
  return m;
}

inline BinaryMask disk_mask(Extent e, int cx, int cy, int r) {
  BinaryMask m(e);
  for (int y = 0; y < e.height; ++y) {
    for (int x = 0; x < e.width; ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.set(x, y);
    }
  }
  return m;
}

}  // namespace uosam::testing
