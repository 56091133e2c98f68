#pragma once

// Length-prefixed framing: u32 little-endian payload length, then payload.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "uosam/error.hpp"

namespace uosam::wire {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kDefaultMaxFrame = std::size_t{256} << 20;

class ByteSource {
 public:
  virtual ~ByteSource() = default;
  /// Reads up to out.size() bytes; returns 0 only at end of stream.
  virtual std::size_t read_some(std::span<std::uint8_t> out) = 0;
};

class ByteSink {
 public:
  virtual ~ByteSink() = default;
  virtual void write_all(std::span<const std::uint8_t> data) = 0;
};

class MemorySource final : public ByteSource {
 public:
  explicit MemorySource(std::span<const std::uint8_t> data) : data_(data) {}
  std::size_t read_some(std::span<std::uint8_t> out) override;
  std::size_t consumed() const { return pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

class MemorySink final : public ByteSink {
 public:
  void write_all(std::span<const std::uint8_t> data) override { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
  const Bytes& bytes() const { return bytes_; }

 private:
  Bytes bytes_;
};

/// Throws Oversize when the payload does not fit a u32 length.
Bytes encode_frame(std::span<const std::uint8_t> payload);

/// Reads exactly 4 + length bytes. Throws Truncated if the stream ends
/// early and Oversize if the declared length exceeds max_payload (the
/// payload is not consumed in that case).
Bytes decode_frame(ByteSource& source, std::size_t max_payload = kDefaultMaxFrame);

/// Like decode_frame, but a stream that ends before the first header byte
/// yields nullopt instead of Truncated.
std::optional<Bytes> try_decode_frame(ByteSource& source, std::size_t max_payload = kDefaultMaxFrame);

void write_frame(ByteSink& sink, std::span<const std::uint8_t> payload);

void put_u32_le(Bytes& out, std::uint32_t v);
std::uint32_t get_u32_le(std::span<const std::uint8_t> in);

}  // namespace uosam::wire
