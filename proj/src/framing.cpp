#include "uosam/framing.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <string>

namespace uosam::wire {

namespace {

// Fills `out` completely; returns the number of bytes read before EOF.
std::size_t read_fully(ByteSource& source, std::span<std::uint8_t> out) {
  std::size_t got = 0;
  while (got < out.size()) {
    const std::size_t n = source.read_some(out.subspan(got));
    if (n == 0) break;
    got += n;
  }
  return got;
}

}  // namespace

std::size_t MemorySource::read_some(std::span<std::uint8_t> out) {
  const std::size_t n = std::min(out.size(), data_.size() - pos_);
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(pos_), n, out.begin());
  pos_ += n;
  return n;
}

void put_u32_le(Bytes& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t get_u32_le(std::span<const std::uint8_t> in) {
  return static_cast<std::uint32_t>(in[0]) | (static_cast<std::uint32_t>(in[1]) << 8) |
         (static_cast<std::uint32_t>(in[2]) << 16) | (static_cast<std::uint32_t>(in[3]) << 24);
}

Bytes encode_frame(std::span<const std::uint8_t> payload) {
  if (payload.size() > std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::Oversize, "payload of " + std::to_string(payload.size()) + " bytes exceeds u32 length");
  }
  Bytes out;
  out.reserve(payload.size() + 4);
  put_u32_le(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::optional<Bytes> try_decode_frame(ByteSource& source, std::size_t max_payload) {
  std::array<std::uint8_t, 4> header{};
  const std::size_t got = read_fully(source, header);
  if (got == 0) return std::nullopt;
  if (got < header.size()) fail(ErrorCode::Truncated, "stream ended inside frame header");
  const std::uint32_t length = get_u32_le(header);
  if (length > max_payload) {
    fail(ErrorCode::Oversize, "frame length " + std::to_string(length) + " exceeds cap " + std::to_string(max_payload));
  }
  Bytes payload(length);
  if (read_fully(source, payload) < length) fail(ErrorCode::Truncated, "stream ended inside frame payload");
  return payload;
}

Bytes decode_frame(ByteSource& source, std::size_t max_payload) {
  auto frame = try_decode_frame(source, max_payload);
  if (!frame) fail(ErrorCode::Truncated, "stream ended before frame header");
  return std::move(*frame);
}

void write_frame(ByteSink& sink, std::span<const std::uint8_t> payload) {
  if (payload.size() > std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::Oversize, "payload exceeds u32 length");
  }
  Bytes header;
  put_u32_le(header, static_cast<std::uint32_t>(payload.size()));
  sink.write_all(header);
  sink.write_all(payload);
}

}  // namespace uosam::wire
