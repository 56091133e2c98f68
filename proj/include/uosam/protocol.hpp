#pragma once

// JSON message layer of the bridge protocol.
//
// Every frame payload is a UTF-8 JSON object, except raw tensor frames. A
// message announcing a tensor carries "payload_bytes" and is followed by
// exactly one raw frame of that size. Features travel as little-endian f32
// in row-major (H, W, C) order; masks as one 0/1 byte per pixel.
//
//   ping    -> {"ok":true}
//   embed   {width, height, channels:3, payload_bytes} + RGB frame
//           -> {ok, embedding_id, height, width, channels, stride,
//               image_width, image_height, payload_bytes} + feature frame
//   decode  {embedding_id | inline:true + features:{height, width, channels,
//            stride, payload_bytes}, image_width, image_height, k,
//            points:[{x, y, label}], box?:[x0, y0, x1, y1],
//            mask_prompt:bool, payload_bytes?}
//           + [feature frame if inline] + [mask frame if mask_prompt]
//           -> {ok, k, scores:[...], width, height, payload_bytes} + k mask frames
//   errors  -> {"error": code, "detail"?: text}

#include <string>
#include <vector>

#include <json.hpp>

#include "uosam/core.hpp"
#include "uosam/framing.hpp"

namespace uosam::wire {

using Json = nlohmann::json;

void send_json(ByteSink& sink, const Json& message);
Json recv_json(ByteSource& source, std::size_t max_payload = kDefaultMaxFrame);

/// Reads the raw frame announced by `payload_bytes`; BackendFailure when the
/// frame size differs from the announcement.
Bytes recv_payload(ByteSource& source, std::size_t expected, std::size_t max_payload = kDefaultMaxFrame);

Bytes encode_f32_le(std::span<const float> values);
std::vector<float> decode_f32_le(std::span<const std::uint8_t> bytes);

Bytes mask_bytes(const BinaryMask& mask);
BinaryMask mask_from_bytes(Extent extent, std::span<const std::uint8_t> bytes);

Json prompts_to_json(const PromptSet& prompts);
/// Points and box only; the mask prompt travels as its own frame.
PromptSet prompts_from_json(const Json& message);

Json error_reply(const std::string& code, const std::string& detail = {});

/// Decode-side view of an incoming request, shared by servers and tests.
struct DecodeCall {
  std::string embedding_id;
  bool inline_features = false;
  std::optional<FeatureMap> features;
  Extent image;
  int k = 3;
  PromptSet prompts;
};

/// Consumes the decode JSON plus its trailing frames.
DecodeCall read_decode_call(const Json& message, ByteSource& source, std::size_t max_payload = kDefaultMaxFrame);

}  // namespace uosam::wire
