#include "uosam/protocol.hpp"

#include <bit>
#include <cstring>

namespace uosam::wire {

namespace {

template <typename T>
T field(const Json& message, const char* key) {
  if (!message.contains(key)) fail(ErrorCode::BackendFailure, std::string("message lacks field '") + key + "'");
  try {
    return message.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::BackendFailure, std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace

void send_json(ByteSink& sink, const Json& message) {
  const std::string text = message.dump();
  write_frame(sink, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Json recv_json(ByteSource& source, std::size_t max_payload) {
  const Bytes frame = decode_frame(source, max_payload);
  Json message = Json::parse(frame.begin(), frame.end(), nullptr, false);
  if (message.is_discarded() || !message.is_object()) fail(ErrorCode::BackendFailure, "frame is not a JSON object");
  return message;
}

Bytes recv_payload(ByteSource& source, std::size_t expected, std::size_t max_payload) {
  Bytes frame = decode_frame(source, max_payload);
  if (frame.size() != expected) {
    fail(ErrorCode::BackendFailure,
         "payload frame has " + std::to_string(frame.size()) + " bytes, announced " + std::to_string(expected));
  }
  return frame;
}

Bytes encode_f32_le(std::span<const float> values) {
  Bytes out;
  out.reserve(values.size() * 4);
  for (float v : values) put_u32_le(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

std::vector<float> decode_f32_le(std::span<const std::uint8_t> bytes) {
  require(bytes.size() % 4 == 0, ErrorCode::BackendFailure, "f32 payload not a multiple of 4 bytes");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::bit_cast<float>(get_u32_le(bytes.subspan(i * 4, 4)));
  return out;
}

Bytes mask_bytes(const BinaryMask& mask) { return Bytes(mask.bits().begin(), mask.bits().end()); }

BinaryMask mask_from_bytes(Extent extent, std::span<const std::uint8_t> bytes) {
  require(bytes.size() == extent.area(), ErrorCode::BackendFailure, "mask payload size != width*height");
  return BinaryMask(extent, Bytes(bytes.begin(), bytes.end()));
}

Json prompts_to_json(const PromptSet& prompts) {
  Json out = Json::object();
  Json points = Json::array();
  for (const auto& p : prompts.points) {
    points.push_back({{"x", p.x}, {"y", p.y}, {"label", p.polarity == Polarity::Positive ? 1 : 0}});
  }
  out["points"] = std::move(points);
  if (prompts.box) out["box"] = {prompts.box->x_min, prompts.box->y_min, prompts.box->x_max, prompts.box->y_max};
  out["mask_prompt"] = prompts.mask_prompt.has_value();
  return out;
}

PromptSet prompts_from_json(const Json& message) {
  PromptSet prompts;
  if (message.contains("points")) {
    for (const auto& p : message.at("points")) {
      prompts.points.push_back({field<int>(p, "x"), field<int>(p, "y"),
                                field<int>(p, "label") != 0 ? Polarity::Positive : Polarity::Negative});
    }
  }
  if (message.contains("box") && !message.at("box").is_null()) {
    const auto b = message.at("box").get<std::vector<int>>();
    require(b.size() == 4, ErrorCode::BackendFailure, "box must have 4 coordinates");
    prompts.box = BoxPrompt{b[0], b[1], b[2], b[3]};
  }
  return prompts;
}

Json error_reply(const std::string& code, const std::string& detail) {
  Json out = {{"error", code}};
  if (!detail.empty()) out["detail"] = detail;
  return out;
}

DecodeCall read_decode_call(const Json& message, ByteSource& source, std::size_t max_payload) {
  DecodeCall call;
  call.image = {field<int>(message, "image_width"), field<int>(message, "image_height")};
  call.k = message.value("k", 3);
  call.prompts = prompts_from_json(message);
  call.inline_features = message.value("inline", false);
  if (call.inline_features) {
    const Json& f = message.at("features");
    const int rows = field<int>(f, "height");
    const int cols = field<int>(f, "width");
    const int channels = field<int>(f, "channels");
    const auto bytes = recv_payload(source, field<std::size_t>(f, "payload_bytes"), max_payload);
    call.features.emplace(rows, cols, channels, decode_f32_le(bytes), field<double>(f, "stride"), call.image,
                          message.value("embedding_id", std::string{}));
  } else {
    call.embedding_id = field<std::string>(message, "embedding_id");
  }
  if (message.value("mask_prompt", false)) {
    const auto bytes = recv_payload(source, field<std::size_t>(message, "payload_bytes"), max_payload);
    call.prompts.mask_prompt = mask_from_bytes(call.image, bytes);
  }
  return call;
}

}  // namespace uosam::wire
