#include "loopback.hpp"

#include <map>

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "uosam/protocol.hpp"

namespace uosam::testing {

namespace {

void handle(const wire::Json& msg, wire::ByteSource& source, wire::ByteSink& sink, seg::SegmenterBackend& backend,
            std::map<std::string, FeatureMap>& embeddings) {
  const std::string op = msg.value("op", "");
  if (op == "ping") {
    wire::send_json(sink, {{"ok", true}});
    return;
  }
  if (op == "embed") {
    const int w = msg.at("width").get<int>();
    const int h = msg.at("height").get<int>();
    const auto pixels = wire::recv_payload(source, msg.at("payload_bytes").get<std::size_t>());
    const FeatureMap f = backend.embed(Image(w, h, pixels));
    const auto bytes = wire::encode_f32_le(f.data());
    wire::send_json(sink, {{"ok", true},
                           {"embedding_id", f.embedding_id()},
                           {"height", f.rows()},
                           {"width", f.cols()},
                           {"channels", f.channels()},
                           {"stride", f.stride()},
                           {"image_width", f.image_extent().width},
                           {"image_height", f.image_extent().height},
                           {"payload_bytes", bytes.size()}});
    wire::write_frame(sink, bytes);
    embeddings.insert_or_assign(f.embedding_id(), f);
    return;
  }
  if (op == "decode") {
    auto call = wire::read_decode_call(msg, source);
    const FeatureMap* features = nullptr;
    if (call.inline_features) {
      features = &*call.features;
    } else if (auto it = embeddings.find(call.embedding_id); it != embeddings.end()) {
      features = &it->second;
    } else {
      wire::send_json(sink, wire::error_reply("unknown_embedding", call.embedding_id));
      return;
    }
    std::vector<MaskProposal> proposals;
    try {
      proposals = backend.decode({*features, call.prompts, call.k});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoObject) {
        wire::send_json(sink, wire::error_reply("no_object"));
        return;
      }
      throw;
    }
    std::vector<double> scores;
    for (const auto& p : proposals) scores.push_back(p.score);
    wire::send_json(sink, {{"ok", true},
                           {"k", proposals.size()},
                           {"scores", scores},
                           {"width", call.image.width},
                           {"height", call.image.height},
                           {"payload_bytes", call.image.area()}});
    for (const auto& p : proposals) wire::write_frame(sink, wire::mask_bytes(p.mask));
    return;
  }
  wire::send_json(sink, wire::error_reply("unknown_op", op));
}

}  // namespace

void serve(wire::ByteSource& source, wire::ByteSink& sink, seg::SegmenterBackend& backend) {
  std::map<std::string, FeatureMap> embeddings;
  for (;;) {
    std::optional<wire::Bytes> frame;
    try {
      frame = wire::try_decode_frame(source);
    } catch (const Error&) {
      return;
    }
    if (!frame) return;
    try {
      const auto msg = wire::Json::parse(frame->begin(), frame->end());
      handle(msg, source, sink, backend, embeddings);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Truncated) return;
      wire::send_json(sink, wire::error_reply("bad_request", e.what()));
    } catch (const std::exception& e) {
      wire::send_json(sink, wire::error_reply("bad_request", e.what()));
    }
  }
}

LoopbackServer::LoopbackServer(std::shared_ptr<seg::SegmenterBackend> backend) : backend_(std::move(backend)) {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) fail(ErrorCode::Io, "socketpair failed");
  client_ = std::make_unique<bridge::FdConnection>(fds[0], fds[0]);
  const int server_fd = fds[1];
  thread_ = std::thread([this, server_fd] {
    bridge::FdConnection conn(server_fd, server_fd);
    try {
      serve(conn, conn, *backend_);
    } catch (const std::exception&) {
    }
  });
}

LoopbackServer::~LoopbackServer() {
  client_.reset();
  if (thread_.joinable()) thread_.join();
}

std::unique_ptr<bridge::Connection> LoopbackServer::take_client() { return std::move(client_); }

TcpLoopbackServer::TcpLoopbackServer(std::shared_ptr<seg::SegmenterBackend> backend) : backend_(std::move(backend)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (listen_fd_ < 0 || ::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 1) != 0) {
    fail(ErrorCode::Io, "cannot listen on loopback");
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  thread_ = std::thread([this] {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) return;
    bridge::FdConnection conn(fd, fd);
    try {
      serve(conn, conn, *backend_);
    } catch (const std::exception&) {
    }
  });
}

TcpLoopbackServer::~TcpLoopbackServer() {
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (thread_.joinable()) thread_.join();
  ::close(listen_fd_);
}

}  // namespace uosam::testing
