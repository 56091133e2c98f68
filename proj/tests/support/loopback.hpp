#pragma once

// In-process protocol server around any backend, so the bridge client can
// be exercised without the external server.

#include <memory>
#include <string>
#include <thread>

#include "uosam/bridge.hpp"
#include "uosam/framing.hpp"
#include "uosam/segmenter.hpp"

namespace uosam::testing {

/// Answers ping/embed/decode until the source reaches end of stream.
/// Embeddings are kept per connection, keyed by the backend's embedding_id.
void serve(wire::ByteSource& source, wire::ByteSink& sink, seg::SegmenterBackend& backend);

/// A socketpair with serve() running on one end in a background thread.
class LoopbackServer {
 public:
  explicit LoopbackServer(std::shared_ptr<seg::SegmenterBackend> backend);
  ~LoopbackServer();
  LoopbackServer(const LoopbackServer&) = delete;
  LoopbackServer& operator=(const LoopbackServer&) = delete;

  /// The client end; callable once.
  std::unique_ptr<bridge::Connection> take_client();

 private:
  std::shared_ptr<seg::SegmenterBackend> backend_;
  std::unique_ptr<bridge::Connection> client_;
  std::thread thread_;
};

/// Listens on 127.0.0.1 (ephemeral port) and serves one connection.
class TcpLoopbackServer {
 public:
  explicit TcpLoopbackServer(std::shared_ptr<seg::SegmenterBackend> backend);
  ~TcpLoopbackServer();
  TcpLoopbackServer(const TcpLoopbackServer&) = delete;
  TcpLoopbackServer& operator=(const TcpLoopbackServer&) = delete;

  int port() const { return port_; }

 private:
  std::shared_ptr<seg::SegmenterBackend> backend_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace uosam::testing
