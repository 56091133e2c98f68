#pragma once

// Client side of the bridge protocol (see protocol.hpp) over a child
// process's stdio or a TCP socket.

#include <memory>
#include <mutex>
#include <string>

#include <sys/types.h>

#include "uosam/framing.hpp"
#include "uosam/protocol.hpp"
#include "uosam/segmenter.hpp"

namespace uosam::bridge {

class Connection : public wire::ByteSource, public wire::ByteSink {};

/// Owns a pair of file descriptors (possibly the same socket) and optionally
/// a child process that is reaped on destruction.
class FdConnection final : public Connection {
 public:
  FdConnection(int read_fd, int write_fd, pid_t child = -1);
  ~FdConnection() override;
  FdConnection(const FdConnection&) = delete;
  FdConnection& operator=(const FdConnection&) = delete;

  std::size_t read_some(std::span<std::uint8_t> out) override;
  void write_all(std::span<const std::uint8_t> data) override;

 private:
  int read_fd_;
  int write_fd_;
  pid_t child_;
};

std::unique_ptr<Connection> connect_tcp(const std::string& host, int port);

/// Runs `command` through /bin/sh with its stdin/stdout wired to the connection.
std::unique_ptr<Connection> spawn_stdio(const std::string& command);

struct BridgeAddress {
  enum class Kind { Stdio, Tcp };
  Kind kind = Kind::Tcp;
  std::string command;
  std::string host;
  int port = 0;

  /// Accepts "stdio:<command>", "tcp:<host>:<port>" or bare "<host>:<port>".
  static BridgeAddress parse(const std::string& text);
  std::unique_ptr<Connection> open() const;
};

struct BridgeOptions {
  /// Re-send features with every decode instead of referencing embedding_id.
  bool inline_features = false;
  std::size_t max_frame = wire::kDefaultMaxFrame;
};

class BridgeBackend final : public seg::SegmenterBackend {
 public:
  explicit BridgeBackend(std::unique_ptr<Connection> connection, BridgeOptions options = {});

  std::string name() const override { return "bridge"; }
  int max_concurrent_requests() const override { return 1; }
  FeatureMap embed(const Image& image) override;
  std::vector<MaskProposal> decode(const seg::DecodeRequest& request) override;

  /// True when the server answers {"ok":true}.
  bool ping();

 private:
  wire::Json call(const wire::Json& request);
  wire::Json check(wire::Json reply);

  std::unique_ptr<Connection> connection_;
  BridgeOptions options_;
  std::mutex mutex_;
};

}  // namespace uosam::bridge
