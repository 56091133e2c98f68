#include "uosam/bridge.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <netdb.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "uosam/protocol.hpp"

namespace uosam::bridge {

namespace {

[[noreturn]] void fail_errno(const std::string& what) {
  fail(ErrorCode::BackendFailure, what + ": " + std::strerror(errno));
}

}  // namespace

FdConnection::FdConnection(int read_fd, int write_fd, pid_t child)
    : read_fd_(read_fd), write_fd_(write_fd), child_(child) {}

FdConnection::~FdConnection() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  if (child_ > 0) {
    int status = 0;
    ::waitpid(child_, &status, 0);
  }
}

std::size_t FdConnection::read_some(std::span<std::uint8_t> out) {
  for (;;) {
    const ssize_t n = ::read(read_fd_, out.data(), out.size());
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno != EINTR) fail_errno("bridge read");
  }
}

void FdConnection::write_all(std::span<const std::uint8_t> data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    ssize_t n = ::send(write_fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) n = ::write(write_fd_, data.data() + sent, data.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail_errno("bridge write");
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::unique_ptr<Connection> connect_tcp(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &result); rc != 0) {
    fail(ErrorCode::BackendFailure, "resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(result);
  if (fd < 0) fail(ErrorCode::BackendFailure, "cannot connect to " + host + ":" + service);
  return std::make_unique<FdConnection>(fd, fd);
}

std::unique_ptr<Connection> spawn_stdio(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) fail_errno("pipe");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    fail_errno("pipe");
  }
  // A dead child must surface as a write error, not kill the caller.
  std::signal(SIGPIPE, SIG_IGN);
  const pid_t pid = ::fork();
  if (pid < 0) fail_errno("fork");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<FdConnection>(from_child[0], to_child[1], pid);
}

BridgeAddress BridgeAddress::parse(const std::string& text) {
  BridgeAddress address;
  if (text.rfind("stdio:", 0) == 0) {
    address.kind = Kind::Stdio;
    address.command = text.substr(6);
    require(!address.command.empty(), ErrorCode::Config, "stdio bridge needs a command");
    return address;
  }
  std::string rest = text.rfind("tcp:", 0) == 0 ? text.substr(4) : text;
  const auto colon = rest.rfind(':');
  require(colon != std::string::npos && colon > 0 && colon + 1 < rest.size(), ErrorCode::Config,
          "bridge address must be stdio:<cmd> or [tcp:]host:port");
  address.kind = Kind::Tcp;
  address.host = rest.substr(0, colon);
  try {
    std::size_t used = 0;
    address.port = std::stoi(rest.substr(colon + 1), &used);
    require(used == rest.size() - colon - 1, ErrorCode::Config, "bad bridge port");
  } catch (const std::logic_error&) {
    fail(ErrorCode::Config, "bad bridge port in '" + text + "'");
  }
  require(address.port > 0 && address.port < 65536, ErrorCode::Config, "bridge port out of range");
  return address;
}

std::unique_ptr<Connection> BridgeAddress::open() const {
  return kind == Kind::Stdio ? spawn_stdio(command) : connect_tcp(host, port);
}

BridgeBackend::BridgeBackend(std::unique_ptr<Connection> connection, BridgeOptions options)
    : connection_(std::move(connection)), options_(options) {
  require(connection_ != nullptr, ErrorCode::InvalidArgument, "bridge needs a connection");
}

wire::Json BridgeBackend::check(wire::Json reply) {
  if (reply.contains("error")) {
    const std::string code = reply.at("error").is_string() ? reply.at("error").get<std::string>() : "error";
    const std::string detail = reply.value("detail", std::string{});
    if (code == "no_object") fail(ErrorCode::NoObject, detail.empty() ? code : detail);
    fail(ErrorCode::BackendFailure, "server error '" + code + "'" + (detail.empty() ? "" : ": " + detail));
  }
  return reply;
}

wire::Json BridgeBackend::call(const wire::Json& request) {
  wire::send_json(*connection_, request);
  return check(wire::recv_json(*connection_, options_.max_frame));
}

bool BridgeBackend::ping() {
  std::lock_guard lock(mutex_);
  const auto reply = call({{"op", "ping"}});
  return reply.value("ok", false);
}

FeatureMap BridgeBackend::embed(const Image& image) {
  std::lock_guard lock(mutex_);
  const auto pixels = image.data();
  wire::send_json(*connection_, {{"op", "embed"},
                                 {"width", image.width()},
                                 {"height", image.height()},
                                 {"channels", 3},
                                 {"payload_bytes", pixels.size()}});
  wire::write_frame(*connection_, pixels);
  const auto reply = check(wire::recv_json(*connection_, options_.max_frame));
  try {
    const int rows = reply.at("height").get<int>();
    const int cols = reply.at("width").get<int>();
    const int channels = reply.at("channels").get<int>();
    const auto announced = reply.at("payload_bytes").get<std::size_t>();
    require(announced == static_cast<std::size_t>(rows) * cols * channels * 4, ErrorCode::BackendFailure,
            "embed reply payload_bytes != H*W*C*4");
    const auto bytes = wire::recv_payload(*connection_, announced, options_.max_frame);
    return FeatureMap(rows, cols, channels, wire::decode_f32_le(bytes), reply.at("stride").get<double>(),
                      {reply.value("image_width", image.width()), reply.value("image_height", image.height())},
                      reply.at("embedding_id").get<std::string>());
  } catch (const wire::Json::exception& e) {
    fail(ErrorCode::BackendFailure, std::string("malformed embed reply: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BackendFailure || e.code() == ErrorCode::Truncated) throw;
    fail(ErrorCode::BackendFailure, std::string("invalid embed reply: ") + e.what());
  }
}

std::vector<MaskProposal> BridgeBackend::decode(const seg::DecodeRequest& request) {
  request.validate();
  std::lock_guard lock(mutex_);
  const FeatureMap& features = request.features;
  const bool send_inline = options_.inline_features || features.embedding_id().empty();

  wire::Json message = wire::prompts_to_json(request.prompts);
  message["op"] = "decode";
  message["image_width"] = features.image_extent().width;
  message["image_height"] = features.image_extent().height;
  message["k"] = request.proposals_requested;
  if (!features.embedding_id().empty()) message["embedding_id"] = features.embedding_id();
  wire::Bytes feature_bytes;
  if (send_inline) {
    feature_bytes = wire::encode_f32_le(features.data());
    message["inline"] = true;
    message["features"] = {{"height", features.rows()},
                           {"width", features.cols()},
                           {"channels", features.channels()},
                           {"stride", features.stride()},
                           {"payload_bytes", feature_bytes.size()}};
  }
  wire::Bytes mask;
  if (request.prompts.mask_prompt) {
    mask = wire::mask_bytes(*request.prompts.mask_prompt);
    message["payload_bytes"] = mask.size();
  }

  wire::send_json(*connection_, message);
  if (send_inline) wire::write_frame(*connection_, feature_bytes);
  if (request.prompts.mask_prompt) wire::write_frame(*connection_, mask);

  const auto reply = check(wire::recv_json(*connection_, options_.max_frame));
  try {
    const int k = reply.at("k").get<int>();
    const auto scores = reply.at("scores").get<std::vector<double>>();
    const Extent extent{reply.at("width").get<int>(), reply.at("height").get<int>()};
    const auto announced = reply.at("payload_bytes").get<std::size_t>();
    require(k >= 1 && scores.size() == static_cast<std::size_t>(k), ErrorCode::BackendFailure,
            "decode reply score count != k");
    require(extent == features.image_extent(), ErrorCode::BackendFailure, "decode reply mask size != image size");
    std::vector<MaskProposal> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
      const auto bytes = wire::recv_payload(*connection_, announced, options_.max_frame);
      out.push_back({wire::mask_from_bytes(extent, bytes), scores[i]});
    }
    return out;
  } catch (const wire::Json::exception& e) {
    fail(ErrorCode::BackendFailure, std::string("malformed decode reply: ") + e.what());
  }
}

}  // namespace uosam::bridge
