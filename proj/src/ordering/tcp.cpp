#include "donorchain/ordering/tcp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <spdlog/spdlog.h>

#include "donorchain/common/error.hpp"

namespace donorchain::ordering {

namespace {

sockaddr_in loopback(std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  return addr;
}

// false on EOF before the first byte; throws on EOF mid-read.
bool read_exact(int fd, std::uint8_t* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    auto r = ::recv(fd, out + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw Error(Errc::Io, "connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::Io, std::string("recv: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace

FrameSocket FrameSocket::connect(const std::string& host, std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(Errc::Io, std::string("socket: ") + std::strerror(errno));
  auto addr = loopback(port);
  if (host != "127.0.0.1" && host != "localhost") {
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      throw Error(Errc::OrdererUnavailable, "bad orderer host '" + host + "'");
    }
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    auto err = errno;
    ::close(fd);
    throw Error(Errc::OrdererUnavailable,
                "connect " + host + ":" + std::to_string(port) + ": " + std::strerror(err));
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return FrameSocket(fd);
}

FrameSocket::FrameSocket(FrameSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

FrameSocket& FrameSocket::operator=(FrameSocket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

FrameSocket::~FrameSocket() { close(); }

void FrameSocket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void FrameSocket::send(const Frame& frame) {
  if (fd_ < 0) throw Error(Errc::Io, "send on closed socket");
  auto data = encode_frame(frame);
  std::size_t sent = 0;
  while (sent < data.size()) {
    auto r = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::Io, std::string("send: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(r);
  }
}

std::optional<Frame> FrameSocket::receive() {
  if (fd_ < 0) return std::nullopt;
  std::uint8_t prefix[4];
  if (!read_exact(fd_, prefix, 4)) return std::nullopt;
  std::uint32_t len = (std::uint32_t{prefix[0]} << 24) | (std::uint32_t{prefix[1]} << 16) |
                      (std::uint32_t{prefix[2]} << 8) | std::uint32_t{prefix[3]};
  if (len > kMaxFrameBytes) throw Error(Errc::Decode, "frame too large: " + std::to_string(len));
  Bytes body(len);
  if (len > 0 && !read_exact(fd_, body.data(), len)) throw Error(Errc::Io, "connection closed mid-frame");
  return decode_frame_body(body);
}

FrameServer::FrameServer(Handler handler, std::uint16_t port) : handler_(std::move(handler)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(Errc::Io, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  auto addr = loopback(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    auto err = errno;
    ::close(listen_fd_);
    throw Error(Errc::Io, std::string("bind/listen: ") + std::strerror(err));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

FrameServer::~FrameServer() { stop(); }

void FrameServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : connections_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void FrameServer::accept_loop() {
  while (!stopping_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    connections_.push_back(fd);
    workers_.emplace_back([this, fd] { serve(fd); });
  }
}

void FrameServer::serve(int fd) {
  FrameSocket socket(fd);
  try {
    while (!stopping_) {
      auto frame = socket.receive();
      if (!frame) break;
      if (auto reply = handler_(std::move(*frame))) socket.send(*reply);
    }
  } catch (const std::exception& e) {
    if (!stopping_) spdlog::debug("frame server: dropping connection: {}", e.what());
  }
  std::lock_guard lock(mu_);
  std::erase(connections_, fd);
}

}  // namespace donorchain::ordering
