#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "donorchain/ordering/wire.hpp"

namespace donorchain::ordering {

// A connected stream socket carrying length-prefixed frames.
class FrameSocket {
 public:
  // Throws Error(OrdererUnavailable) when the connection is refused.
  static FrameSocket connect(const std::string& host, std::uint16_t port);

  explicit FrameSocket(int fd) : fd_(fd) {}
  FrameSocket(FrameSocket&& other) noexcept;
  FrameSocket& operator=(FrameSocket&& other) noexcept;
  FrameSocket(const FrameSocket&) = delete;
  FrameSocket& operator=(const FrameSocket&) = delete;
  ~FrameSocket();

  // Throws Error(Io) when the peer is gone.
  void send(const Frame& frame);
  // nullopt on a clean close between frames.
  std::optional<Frame> receive();

  bool is_open() const { return fd_ >= 0; }
  void close();

 private:
  int fd_ = -1;
};

// Listens on 127.0.0.1 and runs `handler` for every frame received on any
// connection. A returned frame is written back on the same connection.
class FrameServer {
 public:
  using Handler = std::function<std::optional<Frame>(Frame)>;

  explicit FrameServer(Handler handler, std::uint16_t port = 0);
  FrameServer(const FrameServer&) = delete;
  FrameServer& operator=(const FrameServer&) = delete;
  ~FrameServer();

  std::uint16_t port() const { return port_; }
  void stop();

 private:
  void accept_loop();
  void serve(int fd);

  Handler handler_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<int> connections_;
  std::vector<std::thread> workers_;
};

}  // namespace donorchain::ordering
