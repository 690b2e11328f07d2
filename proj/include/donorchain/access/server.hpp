#pragma once

#include <memory>
#include <string>

#include "donorchain/access/gateway.hpp"

namespace donorchain::access {

// HTTP front for a Gateway. Every route goes through Gateway::handle except
// the two server-sent-event streams:
//
//   GET /events/transport   TransportNotices; resumes after Last-Event-ID
//   GET /events/commits     commit events for the caller's own transactions
//
// EventSource cannot set headers, so the token may also be passed as
// ?token=... and the resume point as ?lastEventId=....
class RestServer {
 public:
  explicit RestServer(Gateway& gateway, std::string host = "127.0.0.1", int port = 0);
  RestServer(const RestServer&) = delete;
  RestServer& operator=(const RestServer&) = delete;
  ~RestServer();

  // Binds and serves on a background thread. Returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace donorchain::access
