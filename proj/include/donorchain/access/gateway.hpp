#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "donorchain/access/notice_feed.hpp"
#include "donorchain/common/error.hpp"
#include "donorchain/identity/authorization.hpp"
#include "donorchain/network/network.hpp"

namespace donorchain::access {

struct HttpRequest {
  std::string method;  // GET, POST, DELETE
  std::string path;
  std::string body;
  std::optional<std::string> bearer;
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

struct Session {
  std::string token;
  network::ClientIdentity client;
  std::int64_t expires_at_ms = 0;
};

// Bytes a client signs to prove it holds the key during login.
std::string login_message(std::string_view identity_id, std::string_view nonce);

// One entry per route. `action` is what the route's authorization is
// checked against; routes without one only need a valid session.
struct RouteInfo {
  std::string method;
  std::string pattern;
  std::optional<std::string> chaincode_method;
  std::optional<identity::Action> action;
};

// The REST surface over a Network. Reads endorse on one peer and order
// nothing; writes run the full flow and answer only once the commit is
// known. Keys live in the gateway's wallet; a session proves the caller
// holds the same key as the enrolled identity.
//
// Login is two calls to POST /auth/login:
//   {"identity": id}                                   -> {"nonce"}
//   {"identity": id, "nonce": n, "signature": hex}     -> {"token", ...}
// where the signature is over login_message(id, n).
class Gateway {
 public:
  using Clock = std::function<std::int64_t()>;  // epoch ms

  struct Options {
    std::string channel = std::string(network::kDonationChannel);
    std::string chaincode = "donation";
    std::chrono::milliseconds commit_timeout = std::chrono::seconds(30);
    std::chrono::milliseconds session_ttl = std::chrono::hours(12);
    std::chrono::milliseconds nonce_ttl = std::chrono::minutes(2);
    Clock clock;
  };

  Gateway(network::Network& net, std::map<std::string, network::ClientIdentity> wallet);
  Gateway(network::Network& net, std::map<std::string, network::ClientIdentity> wallet, Options options);
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  HttpResponse handle(const HttpRequest& request);

  // For the streaming routes: the session behind the token, if it may
  // perform the action, or the error response to send.
  std::variant<Session, HttpResponse> authorize(const std::optional<std::string>& bearer,
                                                std::optional<identity::Action> action);

  NoticeFeed& notices() { return feed_; }
  network::Network& network() { return net_; }
  const Options& options() const { return options_; }

  static const std::vector<RouteInfo>& routes();
  static int status_for(Errc code);
  static int status_for(ledger::ValidationFlag flag);

 private:
  struct PendingLogin {
    std::string identity_id;
    std::int64_t expires_at_ms = 0;
  };

  std::int64_t now() const;
  HttpResponse login(const nlohmann::json& body);
  std::optional<Session> session(const std::optional<std::string>& bearer);
  HttpResponse dispatch(const HttpRequest& request, const Session& session);
  HttpResponse query(const Session& s, const std::string& method, std::vector<std::string> args);
  HttpResponse write(const Session& s, const std::string& method, std::vector<std::string> args, int created_status);
  HttpResponse patient_status(const Session& s, const std::string& patient_id);
  HttpResponse tx_status(const std::string& tx_id);
  HttpResponse verify_chain(const Session& s);

  network::Network& net_;
  std::map<std::string, network::ClientIdentity> wallet_;
  Options options_;
  NoticeFeed feed_;
  std::mutex mu_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, PendingLogin> nonces_;
};

HttpResponse error_response(int status, std::string_view code, const std::string& message);

}  // namespace donorchain::access
