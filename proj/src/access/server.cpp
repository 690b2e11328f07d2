#include "donorchain/access/server.hpp"

#include <atomic>
#include <deque>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "donorchain/common/error.hpp"

namespace donorchain::access {

namespace {

constexpr auto kStreamPoll = std::chrono::milliseconds(500);
constexpr auto kKeepAlive = std::chrono::seconds(15);

std::optional<std::string> bearer_of(const httplib::Request& req) {
  auto header = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() > prefix.size() && header.compare(0, prefix.size(), prefix) == 0) {
    return header.substr(prefix.size());
  }
  if (req.has_param("token")) return req.get_param_value("token");
  return std::nullopt;
}

std::uint64_t last_event_id(const httplib::Request& req) {
  std::string text = req.get_header_value("Last-Event-ID");
  if (text.empty() && req.has_param("lastEventId")) text = req.get_param_value("lastEventId");
  if (text.empty()) return 0;
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    return 0;
  }
}

void send_json(httplib::Response& res, const HttpResponse& out) {
  res.status = out.status;
  res.set_content(out.body.is_null() ? std::string("{}") : out.body.dump(), "application/json");
}

bool write_all(httplib::DataSink& sink, const std::string& text) {
  return sink.is_writable() && sink.write(text.data(), text.size());
}

}  // namespace

struct RestServer::Impl {
  Impl(Gateway& g, std::string h, int p) : gateway(g), host(std::move(h)), requested_port(p) {}

  Gateway& gateway;
  std::string host;
  int requested_port;
  int bound_port = 0;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};

  void install_routes();
  void stream_notices(const httplib::Request& req, httplib::Response& res);
  void stream_commits(const httplib::Request& req, httplib::Response& res);
  int bind();
};

void RestServer::Impl::install_routes() {
  server.new_task_queue = [] { return new httplib::ThreadPool(32); };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Authorization, Content-Type, Last-Event-ID"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/events/transport",
             [this](const httplib::Request& req, httplib::Response& res) { stream_notices(req, res); });
  server.Get("/events/commits",
             [this](const httplib::Request& req, httplib::Response& res) { stream_commits(req, res); });

  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request{req.method, req.path, req.body, bearer_of(req)};
    send_json(res, gateway.handle(request));
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Delete(".*", forward);
}

void RestServer::Impl::stream_notices(const httplib::Request& req, httplib::Response& res) {
  auto auth = gateway.authorize(bearer_of(req), identity::Action::ReadTransportFeed);
  if (auto* denied = std::get_if<HttpResponse>(&auth)) return send_json(res, *denied);
  auto cursor = std::make_shared<std::uint64_t>(last_event_id(req));
  res.set_header("Cache-Control", "no-cache");
  res.set_chunked_content_provider("text/event-stream", [this, cursor](std::size_t, httplib::DataSink& sink) {
    auto quiet_since = std::chrono::steady_clock::now();
    while (!stopping) {
      auto fresh = gateway.notices().wait_after(*cursor, kStreamPoll);
      for (const auto& n : fresh) {
        auto frame = "id: " + std::to_string(n.id) + "\nevent: notice\ndata: " + n.to_json().dump() + "\n\n";
        if (!write_all(sink, frame)) return false;
        *cursor = n.id;
      }
      auto now = std::chrono::steady_clock::now();
      if (!fresh.empty()) {
        quiet_since = now;
      } else if (now - quiet_since > kKeepAlive) {
        if (!write_all(sink, ": keepalive\n\n")) return false;
        quiet_since = now;
      }
    }
    sink.done();
    return true;
  });
}

void RestServer::Impl::stream_commits(const httplib::Request& req, httplib::Response& res) {
  auto auth = gateway.authorize(bearer_of(req), std::nullopt);
  if (auto* denied = std::get_if<HttpResponse>(&auth)) return send_json(res, *denied);
  auto who = std::get<Session>(auth).client.identity->identity_id;

  struct Queue {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<network::CommitEvent> events;
    std::uint64_t next_id = 1;
  };
  auto queue = std::make_shared<Queue>();
  auto& net = gateway.network();
  auto channel = gateway.options().channel;
  auto sub = net.subscribe(channel, {}, [queue, who](const network::CommitEvent& e) {
    if (e.submitter != who) return;
    std::lock_guard lock(queue->mu);
    queue->events.push_back(e);
    queue->cv.notify_all();
  });

  res.set_header("Cache-Control", "no-cache");
  res.set_chunked_content_provider(
      "text/event-stream",
      [this, queue](std::size_t, httplib::DataSink& sink) {
        while (!stopping) {
          std::deque<network::CommitEvent> batch;
          {
            std::unique_lock lock(queue->mu);
            queue->cv.wait_for(lock, kStreamPoll, [&] { return !queue->events.empty(); });
            batch.swap(queue->events);
          }
          for (const auto& e : batch) {
            nlohmann::json body{{"tx_id", e.tx_id},
                                {"flag", ledger::to_string(e.flag)},
                                {"method", e.method},
                                {"block", e.block_number},
                                {"blockTimestampMs", e.block_timestamp_ms}};
            if (e.event) body["event"] = e.event->name;
            auto frame = "id: " + std::to_string(queue->next_id++) + "\nevent: commit\ndata: " + body.dump() + "\n\n";
            if (!write_all(sink, frame)) return false;
          }
        }
        sink.done();
        return true;
      },
      [&net, channel, sub](bool) {
        try {
          net.unsubscribe(channel, sub);
        } catch (const std::exception& e) {
          spdlog::debug("commit stream unsubscribe: {}", e.what());
        }
      });
}

int RestServer::Impl::bind() {
  if (requested_port == 0) {
    bound_port = server.bind_to_any_port(host);
  } else {
    bound_port = server.bind_to_port(host, requested_port) ? requested_port : -1;
  }
  if (bound_port <= 0) {
    throw Error(Errc::Io, "cannot bind " + host + ":" + std::to_string(requested_port));
  }
  return bound_port;
}

RestServer::RestServer(Gateway& gateway, std::string host, int port)
    : impl_(std::make_unique<Impl>(gateway, std::move(host), port)) {
  impl_->install_routes();
}

RestServer::~RestServer() { stop(); }

int RestServer::start() {
  auto port = impl_->bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void RestServer::run() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void RestServer::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int RestServer::port() const { return impl_->bound_port; }

}  // namespace donorchain::access
