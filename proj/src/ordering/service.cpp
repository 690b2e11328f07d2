#include "donorchain/ordering/service.hpp"

#include <set>

#include <spdlog/spdlog.h>

#include "donorchain/common/error.hpp"

namespace donorchain::ordering {

struct LocalOrderingCluster::Member {
  NodeId id;
  std::unique_ptr<OrdererNode> node;
  std::atomic<bool> alive{true};

  std::mutex inbox_mu;
  std::condition_variable inbox_cv;
  std::deque<RaftMessage> inbox;
  std::thread loop;

  std::unique_ptr<FrameServer> server;
  std::mutex peers_mu;
  std::map<NodeId, FrameSocket> peers;
  std::mutex client_mu;
  std::optional<FrameSocket> client;
};

LocalOrderingCluster::LocalOrderingCluster(OrderingConfig config, TransportKind transport,
                                           std::uint64_t seed)
    : config_(std::move(config)),
      transport_(transport),
      epoch_(std::chrono::steady_clock::now()),
      wall_epoch_ms_(std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count()) {
  config_.validate();
  std::uint64_t i = 0;
  for (const auto& id : config_.members()) {
    auto m = std::make_unique<Member>();
    m->id = id;
    m->node = std::make_unique<OrdererNode>(id, config_, seed * 7919 + i++);
    members_.push_back(std::move(m));
  }
  if (transport_ == TransportKind::Tcp) {
    for (auto& mp : members_) {
      Member* m = mp.get();
      m->server = std::make_unique<FrameServer>([this, m](Frame frame) -> std::optional<Frame> {
        if (auto* msg = std::get_if<RaftMessage>(&frame)) {
          if (m->alive) deliver_local(*m, std::move(*msg));
          return std::nullopt;
        }
        if (auto* req = std::get_if<SubmitRequest>(&frame)) {
          if (!m->alive) return SubmitReply{{SubmitStatus::NotLeader, std::nullopt, "orderer down"}};
          return SubmitReply{m->node->submit(std::move(req->envelope), now_ms())};
        }
        return std::nullopt;
      });
    }
  }
  for (auto& m : members_) {
    Member* raw = m.get();
    raw->loop = std::thread([this, raw] { run_member(*raw); });
  }
  retry_thread_ = std::thread([this] { retry_loop(); });
}

LocalOrderingCluster::~LocalOrderingCluster() { stop(); }

void LocalOrderingCluster::stop() {
  if (!running_.exchange(false)) return;
  client_cv_.notify_all();
  if (retry_thread_.joinable()) retry_thread_.join();
  for (auto& m : members_) {
    m->inbox_cv.notify_all();
    if (m->loop.joinable()) m->loop.join();
  }
  for (auto& m : members_) {
    if (m->server) m->server->stop();
  }
}

std::int64_t LocalOrderingCluster::now_ms() const {
  return wall_epoch_ms_ + std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - epoch_)
      .count();
}

LocalOrderingCluster::Member* LocalOrderingCluster::find(const NodeId& id) const {
  for (const auto& m : members_) {
    if (m->id == id) return m.get();
  }
  return nullptr;
}

std::size_t LocalOrderingCluster::live_count() const {
  std::size_t n = 0;
  for (const auto& m : members_) n += m->alive ? 1 : 0;
  return n;
}

const LocalOrderingCluster::Member* LocalOrderingCluster::reference() const {
  const Member* best = nullptr;
  std::uint64_t best_height = 0;
  for (const auto& m : members_) {
    auto h = m->node->height();
    bool better = !best || (m->alive && !best->alive) || (m->alive == best->alive && h > best_height);
    if (better) {
      best = m.get();
      best_height = h;
    }
  }
  return best;
}

void LocalOrderingCluster::run_member(Member& m) {
  while (running_ && m.alive) {
    std::deque<RaftMessage> batch;
    {
      std::unique_lock lock(m.inbox_mu);
      m.inbox_cv.wait_for(lock, std::chrono::milliseconds(5),
                          [&] { return !m.inbox.empty() || !running_ || !m.alive; });
      batch.swap(m.inbox);
    }
    if (!running_ || !m.alive) break;
    for (auto& msg : batch) route(m.id, m.node->receive(msg, now_ms()));
    route(m.id, m.node->tick(now_ms()));
  }
}

void LocalOrderingCluster::deliver_local(Member& m, RaftMessage message) {
  {
    std::lock_guard lock(m.inbox_mu);
    m.inbox.push_back(std::move(message));
  }
  m.inbox_cv.notify_one();
}

void LocalOrderingCluster::route(const NodeId& from, std::vector<RaftMessage> messages) {
  Member* sender = find(from);
  for (auto& msg : messages) {
    Member* target = find(msg.to);
    if (!target || !target->alive) continue;
    if (transport_ == TransportKind::InProcess) {
      deliver_local(*target, std::move(msg));
      continue;
    }
    std::lock_guard lock(sender->peers_mu);
    auto it = sender->peers.find(msg.to);
    try {
      if (it == sender->peers.end()) {
        it = sender->peers.emplace(msg.to, FrameSocket::connect("127.0.0.1", target->server->port())).first;
      }
      it->second.send(msg);
    } catch (const Error& e) {
      spdlog::debug("orderer {}: dropping message to {}: {}", from, msg.to, e.what());
      if (it != sender->peers.end()) sender->peers.erase(it);
    }
  }
}

std::optional<SubmitResult> LocalOrderingCluster::submit_to(Member& m, const Envelope& envelope) {
  if (transport_ == TransportKind::InProcess) {
    if (!m.alive) return std::nullopt;
    return m.node->submit(envelope, now_ms());
  }
  std::lock_guard lock(m.client_mu);
  try {
    if (!m.client) m.client = FrameSocket::connect("127.0.0.1", m.server->port());
    m.client->send(SubmitRequest{envelope});
    auto reply = m.client->receive();
    if (reply) {
      if (auto* r = std::get_if<SubmitReply>(&*reply)) return r->result;
    }
  } catch (const Error& e) {
    spdlog::debug("submit to {} failed: {}", m.id, e.what());
  }
  m.client.reset();
  return std::nullopt;
}

SubmitResult LocalOrderingCluster::try_submit(const Envelope& envelope, NodeId* accepted_by) {
  std::optional<NodeId> candidate;
  {
    std::lock_guard lock(client_mu_);
    candidate = leader_cache_;
  }
  std::set<NodeId> tried;
  for (std::size_t attempt = 0; attempt < members_.size() * 2; ++attempt) {
    Member* m = candidate ? find(*candidate) : nullptr;
    if (!m || !m->alive || tried.contains(m->id)) {
      m = nullptr;
      for (auto& other : members_) {
        if (other->alive && !tried.contains(other->id)) {
          m = other.get();
          break;
        }
      }
      if (!m) break;
    }
    tried.insert(m->id);
    auto result = submit_to(*m, envelope);
    if (!result) {
      candidate.reset();
      continue;
    }
    if (result->status == SubmitStatus::NotLeader) {
      candidate = result->leader_hint;
      continue;
    }
    if (result->status == SubmitStatus::Ack) {
      std::lock_guard lock(client_mu_);
      leader_cache_ = m->id;
      *accepted_by = m->id;
    }
    return *result;
  }
  return {SubmitStatus::NotLeader, std::nullopt, "no leader reachable"};
}

SubmitResult LocalOrderingCluster::submit(const Envelope& envelope) {
  if (!running_ || live_count() < config_.members().size() / 2 + 1) {
    throw Error(Errc::OrdererUnavailable, "no live majority of orderers");
  }
  {
    std::lock_guard lock(client_mu_);
    if (outstanding_.contains(envelope.tx_id)) return {SubmitStatus::Ack, leader_cache_, "already outstanding"};
    if (outstanding_.size() >= config_.queue_capacity) {
      return {SubmitStatus::QueueFull, leader_cache_, "too many outstanding envelopes"};
    }
  }
  if (reference()->node->delivered(envelope.tx_id)) return {SubmitStatus::Ack, leader_cache_, "already ordered"};

  NodeId accepted_by;
  auto result = try_submit(envelope, &accepted_by);
  if (result.status == SubmitStatus::Rejected || result.status == SubmitStatus::QueueFull) return result;
  std::lock_guard lock(client_mu_);
  outstanding_.emplace(envelope.tx_id, Outstanding{envelope, accepted_by, now_ms()});
  if (result.status != SubmitStatus::Ack) return {SubmitStatus::Ack, std::nullopt, "buffered until a leader is elected"};
  return result;
}

void LocalOrderingCluster::retry_loop() {
  const std::int64_t patience =
      2 * config_.batch_timeout.count() + config_.election_timeout_max.count();
  while (running_) {
    std::vector<std::pair<std::string, Outstanding>> snapshot;
    {
      std::unique_lock lock(client_mu_);
      client_cv_.wait_for(lock, std::chrono::milliseconds(20), [&] { return !running_.load(); });
      if (!running_) return;
      snapshot.assign(outstanding_.begin(), outstanding_.end());
    }
    const Member* ref = reference();
    for (auto& [tx_id, entry] : snapshot) {
      if (ref->node->delivered(tx_id)) {
        std::lock_guard lock(client_mu_);
        outstanding_.erase(tx_id);
        continue;
      }
      Member* acc = entry.accepted_by.empty() ? nullptr : find(entry.accepted_by);
      bool stale = !acc || !acc->alive || !acc->node->is_leader();
      bool timed_out = now_ms() - entry.submitted_ms > patience;
      if (!stale && !timed_out) continue;
      NodeId accepted_by;
      auto result = try_submit(entry.envelope, &accepted_by);
      std::lock_guard lock(client_mu_);
      auto it = outstanding_.find(tx_id);
      if (it == outstanding_.end()) continue;
      if (result.status == SubmitStatus::Ack) {
        it->second.accepted_by = accepted_by;
        it->second.submitted_ms = now_ms();
      }
    }
  }
}

std::vector<DeliveredBatch> LocalOrderingCluster::deliver(std::uint64_t from) const {
  return reference()->node->deliver(from);
}

std::uint64_t LocalOrderingCluster::height() const { return reference()->node->height(); }

bool LocalOrderingCluster::wait_for_height(std::uint64_t height, std::chrono::milliseconds timeout) const {
  auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    auto now = std::chrono::steady_clock::now();
    auto slice = std::min<std::chrono::milliseconds>(
        std::chrono::milliseconds(20),
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now));
    if (reference()->node->wait_for_height(height, std::max(slice, std::chrono::milliseconds(0)))) return true;
    if (std::chrono::steady_clock::now() >= deadline) return false;
  }
}

std::vector<NodeId> LocalOrderingCluster::members() const { return config_.members(); }

std::optional<NodeId> LocalOrderingCluster::leader() const {
  std::optional<NodeId> best;
  std::uint64_t best_term = 0;
  for (const auto& m : members_) {
    if (!m->alive) continue;
    auto state = m->node->raft_state();
    if (state.role == RaftRole::Leader && (!best || state.current_term > best_term)) {
      best = m->id;
      best_term = state.current_term;
    }
  }
  return best;
}

std::optional<NodeId> LocalOrderingCluster::wait_for_leader(std::chrono::milliseconds timeout) const {
  auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (auto l = leader()) return l;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return leader();
}

const OrdererNode& LocalOrderingCluster::node(const NodeId& id) const {
  auto* m = find(id);
  if (!m) throw Error(Errc::InvalidConfig, "unknown orderer '" + id + "'");
  return *m->node;
}

bool LocalOrderingCluster::alive(const NodeId& id) const {
  auto* m = find(id);
  return m && m->alive;
}

std::optional<std::uint16_t> LocalOrderingCluster::port(const NodeId& id) const {
  auto* m = find(id);
  if (!m || !m->server) return std::nullopt;
  return m->server->port();
}

void LocalOrderingCluster::kill(const NodeId& id) {
  auto* m = find(id);
  if (!m || !m->alive.exchange(false)) return;
  m->inbox_cv.notify_all();
  if (m->loop.joinable()) m->loop.join();
  {
    std::lock_guard lock(m->inbox_mu);
    m->inbox.clear();
  }
  std::lock_guard lock(m->peers_mu);
  m->peers.clear();
  spdlog::info("orderer {} killed", id);
}

void LocalOrderingCluster::restart(const NodeId& id) {
  auto* m = find(id);
  if (!m || m->alive) return;
  m->node->restart(now_ms());
  m->alive = true;
  m->loop = std::thread([this, m] { run_member(*m); });
}

std::size_t LocalOrderingCluster::outstanding() const {
  std::lock_guard lock(client_mu_);
  return outstanding_.size();
}

}  // namespace donorchain::ordering
