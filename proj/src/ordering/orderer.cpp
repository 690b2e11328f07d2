#include "donorchain/ordering/orderer.hpp"

#include <spdlog/spdlog.h>

#include "donorchain/common/error.hpp"

namespace donorchain::ordering {

std::string_view to_string(SubmitStatus status) noexcept {
  switch (status) {
    case SubmitStatus::Ack: return "ack";
    case SubmitStatus::NotLeader: return "not_leader";
    case SubmitStatus::QueueFull: return "queue_full";
    case SubmitStatus::Rejected: return "rejected";
  }
  return "?";
}

OrdererNode::OrdererNode(NodeId id, OrderingConfig config, std::uint64_t seed)
    : id_(id), config_(std::move(config)), rng_(seed),
      raft_(id, config_.members(), config_.max_entries_per_append) {
  config_.validate();
  if (config_.mode == OrderingMode::Solo) raft_.step(ElectionTimeout{});
}

void OrdererNode::reset_election_deadline(std::int64_t now_ms) {
  std::uniform_int_distribution<std::int64_t> dist(config_.election_timeout_min.count(),
                                                   config_.election_timeout_max.count());
  election_deadline_ = now_ms + dist(rng_);
}

SubmitResult OrdererNode::submit(Envelope envelope, std::int64_t now_ms) {
  std::vector<RaftMessage> unused;
  std::lock_guard lock(mu_);
  const auto& state = raft_.state();
  if (state.role != RaftRole::Leader) {
    return {SubmitStatus::NotLeader, state.leader_id, "not the leader"};
  }
  if (envelope.size() > config_.max_block_bytes) {
    return {SubmitStatus::Rejected, std::nullopt, "envelope exceeds max_block_bytes"};
  }
  if (delivered_ids_.contains(envelope.tx_id) || pending_ids_.contains(envelope.tx_id)) {
    return {SubmitStatus::Ack, id_, "already ordered"};
  }
  if (pending_.size() >= config_.queue_capacity) {
    return {SubmitStatus::QueueFull, id_, "pending queue full"};
  }
  pending_ids_.insert(envelope.tx_id);
  pending_.push_back(std::move(envelope));
  if (!batch_deadline_) batch_deadline_ = now_ms + config_.batch_timeout.count();
  return {SubmitStatus::Ack, id_, {}};
}

void OrdererNode::cut_and_propose(std::int64_t now_ms, bool timer_expired,
                                  std::vector<RaftMessage>& out) {
  bool cut_any = false;
  while (auto batch = cut_batch(pending_, config_, timer_expired, now_ms)) {
    cut_any = true;
    for (const auto& e : batch->envelopes) pending_ids_.erase(e.tx_id);
    auto output = raft_.step(Propose{batch->encode()});
    handle(std::move(output), now_ms, out);
    timer_expired = false;
    if (raft_.state().role != RaftRole::Leader) return;
  }
  if (!cut_any) return;
  batch_deadline_.reset();
  if (!pending_.empty()) batch_deadline_ = now_ms + config_.batch_timeout.count();
}

void OrdererNode::handle(RaftOutput output, std::int64_t now_ms, std::vector<RaftMessage>& out) {
  if (output.reset_election_timer) reset_election_deadline(now_ms);
  for (auto& m : output.messages) out.push_back(std::move(m));
  if (raft_.state().role != RaftRole::Leader && !pending_.empty()) {
    spdlog::debug("orderer {}: lost leadership, dropping {} pending", id_, pending_.size());
    pending_.clear();
    pending_ids_.clear();
    batch_deadline_.reset();
  }
  apply_committed();
}

void OrdererNode::apply_committed() {
  bool grew = false;
  for (auto& entry : raft_.take_committed()) {
    if (entry.payload.empty()) continue;
    Batch batch;
    try {
      batch = Batch::decode(entry.payload);
    } catch (const Error& e) {
      spdlog::error("orderer {}: undecodable committed entry: {}", id_, e.what());
      continue;
    }
    Batch fresh;
    fresh.cut_time_ms = batch.cut_time_ms;
    for (auto& e : batch.envelopes) {
      if (delivered_ids_.insert(e.tx_id).second) fresh.envelopes.push_back(std::move(e));
    }
    if (fresh.envelopes.empty()) continue;
    delivered_.push_back(DeliveredBatch{delivered_.size(), std::move(fresh)});
    grew = true;
  }
  if (grew) delivered_cv_.notify_all();
}

std::vector<RaftMessage> OrdererNode::receive(const RaftMessage& message, std::int64_t now_ms) {
  std::vector<RaftMessage> out;
  std::lock_guard lock(mu_);
  bool was_leader = raft_.state().role == RaftRole::Leader;
  handle(raft_.step(message), now_ms, out);
  if (!was_leader && raft_.state().role == RaftRole::Leader) heartbeat_deadline_ = now_ms;
  return out;
}

std::vector<RaftMessage> OrdererNode::tick(std::int64_t now_ms) {
  std::vector<RaftMessage> out;
  std::lock_guard lock(mu_);
  if (!election_deadline_) reset_election_deadline(now_ms);
  if (raft_.state().role == RaftRole::Leader) {
    if (now_ms >= heartbeat_deadline_) {
      handle(raft_.step(HeartbeatTimeout{}), now_ms, out);
      heartbeat_deadline_ = now_ms + config_.heartbeat_interval.count();
    }
    bool expired = batch_deadline_ && now_ms >= *batch_deadline_;
    if (!pending_.empty()) cut_and_propose(now_ms, expired, out);
  } else if (now_ms >= *election_deadline_) {
    handle(raft_.step(ElectionTimeout{}), now_ms, out);
    reset_election_deadline(now_ms);
    if (raft_.state().role == RaftRole::Leader) heartbeat_deadline_ = now_ms;
  }
  return out;
}

void OrdererNode::restart(std::int64_t now_ms) {
  std::lock_guard lock(mu_);
  raft_.restart();
  pending_.clear();
  pending_ids_.clear();
  batch_deadline_.reset();
  reset_election_deadline(now_ms);
  if (config_.mode == OrderingMode::Solo) raft_.step(ElectionTimeout{});
  apply_committed();
}

std::uint64_t OrdererNode::height() const {
  std::lock_guard lock(mu_);
  return delivered_.size();
}

std::vector<DeliveredBatch> OrdererNode::deliver(std::uint64_t from) const {
  std::lock_guard lock(mu_);
  if (from > delivered_.size()) {
    throw Error(Errc::AheadOfChain, "deliver from " + std::to_string(from) + " but height is " +
                                        std::to_string(delivered_.size()));
  }
  return {delivered_.begin() + static_cast<std::ptrdiff_t>(from), delivered_.end()};
}

bool OrdererNode::wait_for_height(std::uint64_t height, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return delivered_cv_.wait_for(lock, timeout, [&] { return delivered_.size() >= height; });
}

bool OrdererNode::delivered(const std::string& tx_id) const {
  std::lock_guard lock(mu_);
  return delivered_ids_.contains(tx_id);
}

bool OrdererNode::is_leader() const {
  std::lock_guard lock(mu_);
  return raft_.state().role == RaftRole::Leader;
}

std::optional<NodeId> OrdererNode::leader_hint() const {
  std::lock_guard lock(mu_);
  return raft_.state().leader_id;
}

RaftNodeState OrdererNode::raft_state() const {
  std::lock_guard lock(mu_);
  return raft_.state();
}

std::size_t OrdererNode::pending_count() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

}  // namespace donorchain::ordering
