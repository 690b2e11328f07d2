#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "donorchain/ordering/batch.hpp"
#include "donorchain/ordering/config.hpp"
#include "donorchain/ordering/raft.hpp"

namespace donorchain::ordering {

enum class SubmitStatus : std::uint8_t { Ack = 0, NotLeader = 1, QueueFull = 2, Rejected = 3 };
std::string_view to_string(SubmitStatus status) noexcept;

struct SubmitResult {
  SubmitStatus status = SubmitStatus::Ack;
  std::optional<NodeId> leader_hint;
  std::string detail;
  bool operator==(const SubmitResult&) const = default;
};

// One orderer: a Raft node plus the pending queue, batch timer and the
// delivered sequence. Time is passed in by the caller so the same object runs
// under a simulated clock or a real one. All methods are thread-safe.
//
// Delivery applies committed batches in log order and drops envelopes whose
// tx_id was already delivered, so a client resubmitting after a leader change
// cannot cause duplicates. Batches left empty by that filter are skipped.
class OrdererNode {
 public:
  OrdererNode(NodeId id, OrderingConfig config, std::uint64_t seed = 1);

  const NodeId& id() const { return id_; }

  SubmitResult submit(Envelope envelope, std::int64_t now_ms);
  std::vector<RaftMessage> receive(const RaftMessage& message, std::int64_t now_ms);
  std::vector<RaftMessage> tick(std::int64_t now_ms);

  // Volatile state is lost; the Raft log and the delivered sequence survive.
  void restart(std::int64_t now_ms);

  std::uint64_t height() const;
  // Batches with sequence >= from. Throws AheadOfChain when from > height().
  std::vector<DeliveredBatch> deliver(std::uint64_t from) const;
  bool wait_for_height(std::uint64_t height, std::chrono::milliseconds timeout) const;
  bool delivered(const std::string& tx_id) const;

  bool is_leader() const;
  std::optional<NodeId> leader_hint() const;
  RaftNodeState raft_state() const;
  std::size_t pending_count() const;

 private:
  void handle(RaftOutput output, std::int64_t now_ms, std::vector<RaftMessage>& out);
  void cut_and_propose(std::int64_t now_ms, bool timer_expired, std::vector<RaftMessage>& out);
  void apply_committed();
  void reset_election_deadline(std::int64_t now_ms);

  NodeId id_;
  OrderingConfig config_;
  std::mt19937_64 rng_;

  mutable std::mutex mu_;
  mutable std::condition_variable delivered_cv_;
  RaftNode raft_;
  std::deque<Envelope> pending_;
  std::unordered_set<std::string> pending_ids_;
  std::optional<std::int64_t> batch_deadline_;
  std::optional<std::int64_t> election_deadline_;
  std::int64_t heartbeat_deadline_ = 0;
  std::vector<DeliveredBatch> delivered_;
  std::unordered_set<std::string> delivered_ids_;
};

}  // namespace donorchain::ordering
