#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <variant>
#include <vector>

#include "donorchain/common/bytes.hpp"
#include "donorchain/ordering/config.hpp"

namespace donorchain::ordering {

struct LogEntry {
  std::uint64_t term = 0;
  Bytes payload;  // empty for the no-op a new leader appends
  bool operator==(const LogEntry&) const = default;
};

struct RequestVote {
  std::uint64_t last_log_index = 0;
  std::uint64_t last_log_term = 0;
  bool operator==(const RequestVote&) const = default;
};

struct VoteReply {
  bool granted = false;
  bool operator==(const VoteReply&) const = default;
};

struct AppendEntries {
  std::uint64_t prev_index = 0;
  std::uint64_t prev_term = 0;
  std::vector<LogEntry> entries;
  std::uint64_t leader_commit = 0;
  bool operator==(const AppendEntries&) const = default;
};

// On failure, match_index is a hint: the follower's log is known to agree
// with nothing past it, so the leader can back up in one step.
struct AppendReply {
  bool success = false;
  std::uint64_t match_index = 0;
  bool operator==(const AppendReply&) const = default;
};

struct RaftMessage {
  NodeId from;
  NodeId to;
  std::uint64_t term = 0;
  std::variant<RequestVote, VoteReply, AppendEntries, AppendReply> body;
  bool operator==(const RaftMessage&) const = default;
};

struct ElectionTimeout {};
struct HeartbeatTimeout {};
struct Propose {
  Bytes payload;
};

using RaftInput = std::variant<RaftMessage, ElectionTimeout, HeartbeatTimeout, Propose>;

enum class RaftRole { Follower, Candidate, Leader };
std::string_view to_string(RaftRole role) noexcept;

struct RaftNodeState {
  NodeId node_id;
  std::vector<NodeId> cluster;  // includes node_id
  std::uint64_t current_term = 0;
  std::optional<NodeId> voted_for;
  std::vector<LogEntry> log;  // log[i] holds index i + 1
  std::uint64_t commit_index = 0;
  std::uint64_t last_applied = 0;
  RaftRole role = RaftRole::Follower;
  std::optional<NodeId> leader_id;
  std::map<NodeId, std::uint64_t> next_index;
  std::map<NodeId, std::uint64_t> match_index;
  std::set<NodeId> votes;
  std::size_t max_entries_per_append = 64;

  static RaftNodeState initial(NodeId id, std::vector<NodeId> cluster);

  std::uint64_t last_index() const { return log.size(); }
  std::uint64_t term_at(std::uint64_t index) const;
  std::size_t quorum() const { return cluster.size() / 2 + 1; }
};

struct RaftOutput {
  std::vector<RaftMessage> messages;
  bool reset_election_timer = false;
  bool proposal_accepted = false;
};

// Applies one input to `state` in place. Deterministic; no clocks, no I/O.
RaftOutput raft_apply(RaftNodeState& state, const RaftInput& input);

// Pure form of raft_apply.
std::pair<RaftNodeState, RaftOutput> raft_step(RaftNodeState state, const RaftInput& input);

// Owning wrapper used by orderer nodes and the simulator.
class RaftNode {
 public:
  RaftNode(NodeId id, std::vector<NodeId> cluster, std::size_t max_entries_per_append = 64);

  RaftOutput step(const RaftInput& input) { return raft_apply(state_, input); }
  const RaftNodeState& state() const { return state_; }

  // Entries in (last_applied, commit_index], advancing last_applied.
  std::vector<LogEntry> take_committed();

  // Crash and recover: term, vote, log and the applied prefix survive;
  // everything else resets.
  void restart();

 private:
  RaftNodeState state_;
};

}  // namespace donorchain::ordering
