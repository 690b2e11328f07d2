#include "donorchain/ordering/raft.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

namespace donorchain::ordering {

std::string_view to_string(RaftRole role) noexcept {
  switch (role) {
    case RaftRole::Follower: return "follower";
    case RaftRole::Candidate: return "candidate";
    case RaftRole::Leader: return "leader";
  }
  return "?";
}

RaftNodeState RaftNodeState::initial(NodeId id, std::vector<NodeId> cluster) {
  RaftNodeState s;
  s.node_id = std::move(id);
  s.cluster = std::move(cluster);
  return s;
}

std::uint64_t RaftNodeState::term_at(std::uint64_t index) const {
  if (index == 0 || index > log.size()) return 0;
  return log[index - 1].term;
}

namespace {

bool is_member(const RaftNodeState& s, const NodeId& id) {
  return std::find(s.cluster.begin(), s.cluster.end(), id) != s.cluster.end();
}

RaftMessage message(const RaftNodeState& s, const NodeId& to, auto body) {
  return RaftMessage{s.node_id, to, s.current_term, std::move(body)};
}

void become_follower(RaftNodeState& s, std::uint64_t term) {
  if (term > s.current_term) {
    s.current_term = term;
    s.voted_for.reset();
    s.leader_id.reset();
  }
  s.role = RaftRole::Follower;
  s.votes.clear();
  s.next_index.clear();
  s.match_index.clear();
}

RaftMessage append_for(const RaftNodeState& s, const NodeId& peer) {
  AppendEntries ae;
  auto next = s.next_index.at(peer);
  ae.prev_index = next - 1;
  ae.prev_term = s.term_at(ae.prev_index);
  auto end = std::min<std::uint64_t>(s.last_index(), ae.prev_index + s.max_entries_per_append);
  for (auto i = next; i <= end; ++i) ae.entries.push_back(s.log[i - 1]);
  ae.leader_commit = s.commit_index;
  return message(s, peer, std::move(ae));
}

void broadcast_append(const RaftNodeState& s, RaftOutput& out) {
  for (const auto& peer : s.cluster) {
    if (peer != s.node_id) out.messages.push_back(append_for(s, peer));
  }
}

void advance_commit(RaftNodeState& s) {
  for (auto n = s.last_index(); n > s.commit_index; --n) {
    if (s.term_at(n) != s.current_term) break;
    std::size_t count = 1;
    for (const auto& [peer, match] : s.match_index) {
      if (match >= n) ++count;
    }
    if (count >= s.quorum()) {
      s.commit_index = n;
      return;
    }
  }
}

void become_leader(RaftNodeState& s, RaftOutput& out) {
  s.role = RaftRole::Leader;
  s.leader_id = s.node_id;
  s.votes.clear();
  s.log.push_back(LogEntry{s.current_term, {}});
  for (const auto& peer : s.cluster) {
    if (peer == s.node_id) continue;
    s.next_index[peer] = s.last_index();
    s.match_index[peer] = 0;
  }
  spdlog::debug("raft {}: leader for term {}", s.node_id, s.current_term);
  advance_commit(s);
  broadcast_append(s, out);
}

void start_election(RaftNodeState& s, RaftOutput& out) {
  s.current_term += 1;
  s.role = RaftRole::Candidate;
  s.voted_for = s.node_id;
  s.leader_id.reset();
  s.votes = {s.node_id};
  out.reset_election_timer = true;
  if (s.votes.size() >= s.quorum()) {
    become_leader(s, out);
    return;
  }
  for (const auto& peer : s.cluster) {
    if (peer == s.node_id) continue;
    out.messages.push_back(message(s, peer, RequestVote{s.last_index(), s.term_at(s.last_index())}));
  }
}

void on_request_vote(RaftNodeState& s, const RaftMessage& m, const RequestVote& rv, RaftOutput& out) {
  bool granted = false;
  if (m.term == s.current_term) {
    auto my_last_term = s.term_at(s.last_index());
    bool up_to_date = rv.last_log_term > my_last_term ||
                      (rv.last_log_term == my_last_term && rv.last_log_index >= s.last_index());
    if ((!s.voted_for || *s.voted_for == m.from) && up_to_date) {
      s.voted_for = m.from;
      granted = true;
      out.reset_election_timer = true;
    }
  }
  out.messages.push_back(message(s, m.from, VoteReply{granted}));
}

void on_vote_reply(RaftNodeState& s, const RaftMessage& m, const VoteReply& vr, RaftOutput& out) {
  if (s.role != RaftRole::Candidate || m.term != s.current_term || !vr.granted) return;
  s.votes.insert(m.from);
  if (s.votes.size() >= s.quorum()) become_leader(s, out);
}

void on_append(RaftNodeState& s, const RaftMessage& m, const AppendEntries& ae, RaftOutput& out) {
  if (m.term < s.current_term) {
    out.messages.push_back(message(s, m.from, AppendReply{false, s.last_index()}));
    return;
  }
  if (s.role != RaftRole::Follower) become_follower(s, m.term);
  s.leader_id = m.from;
  out.reset_election_timer = true;

  if (ae.prev_index > s.last_index()) {
    out.messages.push_back(message(s, m.from, AppendReply{false, s.last_index()}));
    return;
  }
  if (s.term_at(ae.prev_index) != ae.prev_term) {
    out.messages.push_back(message(s, m.from, AppendReply{false, ae.prev_index - 1}));
    return;
  }
  auto index = ae.prev_index;
  for (const auto& entry : ae.entries) {
    ++index;
    if (index <= s.last_index()) {
      if (s.term_at(index) == entry.term) continue;
      if (index <= s.commit_index) {
        spdlog::error("raft {}: refusing to truncate committed index {}", s.node_id, index);
        return;
      }
      s.log.resize(index - 1);
    }
    s.log.push_back(entry);
  }
  auto last_new = ae.prev_index + ae.entries.size();
  if (ae.leader_commit > s.commit_index) {
    s.commit_index = std::max(s.commit_index, std::min(ae.leader_commit, last_new));
  }
  out.messages.push_back(message(s, m.from, AppendReply{true, last_new}));
}

void on_append_reply(RaftNodeState& s, const RaftMessage& m, const AppendReply& ar, RaftOutput& out) {
  if (s.role != RaftRole::Leader || m.term != s.current_term) return;
  auto& next = s.next_index[m.from];
  auto& match = s.match_index[m.from];
  if (ar.success) {
    if (ar.match_index > s.last_index()) {
      spdlog::warn("raft {}: ignoring reply claiming index {} beyond log", s.node_id, ar.match_index);
      return;
    }
    match = std::max(match, ar.match_index);
    next = std::max(next, match + 1);
    advance_commit(s);
    if (next <= s.last_index()) out.messages.push_back(append_for(s, m.from));
    return;
  }
  auto hinted = std::min(next - 1, ar.match_index + 1);
  next = std::max<std::uint64_t>({1, match + 1, hinted});
  out.messages.push_back(append_for(s, m.from));
}

}  // namespace

RaftOutput raft_apply(RaftNodeState& s, const RaftInput& input) {
  RaftOutput out;
  if (const auto* m = std::get_if<RaftMessage>(&input)) {
    if (m->to != s.node_id || !is_member(s, m->from) || m->from == s.node_id) {
      spdlog::debug("raft {}: ignoring misaddressed message from {}", s.node_id, m->from);
      return out;
    }
    if (m->term > s.current_term) become_follower(s, m->term);
    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, RequestVote>) on_request_vote(s, *m, body, out);
          if constexpr (std::is_same_v<T, VoteReply>) on_vote_reply(s, *m, body, out);
          if constexpr (std::is_same_v<T, AppendEntries>) on_append(s, *m, body, out);
          if constexpr (std::is_same_v<T, AppendReply>) on_append_reply(s, *m, body, out);
        },
        m->body);
  } else if (std::holds_alternative<ElectionTimeout>(input)) {
    if (s.role != RaftRole::Leader) start_election(s, out);
  } else if (std::holds_alternative<HeartbeatTimeout>(input)) {
    if (s.role == RaftRole::Leader) broadcast_append(s, out);
  } else if (const auto* p = std::get_if<Propose>(&input)) {
    if (s.role == RaftRole::Leader) {
      s.log.push_back(LogEntry{s.current_term, p->payload});
      out.proposal_accepted = true;
      advance_commit(s);
      for (const auto& peer : s.cluster) {
        if (peer == s.node_id) continue;
        // Peers still catching up get their next chunk from reply handling.
        if (s.next_index[peer] == s.last_index()) out.messages.push_back(append_for(s, peer));
      }
    }
  }
  return out;
}

std::pair<RaftNodeState, RaftOutput> raft_step(RaftNodeState state, const RaftInput& input) {
  auto out = raft_apply(state, input);
  return {std::move(state), std::move(out)};
}

RaftNode::RaftNode(NodeId id, std::vector<NodeId> cluster, std::size_t max_entries_per_append)
    : state_(RaftNodeState::initial(std::move(id), std::move(cluster))) {
  state_.max_entries_per_append = max_entries_per_append;
}

std::vector<LogEntry> RaftNode::take_committed() {
  std::vector<LogEntry> out;
  while (state_.last_applied < state_.commit_index) {
    out.push_back(state_.log[state_.last_applied]);
    ++state_.last_applied;
  }
  return out;
}

void RaftNode::restart() {
  auto fresh = RaftNodeState::initial(state_.node_id, state_.cluster);
  fresh.current_term = state_.current_term;
  fresh.voted_for = state_.voted_for;
  fresh.log = std::move(state_.log);
  fresh.last_applied = state_.last_applied;
  fresh.commit_index = state_.last_applied;
  fresh.max_entries_per_append = state_.max_entries_per_append;
  state_ = std::move(fresh);
}

}  // namespace donorchain::ordering
