#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace donorchain::ordering {

using NodeId = std::string;

enum class OrderingMode { Solo, Raft };

std::string_view to_string(OrderingMode mode) noexcept;
OrderingMode parse_ordering_mode(std::string_view text);

struct OrderingConfig {
  std::size_t max_tx_per_block = 50;
  std::size_t max_block_bytes = 1 << 20;
  std::chrono::milliseconds batch_timeout{500};
  OrderingMode mode = OrderingMode::Solo;
  std::vector<NodeId> cluster;

  // Raft timing. Election timeouts are drawn uniformly from [min, max].
  std::chrono::milliseconds election_timeout_min{300};
  std::chrono::milliseconds election_timeout_max{600};
  std::chrono::milliseconds heartbeat_interval{50};
  std::size_t max_entries_per_append = 64;

  // Pending envelopes beyond this are refused with QueueFull.
  std::size_t queue_capacity = 100000;

  // Throws Error(InvalidConfig) naming the first violated constraint.
  void validate() const;

  // The member list actually run: `cluster` for Raft, a single "orderer0"
  // (or cluster[0]) for Solo.
  std::vector<NodeId> members() const;

  // Durations as integer milliseconds: batch_timeout_ms and so on. Missing
  // fields keep their defaults.
  nlohmann::json to_json() const;
  static OrderingConfig from_json(const nlohmann::json& doc);
};

}  // namespace donorchain::ordering
