#include "donorchain/ordering/config.hpp"

#include <set>

#include "donorchain/common/error.hpp"

namespace donorchain::ordering {

std::string_view to_string(OrderingMode mode) noexcept {
  return mode == OrderingMode::Solo ? "solo" : "raft";
}

OrderingMode parse_ordering_mode(std::string_view text) {
  if (text == "solo") return OrderingMode::Solo;
  if (text == "raft") return OrderingMode::Raft;
  throw Error(Errc::InvalidConfig, "unknown ordering mode '" + std::string(text) + "'");
}

void OrderingConfig::validate() const {
  if (max_tx_per_block < 1) throw Error(Errc::InvalidConfig, "max_tx_per_block must be at least 1");
  if (max_block_bytes < 1) throw Error(Errc::InvalidConfig, "max_block_bytes must be positive");
  if (batch_timeout.count() <= 0) throw Error(Errc::InvalidConfig, "batch_timeout must be positive");
  if (queue_capacity < 1) throw Error(Errc::InvalidConfig, "queue_capacity must be positive");
  if (mode == OrderingMode::Raft) {
    if (cluster.size() < 3 || cluster.size() % 2 == 0) {
      throw Error(Errc::InvalidConfig, "raft cluster size must be odd and at least 3, got " +
                                           std::to_string(cluster.size()));
    }
    if (std::set<NodeId>(cluster.begin(), cluster.end()).size() != cluster.size()) {
      throw Error(Errc::InvalidConfig, "raft cluster ids must be distinct");
    }
    if (election_timeout_min.count() <= 0 || election_timeout_max < election_timeout_min) {
      throw Error(Errc::InvalidConfig, "election timeout range is empty");
    }
    if (heartbeat_interval.count() <= 0 || heartbeat_interval >= election_timeout_min) {
      throw Error(Errc::InvalidConfig, "heartbeat interval must be below the election timeout");
    }
  }
}

std::vector<NodeId> OrderingConfig::members() const {
  if (mode == OrderingMode::Raft) return cluster;
  return {cluster.empty() ? NodeId("orderer0") : cluster.front()};
}

nlohmann::json OrderingConfig::to_json() const {
  return {
      {"mode", to_string(mode)},
      {"max_tx_per_block", max_tx_per_block},
      {"max_block_bytes", max_block_bytes},
      {"batch_timeout_ms", batch_timeout.count()},
      {"cluster", cluster},
      {"election_timeout_min_ms", election_timeout_min.count()},
      {"election_timeout_max_ms", election_timeout_max.count()},
      {"heartbeat_interval_ms", heartbeat_interval.count()},
      {"queue_capacity", queue_capacity},
  };
}

OrderingConfig OrderingConfig::from_json(const nlohmann::json& doc) {
  OrderingConfig c;
  try {
    if (doc.contains("mode")) c.mode = parse_ordering_mode(doc.at("mode").get<std::string>());
    c.max_tx_per_block = doc.value("max_tx_per_block", c.max_tx_per_block);
    c.max_block_bytes = doc.value("max_block_bytes", c.max_block_bytes);
    c.batch_timeout = std::chrono::milliseconds(doc.value("batch_timeout_ms", c.batch_timeout.count()));
    c.cluster = doc.value("cluster", c.cluster);
    c.election_timeout_min =
        std::chrono::milliseconds(doc.value("election_timeout_min_ms", c.election_timeout_min.count()));
    c.election_timeout_max =
        std::chrono::milliseconds(doc.value("election_timeout_max_ms", c.election_timeout_max.count()));
    c.heartbeat_interval = std::chrono::milliseconds(doc.value("heartbeat_interval_ms", c.heartbeat_interval.count()));
    c.queue_capacity = doc.value("queue_capacity", c.queue_capacity);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("ordering config: ") + e.what());
  }
  if (c.mode == OrderingMode::Raft && c.cluster.empty()) c.cluster = {"orderer0", "orderer1", "orderer2"};
  c.validate();
  return c;
}

}  // namespace donorchain::ordering
