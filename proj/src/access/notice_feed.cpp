#include "donorchain/access/notice_feed.hpp"

#include <spdlog/spdlog.h>

#include "donorchain/chaincode/donation.hpp"

namespace donorchain::access {

nlohmann::json TransportNotice::to_json() const {
  return {{"id", id},
          {"txId", tx_id},
          {"patientId", patient_id},
          {"donorId", donor_id},
          {"organ", organ},
          {"sourceHospital", source_org},
          {"destinationHospital", destination_org},
          {"blockNumber", block_number},
          {"blockTimestampMs", block_timestamp_ms}};
}

NoticeFeed::NoticeFeed(network::Network& net, std::string channel) : net_(net), channel_(std::move(channel)) {
  std::lock_guard lock(mu_);
  network::EventFilter filter{std::nullopt, std::string(chaincode::kMatchSelectedEvent)};
  subscription_ = net_.subscribe(channel_, filter, [this](const network::CommitEvent& e) {
    std::lock_guard inner(mu_);
    if (e.block_number < scanned_height_ || !e.event) return;
    append_locked(e.tx_id, *e.event, e.block_number, e.block_timestamp_ms);
    cv_.notify_all();
  });

  auto peers = net_.channel_peers(channel_);
  if (peers.empty()) return;
  const auto& store = net_.peer(peers.front()).ledger(channel_).store();
  store.for_each_block([&](const ledger::Block& block) {
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
      const auto& tx = block.transactions[i];
      bool valid = i < block.metadata.validation_flags.size() &&
                   block.metadata.validation_flags[i] == ledger::ValidationFlag::Valid;
      if (valid && tx.event && tx.event->name == chaincode::kMatchSelectedEvent) {
        append_locked(tx.tx_id, *tx.event, block.header.number, block.metadata.timestamp_ms);
      }
    }
    scanned_height_ = block.header.number + 1;
  });
}

NoticeFeed::~NoticeFeed() {
  stop();
  try {
    net_.unsubscribe(channel_, subscription_);
  } catch (const std::exception& e) {
    spdlog::debug("notice feed unsubscribe: {}", e.what());
  }
}

void NoticeFeed::append_locked(const std::string& tx_id, const ledger::ChaincodeEvent& event, std::uint64_t block,
                               std::int64_t timestamp_ms) {
  nlohmann::json payload;
  try {
    payload = nlohmann::json::parse(event.payload);
  } catch (const nlohmann::json::exception& e) {
    spdlog::warn("skipping malformed MatchSelected payload in {}: {}", tx_id, e.what());
    return;
  }
  TransportNotice n;
  n.id = notices_.size() + 1;
  n.tx_id = tx_id;
  n.patient_id = payload.value("patientId", "");
  n.donor_id = payload.value("donorId", "");
  n.organ = payload.value("organ", "");
  n.source_org = payload.value("donorHospital", "");
  n.destination_org = payload.value("patientHospital", "");
  n.block_number = block;
  n.block_timestamp_ms = timestamp_ms;
  notices_.push_back(std::move(n));
}

std::vector<TransportNotice> NoticeFeed::after(std::uint64_t last_id) const {
  std::lock_guard lock(mu_);
  if (last_id >= notices_.size()) return {};
  return {notices_.begin() + static_cast<std::ptrdiff_t>(last_id), notices_.end()};
}

std::vector<TransportNotice> NoticeFeed::wait_after(std::uint64_t last_id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return stopped_ || notices_.size() > last_id; });
  if (last_id >= notices_.size()) return {};
  return {notices_.begin() + static_cast<std::ptrdiff_t>(last_id), notices_.end()};
}

std::uint64_t NoticeFeed::last_id() const {
  std::lock_guard lock(mu_);
  return notices_.size();
}

void NoticeFeed::stop() {
  std::lock_guard lock(mu_);
  stopped_ = true;
  cv_.notify_all();
}

}  // namespace donorchain::access
