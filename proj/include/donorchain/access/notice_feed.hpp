#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "donorchain/network/network.hpp"

namespace donorchain::access {

// A pickup order for the transporters: the organ travels from the donor's
// hospital to the patient's.
struct TransportNotice {
  std::uint64_t id = 0;  // 1, 2, 3, ... in commit order
  std::string tx_id;
  std::string patient_id;
  std::string donor_id;
  std::string organ;
  std::string source_org;
  std::string destination_org;
  std::uint64_t block_number = 0;
  std::int64_t block_timestamp_ms = 0;

  nlohmann::json to_json() const;
  bool operator==(const TransportNotice&) const = default;
};

// Every committed MatchSelected event on a channel, as notices. Built from
// the reference peer's chain at construction and extended from commit
// events, so a fresh feed replays everything that was ever committed.
class NoticeFeed {
 public:
  NoticeFeed(network::Network& net, std::string channel);
  NoticeFeed(const NoticeFeed&) = delete;
  NoticeFeed& operator=(const NoticeFeed&) = delete;
  ~NoticeFeed();

  std::vector<TransportNotice> after(std::uint64_t last_id) const;
  // Blocks until a notice newer than last_id exists, the timeout passes or
  // stop() is called.
  std::vector<TransportNotice> wait_after(std::uint64_t last_id, std::chrono::milliseconds timeout) const;
  std::uint64_t last_id() const;
  void stop();

 private:
  void append_locked(const std::string& tx_id, const ledger::ChaincodeEvent& event, std::uint64_t block,
                     std::int64_t timestamp_ms);

  network::Network& net_;
  std::string channel_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<TransportNotice> notices_;
  std::uint64_t scanned_height_ = 0;
  std::uint64_t subscription_ = 0;
  bool stopped_ = false;
};

}  // namespace donorchain::access
