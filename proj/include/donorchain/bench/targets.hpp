#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "donorchain/bench/driver.hpp"
#include "donorchain/network/network.hpp"

namespace donorchain::bench {

// Creates are addDonor invocations with fresh IDs; reads are getDonor
// queries over a pool of donors written during setup.
inline constexpr std::uint32_t kReadPoolSize = 100;

// Donor registration body for bench record `id`; attributes vary with the index.
nlohmann::json bench_donor(const std::string& id, std::uint64_t index);

// Talks to an in-process Network as one wallet identity.
class NetworkTarget final : public Target {
 public:
  NetworkTarget(network::Network& net, network::ClientIdentity client, std::string channel,
                std::string chaincode = "donation", std::chrono::milliseconds commit_timeout = std::chrono::seconds(30));

  std::string describe() const override;
  void setup(const WorkloadConfig& config) override;
  std::string prepare(Operation op, std::uint64_t index) override;
  TxOutcome send(Operation op, const std::string& request) override;

 private:
  network::Network& net_;
  network::ClientIdentity client_;
  std::string channel_;
  std::string chaincode_;
  std::chrono::milliseconds commit_timeout_;
  std::string run_tag_;
  std::vector<std::string> read_pool_;
};

// Talks to a RestServer. Logs in during setup with the identity's key seed.
class HttpTarget final : public Target {
 public:
  HttpTarget(std::string host, int port, std::string identity_id, std::string key_seed_hex);

  std::string describe() const override;
  void setup(const WorkloadConfig& config) override;
  std::string prepare(Operation op, std::uint64_t index) override;
  TxOutcome send(Operation op, const std::string& request) override;

 private:
  std::string host_;
  int port_;
  std::string identity_id_;
  std::string key_seed_hex_;
  std::string token_;
  std::string run_tag_;
  std::vector<std::string> read_pool_;
};

}  // namespace donorchain::bench
