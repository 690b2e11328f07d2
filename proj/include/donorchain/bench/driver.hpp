#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "donorchain/bench/metrics.hpp"
#include "donorchain/bench/workload.hpp"

namespace donorchain::bench {

struct TxOutcome {
  bool success = false;
  std::string tx_id;
  std::string fail_reason;
};

// A system under test. prepare() runs on the issuing thread and builds the
// request for transaction `index`; send() blocks until the outcome is known
// and may be called from many threads at once.
class Target {
 public:
  virtual ~Target() = default;
  virtual std::string describe() const = 0;
  // Called once per round before the clock starts (seeding reads, logging in).
  virtual void setup(const WorkloadConfig& config) = 0;
  virtual std::string prepare(Operation op, std::uint64_t index) = 0;
  virtual TxOutcome send(Operation op, const std::string& request) = 0;
};

struct DriverOptions {
  // Threads that carry fixed-rate transactions; a send that finds none idle
  // queues and its latency includes the wait.
  std::uint32_t send_threads = 512;
};

struct RoundResult {
  WorkloadConfig config;
  std::vector<TxObservation> observations;  // indexed by issue order
  std::uint32_t max_in_flight = 0;
};

// Runs one validated round. Throws Error(InvalidConfig) for a bad config and
// Error(TargetUnreachable) when setup fails.
RoundResult run_round(Target& target, const WorkloadConfig& config, const DriverOptions& options = {});

// Nanoseconds on the clock observations use.
std::int64_t monotonic_ns();

}  // namespace donorchain::bench
