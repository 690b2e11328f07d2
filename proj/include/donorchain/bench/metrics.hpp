#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

namespace donorchain::bench {

// Times are nanoseconds on the driver's monotonic clock.
struct TxObservation {
  std::string tx_id;
  std::int64_t issued_ns = 0;
  std::int64_t completed_ns = 0;
  bool success = false;
  std::string fail_reason;

  double latency_s() const { return static_cast<double>(completed_ns - issued_ns) * 1e-9; }
};

struct Metrics {
  std::uint64_t issued = 0;
  std::uint64_t succeeded = 0;
  std::uint64_t failed = 0;
  double window_s = 0;       // first issue to last completion
  double send_window_s = 0;  // first issue to last issue
  double send_rate_tps = 0;  // issued / send window
  double throughput_tps = 0;  // successes / window
  // Over successful transactions; zero when there are none.
  double latency_min_s = 0;
  double latency_max_s = 0;
  double latency_avg_s = 0;
  std::map<std::string, std::uint64_t> fail_reasons;

  nlohmann::json to_json() const;
  static Metrics from_json(const nlohmann::json& doc);
};

// Throws Error(EmptyObservations). With a single issue instant the send
// rate falls back to issued / window.
Metrics aggregate_serial(std::span<const TxObservation> observations);
// OpenMP reductions; equal to the serial version up to summation order.
Metrics aggregate_parallel(std::span<const TxObservation> observations);

}  // namespace donorchain::bench
