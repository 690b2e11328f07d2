#pragma once

#include <string>
#include <vector>

#include "donorchain/bench/driver.hpp"
#include "donorchain/bench/metrics.hpp"
#include "donorchain/bench/workload.hpp"

namespace donorchain::bench {

struct RoundReport {
  WorkloadConfig config;
  Metrics metrics;
  std::uint32_t max_in_flight = 0;

  static RoundReport from(const RoundResult& result);
  nlohmann::json to_json() const;
  static RoundReport from_json(const nlohmann::json& doc);
};

struct BenchmarkReport {
  std::string target;
  std::vector<RoundReport> rounds;

  nlohmann::json to_json() const;
  static BenchmarkReport from_json(const nlohmann::json& doc);

  // Fixed-load rounds in one table, fixed-rate rounds in another, columns
  // ordered the way the published results are laid out.
  std::string render_text() const;
};

}  // namespace donorchain::bench
