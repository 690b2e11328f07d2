#include "donorchain/bench/metrics.hpp"

#include <algorithm>
#include <limits>

#include "donorchain/common/error.hpp"

namespace donorchain::bench {

namespace {

struct Extremes {
  std::int64_t first_issue = std::numeric_limits<std::int64_t>::max();
  std::int64_t last_issue = std::numeric_limits<std::int64_t>::min();
  std::int64_t last_completion = std::numeric_limits<std::int64_t>::min();
  std::uint64_t succeeded = 0;
  double latency_sum = 0;
  double latency_min = std::numeric_limits<double>::infinity();
  double latency_max = -std::numeric_limits<double>::infinity();
};

Metrics finish(const Extremes& x, std::span<const TxObservation> observations) {
  Metrics m;
  m.issued = observations.size();
  m.succeeded = x.succeeded;
  m.failed = m.issued - m.succeeded;
  for (const auto& o : observations) {
    if (!o.success) ++m.fail_reasons[o.fail_reason.empty() ? "unknown" : o.fail_reason];
  }
  m.window_s = static_cast<double>(x.last_completion - x.first_issue) * 1e-9;
  m.send_window_s = static_cast<double>(x.last_issue - x.first_issue) * 1e-9;
  if (m.send_window_s > 0) {
    m.send_rate_tps = static_cast<double>(m.issued) / m.send_window_s;
  } else if (m.window_s > 0) {
    m.send_rate_tps = static_cast<double>(m.issued) / m.window_s;
  }
  if (m.window_s > 0) m.throughput_tps = static_cast<double>(m.succeeded) / m.window_s;
  if (m.succeeded > 0) {
    m.latency_min_s = x.latency_min;
    m.latency_max_s = x.latency_max;
    m.latency_avg_s = x.latency_sum / static_cast<double>(m.succeeded);
  }
  return m;
}

}  // namespace

nlohmann::json Metrics::to_json() const {
  return {{"issued", issued},
          {"succeeded", succeeded},
          {"failed", failed},
          {"window_s", window_s},
          {"send_window_s", send_window_s},
          {"send_rate_tps", send_rate_tps},
          {"throughput_tps", throughput_tps},
          {"latency_min_s", latency_min_s},
          {"latency_max_s", latency_max_s},
          {"latency_avg_s", latency_avg_s},
          {"fail_reasons", fail_reasons}};
}

Metrics Metrics::from_json(const nlohmann::json& doc) {
  Metrics m;
  m.issued = doc.at("issued").get<std::uint64_t>();
  m.succeeded = doc.at("succeeded").get<std::uint64_t>();
  m.failed = doc.at("failed").get<std::uint64_t>();
  m.window_s = doc.at("window_s").get<double>();
  m.send_window_s = doc.at("send_window_s").get<double>();
  m.send_rate_tps = doc.at("send_rate_tps").get<double>();
  m.throughput_tps = doc.at("throughput_tps").get<double>();
  m.latency_min_s = doc.at("latency_min_s").get<double>();
  m.latency_max_s = doc.at("latency_max_s").get<double>();
  m.latency_avg_s = doc.at("latency_avg_s").get<double>();
  m.fail_reasons = doc.value("fail_reasons", std::map<std::string, std::uint64_t>{});
  return m;
}

Metrics aggregate_serial(std::span<const TxObservation> observations) {
  if (observations.empty()) throw Error(Errc::EmptyObservations, "no observations to aggregate");
  Extremes x;
  for (const auto& o : observations) {
    x.first_issue = std::min(x.first_issue, o.issued_ns);
    x.last_issue = std::max(x.last_issue, o.issued_ns);
    x.last_completion = std::max(x.last_completion, o.completed_ns);
    if (o.success) {
      auto l = o.latency_s();
      ++x.succeeded;
      x.latency_sum += l;
      x.latency_min = std::min(x.latency_min, l);
      x.latency_max = std::max(x.latency_max, l);
    }
  }
  return finish(x, observations);
}

Metrics aggregate_parallel(std::span<const TxObservation> observations) {
  if (observations.empty()) throw Error(Errc::EmptyObservations, "no observations to aggregate");
  const auto n = static_cast<long>(observations.size());
  const auto* obs = observations.data();
  std::int64_t first_issue = std::numeric_limits<std::int64_t>::max();
  std::int64_t last_issue = std::numeric_limits<std::int64_t>::min();
  std::int64_t last_completion = std::numeric_limits<std::int64_t>::min();
  std::uint64_t succeeded = 0;
  double latency_sum = 0;
  double latency_min = std::numeric_limits<double>::infinity();
  double latency_max = -std::numeric_limits<double>::infinity();

#pragma omp parallel for reduction(min : first_issue, latency_min) \
    reduction(max : last_issue, last_completion, latency_max) reduction(+ : succeeded, latency_sum)
  for (long i = 0; i < n; ++i) {
    const auto& o = obs[i];
    first_issue = std::min(first_issue, o.issued_ns);
    last_issue = std::max(last_issue, o.issued_ns);
    last_completion = std::max(last_completion, o.completed_ns);
    if (o.success) {
      auto l = o.latency_s();
      ++succeeded;
      latency_sum += l;
      latency_min = std::min(latency_min, l);
      latency_max = std::max(latency_max, l);
    }
  }

  Extremes x{first_issue, last_issue, last_completion, succeeded, latency_sum, latency_min, latency_max};
  return finish(x, observations);
}

}  // namespace donorchain::bench
