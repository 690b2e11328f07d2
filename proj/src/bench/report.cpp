#include "donorchain/bench/report.hpp"

#include <cstdio>
#include <sstream>

namespace donorchain::bench {

using nlohmann::json;

RoundReport RoundReport::from(const RoundResult& result) {
  return {result.config, aggregate_parallel(result.observations), result.max_in_flight};
}

json RoundReport::to_json() const {
  return {{"config", config.to_json()}, {"metrics", metrics.to_json()}, {"max_in_flight", max_in_flight}};
}

RoundReport RoundReport::from_json(const json& doc) {
  return {WorkloadConfig::from_json(doc.at("config")), Metrics::from_json(doc.at("metrics")),
          doc.value("max_in_flight", 0u)};
}

json BenchmarkReport::to_json() const {
  json rs = json::array();
  for (const auto& r : rounds) rs.push_back(r.to_json());
  return {{"target", target}, {"rounds", rs}};
}

BenchmarkReport BenchmarkReport::from_json(const json& doc) {
  BenchmarkReport out;
  out.target = doc.value("target", "");
  for (const auto& r : doc.at("rounds")) out.rounds.push_back(RoundReport::from_json(r));
  return out;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    out << '|';
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out << ' ' << cells[c] << std::string(width[c] - cells[c].size(), ' ') << " |";
    }
    out << '\n';
  };
  line(header);
  out << '|';
  for (auto w : width) out << std::string(w + 2, '-') << '|';
  out << '\n';
  for (const auto& row : rows) line(row);
  return out.str();
}

std::vector<std::string> latency_cells(const Metrics& m) {
  return {fixed(m.latency_max_s, 2), fixed(m.latency_min_s, 2), fixed(m.latency_avg_s, 2),
          fixed(m.throughput_tps, 1), std::to_string(m.succeeded), std::to_string(m.failed)};
}

}  // namespace

std::string BenchmarkReport::render_text() const {
  std::vector<std::vector<std::string>> load_rows, rate_rows;
  for (const auto& r : rounds) {
    std::vector<std::string> row{r.config.name};
    if (r.config.mode == Mode::FixedLoad) {
      row.push_back(std::to_string(r.config.load.value_or(0)));
      row.push_back(fixed(r.metrics.send_rate_tps, 1));
      for (auto& c : latency_cells(r.metrics)) row.push_back(std::move(c));
      load_rows.push_back(std::move(row));
    } else {
      row.push_back(fixed(r.config.rate_tps.value_or(0), 1));
      row.push_back(fixed(r.metrics.send_rate_tps, 1));
      for (auto& c : latency_cells(r.metrics)) row.push_back(std::move(c));
      rate_rows.push_back(std::move(row));
    }
  }

  std::ostringstream out;
  if (!target.empty()) out << "Target: " << target << "\n\n";
  if (!load_rows.empty()) {
    out << "Fixed transaction load\n"
        << render_table({"Name", "Transaction Load", "Send Rate (TPS)", "Max Latency (s)", "Min Latency (s)",
                         "Avg Latency (s)", "Throughput (TPS)", "Succ", "Fail"},
                        load_rows);
  }
  if (!rate_rows.empty()) {
    if (!load_rows.empty()) out << '\n';
    out << "Fixed send rate\n"
        << render_table({"Name", "Configured Send Rate (TPS)", "Achieved Send Rate (TPS)", "Max Latency (s)",
                         "Min Latency (s)", "Avg Latency (s)", "Throughput (TPS)", "Succ", "Fail"},
                        rate_rows);
  }
  return out.str();
}

}  // namespace donorchain::bench
