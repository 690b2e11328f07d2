#include "donorchain/bench/workload.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "donorchain/common/config_text.hpp"
#include "donorchain/common/error.hpp"

namespace donorchain::bench {

namespace {

std::string normalize(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::string_view to_string(Operation op) noexcept {
  return op == Operation::CreateRecord ? "CreateRecord" : "ReadRecord";
}

std::string_view to_string(Mode mode) noexcept { return mode == Mode::FixedLoad ? "FixedLoad" : "FixedRate"; }

Operation parse_operation(std::string_view s) {
  auto n = normalize(s);
  if (n == "createrecord" || n == "create") return Operation::CreateRecord;
  if (n == "readrecord" || n == "read") return Operation::ReadRecord;
  throw Error(Errc::InvalidConfig, "unknown operation '" + std::string(s) + "'");
}

Mode parse_mode(std::string_view s) {
  auto n = normalize(s);
  if (n == "fixedload") return Mode::FixedLoad;
  if (n == "fixedrate") return Mode::FixedRate;
  throw Error(Errc::InvalidConfig, "unknown mode '" + std::string(s) + "'");
}

void WorkloadConfig::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(Errc::InvalidConfig, "workload " + (name.empty() ? std::string("<unnamed>") : name) + ": " + what);
  };
  if (total_tx < 1) fail("total_tx must be at least 1");
  if (workers < 1) fail("workers must be at least 1");
  if (mode == Mode::FixedLoad) {
    if (!load || *load < 1) fail("fixed-load needs load >= 1");
    if (rate_tps) fail("fixed-load takes no rate_tps");
  } else {
    if (!rate_tps || !(*rate_tps > 0) || !std::isfinite(*rate_tps)) fail("fixed-rate needs rate_tps > 0");
    if (load) fail("fixed-rate takes no load");
  }
}

nlohmann::json WorkloadConfig::to_json() const {
  nlohmann::json out{{"name", name},         {"operation", to_string(operation)},
                     {"mode", to_string(mode)}, {"total_tx", total_tx},
                     {"workers", workers},   {"seed", seed}};
  if (load) out["load"] = *load;
  if (rate_tps) out["rate_tps"] = *rate_tps;
  return out;
}

WorkloadConfig WorkloadConfig::from_json(const nlohmann::json& doc) {
  WorkloadConfig c;
  try {
    c.name = doc.value("name", "");
    c.operation = parse_operation(doc.at("operation").get<std::string>());
    c.mode = parse_mode(doc.at("mode").get<std::string>());
    if (doc.contains("load")) {
      auto v = doc.at("load").get<std::int64_t>();
      if (v < 1) throw Error(Errc::InvalidConfig, "load must be positive");
      c.load = static_cast<std::uint32_t>(v);
    }
    if (doc.contains("rate_tps")) c.rate_tps = doc.at("rate_tps").get<double>();
    auto total = doc.value("total_tx", std::int64_t{1000});
    if (total < 0) throw Error(Errc::InvalidConfig, "total_tx must be positive");
    c.total_tx = static_cast<std::uint32_t>(total);
    auto workers = doc.value("workers", std::int64_t{4});
    if (workers < 0) throw Error(Errc::InvalidConfig, "workers must be positive");
    c.workers = static_cast<std::uint32_t>(workers);
    c.seed = doc.value("seed", std::uint64_t{1});
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("workload: ") + e.what());
  }
  if (c.name.empty()) c.name = std::string(to_string(c.operation));
  c.validate();
  return c;
}

std::vector<WorkloadConfig> WorkloadConfig::parse_rounds(const std::string& text) {
  auto doc = parse_config_text(text, "workload");
  std::vector<WorkloadConfig> out;
  if (doc.is_object() && doc.contains("rounds")) {
    for (const auto& r : doc["rounds"]) out.push_back(from_json(r));
  } else if (doc.is_array()) {
    for (const auto& r : doc) out.push_back(from_json(r));
  } else {
    out.push_back(from_json(doc));
  }
  return out;
}

}  // namespace donorchain::bench
