#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace donorchain::bench {

enum class Operation { CreateRecord, ReadRecord };
enum class Mode { FixedLoad, FixedRate };

std::string_view to_string(Operation op) noexcept;
std::string_view to_string(Mode mode) noexcept;
// Accepts the enum names and the kebab forms ("create", "fixed-load", ...).
Operation parse_operation(std::string_view s);
Mode parse_mode(std::string_view s);

// One benchmark round. FixedLoad keeps `load` transactions in flight until
// total_tx have been issued; FixedRate issues on a uniform schedule at
// rate_tps no matter how many are still outstanding.
struct WorkloadConfig {
  std::string name;
  Operation operation = Operation::CreateRecord;
  Mode mode = Mode::FixedLoad;
  std::optional<std::uint32_t> load;
  std::optional<double> rate_tps;
  std::uint32_t total_tx = 1000;
  std::uint32_t workers = 4;
  std::uint64_t seed = 1;

  // Throws Error(InvalidConfig).
  void validate() const;

  nlohmann::json to_json() const;
  static WorkloadConfig from_json(const nlohmann::json& doc);
  // YAML or JSON; a single round or {rounds: [...]}.
  static std::vector<WorkloadConfig> parse_rounds(const std::string& text);
};

}  // namespace donorchain::bench
