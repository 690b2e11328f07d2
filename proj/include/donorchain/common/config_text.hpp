#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace donorchain {

// Parses YAML (and therefore JSON) into a JSON document. Unquoted scalars
// that read as integers, reals, booleans or null become those types.
// Throws Error(InvalidConfig) naming `what` on syntax errors.
nlohmann::json parse_config_text(const std::string& text, std::string_view what);

}  // namespace donorchain
