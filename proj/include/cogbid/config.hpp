#pragma once

// JSON scenario files.
//
// A file either describes a scenario from scratch or starts from a built-in
// one through "base" and overrides fields. Channel and SU entries overlay the
// base entry at the same index; entries past the base's length start from the
// built-in defaults. See README.md for the full schema.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cogbid/sim.hpp"

namespace cogbid::config {

/// Parses and validates a scenario. Throws ConfigError naming every bad field.
sim::ScenarioConfig parse_config(std::string_view text);
sim::ScenarioConfig parse_config(const nlohmann::json& doc);
inline sim::ScenarioConfig parse_config(const char* text) { return parse_config(std::string_view(text)); }

sim::ScenarioConfig load_config(const std::filesystem::path& path);

/// Full description of a scenario; parse_config(to_json(c)) == c for resolved configs.
nlohmann::json to_json(const sim::ScenarioConfig& config);

/// Closest known name by edit distance, empty when nothing is close.
std::string suggest(std::string_view word, std::span<const std::string_view> known);

}  // namespace cogbid::config
