#include "cogbid/errors.hpp"

#include <utility>

namespace cogbid {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out = "invalid configuration:";
  for (const auto& s : items) out += "\n  - " + s;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

ConfigError::ConfigError(const std::string& violation)
    : ConfigError(std::vector<std::string>{violation}) {}

}  // namespace cogbid
