#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cogbid {

/// Invalid probabilities or rate tables in an environment model.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mismatched list lengths, state shapes or matrix sizes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a function (negative counts and the like).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Instance too large for an exhaustive routine, or a window longer than the data.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Scenario or policy configuration that violates one or more invariants.
/// Carries every violation, not just the first one found.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  explicit ConfigError(const std::string& violation);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Output location that cannot be created or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cogbid
