#pragma once

#include <stdexcept>
#include <string>

namespace digs {

/// Raised when a caller breaks a documented precondition (bad dimension,
/// non-positive scale, malformed schedule, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised while resolving an experiment or sampler configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace digs
