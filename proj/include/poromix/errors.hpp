#pragma once

#include <stdexcept>
#include <string>

namespace poromix {

/// Malformed or physically inadmissible configuration. CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A time step could not be completed (iteration stall, tau breakdown,
/// solver failure). CLI exit code 3.
struct StepFailure : std::runtime_error {
  explicit StepFailure(const std::string& what) : std::runtime_error(what) {}
};

/// A certified property (bounds, energy decay, conservation) was violated
/// by an accepted solution. CLI exit code 4.
struct InvariantViolation : std::runtime_error {
  explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace poromix
