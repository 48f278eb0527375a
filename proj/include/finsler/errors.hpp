#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Malformed configuration, norm spec or CLI input. Maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative solver stopped without meeting its tolerance. Maps to exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A norm that violates the positive-definiteness assumption was handed to a
/// solver that needs it.
class AssumptionViolation : public std::invalid_argument {
 public:
  explicit AssumptionViolation(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace finsler
