#pragma once

// The aggregated property suite behind `finsler verify`.

#include <string>
#include <vector>

#include "finsler/config.hpp"

namespace finsler {

struct VerifyCheck {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;

  bool passed() const;
  /// Machine-readable report; deterministic for a fixed configuration.
  std::string to_json() const;
};

/// Runs the norm identities, constants oracles, Bessel check, Pohozaev
/// residuals over config.p_list and the radial-vs-planar cross-check. Check
/// tolerances are fixed; the configuration only sets solver tolerances, the
/// seed and the p list. Throws AssumptionViolation when the configuration asks
/// for a planar solve with a norm that fails the assumption check.
VerifyReport verify_all(const RunConfig& config);

}  // namespace finsler
