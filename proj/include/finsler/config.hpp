#pragma once

// Run configuration shared by the command line tool and the verification
// suite. Files are UTF-8 `key = value` lines; `#` starts a comment.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/sweep.hpp"

namespace finsler {

struct RunConfig {
  std::string norm = "euclidean";
  int dim = 2;
  SolverKind solver = SolverKind::radial;
  std::string domain = "disk";
  double radius = 1.0;
  std::vector<double> p_list{10, 20, 50, 100, 200, 400, 800};
  double rtol = 1e-8;       ///< radial ODE relative tolerance
  double grad_tol = 1e-7;   ///< planar stopping tolerance
  int max_iters = 5000;
  double mesh_h = 1.0 / 64;
  bool continuation = true;
  int quad_budget = 64;     ///< multistart budget for d_N and the numeric dual
  std::uint64_t seed = 42;
  std::string out = "out";
  FitModel model = FitModel::logp;
  unsigned threads = 0;     ///< 0 = hardware concurrency
};

/// Parses a configuration file body. Unknown keys, malformed values, bad norm
/// specs and p <= 1 raise ConfigError with a "line N:" prefix.
RunConfig parse_config(std::string_view text);

/// Reads and parses a file; I/O failures raise ConfigError naming the path.
RunConfig load_config(const std::string& path);

/// Comma-separated, strictly increasing p values > 1. Errors quote the
/// offending token.
std::vector<double> parse_p_list(std::string_view text);

/// Cross-field checks (norm spec against dim, ranges). Throws ConfigError.
void validate(const RunConfig& config);

SweepConfig to_sweep_config(const RunConfig& config);

}  // namespace finsler
