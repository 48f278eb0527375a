#pragma once

// p-sweeps over the radial and planar solvers, asymptotic fits, and the
// CSV / JSON artifacts they produce.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "finsler/norms.hpp"
#include "finsler/planar.hpp"

namespace finsler {

enum class SolverKind { radial, planar };

SolverKind parse_solver(const std::string& name);
std::string to_string(SolverKind solver);

/// One row of a sweep. Every quantity except p is optional: a field is empty
/// when the solver does not define it or when the solve for this p failed.
struct SweepRecord {
  double p = 0.0;
  std::optional<double> Cp, pN1Cp, energy, pN1energy, massp1, pN1massp1, umax, lambdap, plambdap, L0est, dingmass,
      greensup, peakdist, gammahat;
  /// Natural log of the Green sup error; stays finite when greensup underflows.
  std::optional<double> log_greensup;
  std::string status = "ok";  ///< "ok" or a failure message

  bool ok() const { return status == "ok"; }
  bool operator==(const SweepRecord&) const = default;
};

/// CSV column names in emit order; the first is p.
const std::array<const char*, 15>& sweep_columns();

struct SweepConfig {
  SolverKind solver = SolverKind::radial;
  std::string norm = "euclidean";
  int dim = 2;
  std::string domain = "disk";  ///< planar only: square, disk or polygon:<file>
  double radius = 1.0;          ///< radial only: the Wulff ball W_R
  std::vector<double> p_list{10, 20, 50, 100, 200, 400, 800};
  double rtol = 1e-8;
  double mesh_h = 1.0 / 64;
  SolveConfig planar;  ///< p is overwritten per record
  double green_s0 = 0.3, green_s1 = 0.9;  ///< annulus s0 R <= H0 <= s1 R
  std::string dump_dir;  ///< when set: radial profiles phi_pNNN.csv, planar fields u_pNNN.txt
};

/// Runs one solve per p. Radial solves run concurrently; planar solves run
/// concurrently unless continuation is on, in which case each p warm-starts
/// from the previous minimizer. Records come back ordered by p. Failures are
/// recorded per p; ConfigError and AssumptionViolation are thrown before any
/// solve.
std::vector<SweepRecord> run_sweep(const SweepConfig& config);

enum class FitModel { logp, p, plogp };  ///< a + b/log p, a + b/p, a + b log p / p

FitModel parse_model(const std::string& name);
std::string to_string(FitModel model);
std::string formula(FitModel model);

struct ExtrapolationResult {
  FitModel model = FitModel::logp;
  double a = 0.0;  ///< limit estimate
  double b = 0.0;
  double residual = 0.0;  ///< root-mean-square fit residual
  std::vector<double> p_used;
  double condition = 0.0;  ///< condition number of the column-scaled design matrix
  bool ill_conditioned = false;
};

/// Least-squares fit of `model` to the largest-p half of the series (at least
/// two points). Needs at least four points with distinct p > 1; throws
/// ConfigError otherwise.
ExtrapolationResult extrapolate(std::vector<std::pair<double, double>> series, FitModel model);

/// Fits all three models and returns them in enum order.
std::vector<ExtrapolationResult> extrapolate_all(const std::vector<std::pair<double, double>>& series);

/// Index of the smallest-residual fit among the well-conditioned ones.
std::size_t best_fit(const std::vector<ExtrapolationResult>& fits);

/// (p, field) pairs of the successful records where the field is defined.
std::vector<std::pair<double, double>> series(const std::vector<SweepRecord>& records,
                                              std::optional<double> SweepRecord::*field);

/// Shortest round-trip decimal form.
std::string format_double(double v);

std::string to_csv(const std::vector<SweepRecord>& records);
/// Inverse of to_csv; throws ConfigError on malformed input.
std::vector<SweepRecord> parse_csv(const std::string& text);

/// JSON text with a "metadata" object describing the run and a "records" array.
std::string to_json(const std::vector<SweepRecord>& records, const SweepConfig& config);

/// Writes sweep.csv, sweep.json, extrapolation.json and sweep.plt into `dir`,
/// creating it if needed. Errors name the path.
void emit(const std::vector<SweepRecord>& records, const SweepConfig& config, FitModel model, const std::string& dir);

}  // namespace finsler
