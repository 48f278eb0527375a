#pragma once

// Least energy solutions, C_p and lambda_1 on planar polygons (N = 2) with P1
// elements and lumped mass. The L^{p+1} constraint is enforced by
// renormalization; the descent direction is the gradient in the metric of the
// stiffness matrix of the quadratic part of the norm (a Sobolev gradient), so
// for ellipse norms a unit step is one step of nonlinear inverse iteration.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "finsler/mesh.hpp"
#include "finsler/norms.hpp"

namespace finsler {

struct PlanarField {
  std::shared_ptr<const Mesh> mesh;
  Eigen::VectorXd values;  ///< nodal values, 0 on boundary nodes

  PlanarField() = default;
  PlanarField(std::shared_ptr<const Mesh> m, Eigen::VectorXd v) : mesh(std::move(m)), values(std::move(v)) {}
};

struct SolveConfig {
  double p = 3.0;
  int max_iters = 5000;
  double grad_tol = 1e-7;
  double armijo = 1e-4;    ///< sufficient decrease constant
  double shrink = 0.5;     ///< backtracking factor
  double step = 0.5;       ///< first trial step; 0.5 is inverse iteration for quadratic norms
  bool continuation = true;
  std::uint64_t seed = 42;
};

/// Lumped (vertex) masses: one third of the adjacent triangle areas.
Eigen::VectorXd lumped_mass(const Mesh& mesh);

/// sum over triangles of area * H(grad u)^2. Throws ConfigError on degenerate
/// triangles and AssumptionViolation for N != 2.
double assemble_energy(const PlanarField& field, const NormModel& norm);

/// Gradient of assemble_energy with respect to nodal values.
Eigen::VectorXd energy_gradient(const PlanarField& field, const NormModel& norm);

struct CpResult {
  PlanarField u_bar;  ///< minimizer, sum m_i |u_i|^{p+1} = 1, u >= 0
  double Cp = 0.0;
  double grad_norm = 0.0;  ///< relative Sobolev norm of the projected gradient
  int iterations = 0;
  bool converged = false;
  bool stalled = false;  ///< stopped because no step could reduce J or the gradient at working precision
  std::vector<double> history;  ///< energy of the normalized iterate after each accepted step
};

/// Minimizes E(u) / (sum m |u|^{p+1})^{2/(p+1)}. Returns with converged = false
/// when max_iters is reached or the iteration stalls at working precision
/// (gradient norms below about 1e-8 are not always reachable); throws ConvergenceError if the iterate
/// collapses (sup norm above 1e6) and AssumptionViolation for norms failing
/// check_assumptions.
CpResult minimize_cp(std::shared_ptr<const Mesh> mesh, const NormModel& norm, const SolveConfig& config,
                     const PlanarField* warm_start = nullptr);

/// u_p = Cp^{1/(p-1)} u_bar.
PlanarField least_energy_solution(const PlanarField& u_bar, double Cp, double p);

/// Weak-form residual of -Q_2 u = u^p: max_i |(1/2) dE/du_i - m_i u_i^p| over
/// interior nodes, divided by max_i m_i u_i^p.
double weak_residual(const PlanarField& u, const NormModel& norm, double p);

struct EigenResult {
  double lambda = 0.0;
  PlanarField u;  ///< sum m u^2 = 1
  int iterations = 0;
  bool converged = false;
};

/// lambda_1 = min E(u) / sum m u^2, by the same iteration with p = 1.
EigenResult first_eigenvalue(std::shared_ptr<const Mesh> mesh, const NormModel& norm, const SolveConfig& config);

struct BlowupRow {
  double p = 0.0;
  Point peak = Point::Zero();          ///< argmax node
  Point peak_refined = Point::Zero();  ///< vertex of a quadratic fit over the peak's 1-ring; reporting only
  double peak_dist = 0.0;  ///< Euclidean distance from the peak node to the boundary
  double umax = 0.0;
  double lambda_p = 0.0;   ///< int u_p^p
  double p_lambda = 0.0;
  double L0_estimate = 0.0;
  double L1_estimate = 0.0;
  double gamma_lower = 0.0;  ///< (beta_N / L1)^{N-1}
  std::array<double, 3> gamma_hat{};  ///< mass of f_p = u^p / int u^p in H0-balls of radius {0.05, 0.1, 0.2} diam
  int local_maxima = 0;      ///< nodes not below any neighbour and above half the maximum
  Eigen::VectorXd v;         ///< u_p / lambda_p
};

/// Blow-up diagnostics for least energy solutions u_p on a fixed mesh.
std::vector<BlowupRow> blowup_diagnostics(const std::vector<std::pair<double, PlanarField>>& sequence,
                                          const NormModel& norm, double d_N, double beta_N);

/// sup over nodes with s0 <= H0(x) <= s1 of |v - (2 kappa)^{-1} log(R/H0(x))|.
double planar_green_error(const PlanarField& v, const NormModel& norm, double kappa, double R, double s0, double s1);

}  // namespace finsler
