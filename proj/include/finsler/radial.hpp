#pragma once

// Radial least energy solutions on Wulff balls. With u(x) = c phi(a H0(x)),
// -Q_N u = u^p on W_R reduces to the profile equation
//   (r^{N-1} |phi'|^{N-2} phi')' = -r^{N-1} phi^p,  phi(0) = 1, phi'(0) = 0,
// integrated up to the first zero R1 of phi. See docs/radial-reduction.md.
//
// The integration variable is t = log r. State: w = 1 - phi,
// S = r^{N-1} |phi'|^{N-1}, and the running integrals
//   I_E = int |phi'|^N r^{N-1} dr,   I_{p+1} = int phi^{p+1} r^{N-1} dr.

#include <string>
#include <vector>

#include "finsler/norms.hpp"
#include "finsler/ode.hpp"

namespace finsler {

using RadialTrajectory = Trajectory<double, 4>;

struct ShootOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double r0 = 1e-6;      ///< series start radius
  double t_max = 2000;   ///< give up when log r exceeds this
};

struct RadialProfile {
  double p = 0.0;
  int N = 0;
  std::vector<double> r, phi, dphi;  ///< accepted-step grid, including r0 and R1
  double R1 = 0.0;
  double t1 = 0.0;        ///< log R1, kept separately since R1 overflows for huge p
  double S1 = 0.0;        ///< R1^{N-1} |phi'(R1)|^{N-1} = int_0^R1 phi^p r^{N-1} dr
  double I_energy = 0.0;  ///< int_0^R1 |phi'|^N r^{N-1} dr
  double I_p1 = 0.0;      ///< int_0^R1 phi^{p+1} r^{N-1} dr
  double residual = 0.0;  ///< ODE residual on the output grid, in units of the step weights times rtol
  double rtol = 0.0;
  double t0 = 0.0;        ///< log r0
  RadialTrajectory trajectory;

  /// w = 1 - phi as a function of t = log r, series below r0 and 1 beyond R1.
  double w_at(double t) const;
  double phi_at(double r) const { return 1.0 - w_at(std::log(r)); }
};

/// Shoots from the series start and stops at the first zero of phi. p >= 1.
/// Throws ConfigError on bad parameters, ConvergenceError when no zero is
/// found before t_max or when step control underflows.
RadialProfile shoot(int N, double p, double rtol = 1e-8);
RadialProfile shoot(int N, double p, const ShootOptions& options);

struct RadialSolution {
  RadialProfile profile;
  std::string norm;
  int N = 0;
  double p = 0.0;
  double R = 0.0;
  double kappa = 0.0;
  double log_a = 0.0;   ///< a = R1 / R
  double c = 0.0;       ///< amplitude, = umax
  double energy = 0.0;  ///< int H(grad u)^N
  double mass_p1 = 0.0; ///< int u^{p+1}
  double mass_p = 0.0;  ///< int u^p
  double Cp = 0.0;
  double umax = 0.0;
  double lambda_p = 0.0;  ///< mass_p^{1/(N-1)}
  double eps_p = 0.0;
  double log_eps_p = 0.0;

  /// u(x) for H0(x) = s.
  double u(double s) const;
};

/// u(x) = c phi(a H0(x)) on W_R with a = R1/R and c = a^{N/(p+1-N)}.
RadialSolution rescale_to_domain(const RadialProfile& profile, double R, const NormModel& norm);

/// G(s) = (N kappa)^{-1/(N-1)} log(R/s), the Green function of W_R with pole at 0.
double green_function(const RadialSolution& sol, double s);

struct GreenComparison {
  double sup_error = 0.0;      ///< sup_{s0 <= s <= s1} |v_p(s) - G(s)|
  double log_sup_error = 0.0;  ///< natural log of sup_error, finite even when sup_error underflows
  double argmax = 0.0;         ///< s attaining the supremum
};

/// Compares v_p = u_p / lambda_p with G on the annulus s0 <= H0 <= s1. Uses
///   v_p - G = -(N kappa)^{-1/(N-1)} int_t^{t1} [1 - (1 - T/S1)^{1/(N-1)}],
///   T(tau) = int_tau^{t1} e^{N sigma} phi^p d sigma,
/// evaluated in log space so the error stays resolvable for large p.
GreenComparison green_compare(const RadialSolution& sol, double s0, double s1);

/// Pointwise |v_p - G| maximised over `samples` points; only meaningful while
/// the error is well above double precision.
double green_compare_direct(const RadialSolution& sol, double s0, double s1, int samples = 2001);

struct RescaledProfile {
  double ding_mass = 0.0;    ///< N kappa int (1 + z_p/p)^{p+1} rho^{N-1} d rho
  double p_lambda = 0.0;     ///< p lambda_p
  double L0_estimate = 0.0;  ///< p lambda_p / ((N/(N-1)) e^{(N-1)/N})
  double rho_max = 0.0;      ///< R / eps_p
};

RescaledProfile rescaled_profile(const RadialSolution& sol);

/// z_p(rho) = (p/umax)(u(eps_p rho) - umax); z_p(0) = 0 and z_p <= 0.
double rescaled_z(const RadialSolution& sol, double rho);

/// Relative mismatch of the Pohozaev identity on W_R with y = 0:
///   N/(p+1) int u^{p+1} = (N-1)/N int_{dW_R} H(grad u)^N (x . nu).
double pohozaev_residual(const RadialSolution& sol, const NormModel& norm);

/// Writes `phi_p<NNN>.csv` (columns r,phi,dphi) into `dir` and returns the path.
std::string write_profile_csv(const RadialProfile& profile, const std::string& dir);

}  // namespace finsler
