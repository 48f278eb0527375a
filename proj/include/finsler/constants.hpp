#pragma once

// Norm-dependent constants: the Wulff volume kappa_N, the Trudinger-Moser
// exponent beta_N, the flux monotonicity constant d_N, anisotropic perimeters,
// the Moser test function and the resulting upper bound for C_p.

#include <cstdint>

#include "finsler/norms.hpp"
#include "finsler/polygon.hpp"

namespace finsler {

struct WulffVolume {
  double value = 0.0;
  double std_error = 0.0;  ///< nonzero only for the quasi-Monte Carlo rule (N >= 4)
};

/// kappa_N = (1/N) * integral over S^{N-1} of H0(w)^{-N}.
WulffVolume wulff_volume(const NormModel& norm, std::uint64_t seed = 42);

/// beta_N = N (N kappa)^{1/(N-1)}.
inline double trudinger_moser_exponent(int N, double kappa) {
  return N * std::pow(N * kappa, 1.0 / (N - 1));
}

/// Monotonicity quotient of the flux map
/// d(X, Y) = (F(X) - F(Y)) . (X - Y) / H(X - Y)^N,  F(xi) = H^{N-1} grad H.
double flux_quotient(const NormModel& norm, const Eigen::Ref<const Vec>& X, const Eigen::Ref<const Vec>& Y);

struct DConstant {
  double value = 0.0;
  Vec X, Y;  ///< best pair found, H(X) = 1
  bool boundary_suspect = false;  ///< minimizer within 10x of an exclusion threshold
  bool within_upper_bound = true;  ///< value <= 1 + 1e-6
  int starts = 0;
};

/// Multistart Nelder-Mead minimization of flux_quotient over {H(X) = 1} x R^N.
/// `budget` random pairs are used in addition to collinear/antipodal starts.
DConstant d_constant(const NormModel& norm, int budget = 64, std::uint64_t seed = 42);

/// Sum of edge length times H(outward unit normal). Throws ConfigError for
/// self-intersecting input.
double anisotropic_perimeter(const Polygon& poly, const NormModel& norm);

/// P_H(E) / (N kappa^{1/N} |E|^{(N-1)/N}) for N = 2; >= 1 by the Finsler
/// isoperimetric inequality.
double isoperimetric_ratio(const Polygon& poly, const NormModel& norm, double kappa);

/// Truncated logarithm with unit anisotropic Dirichlet energy, supported in
/// the Wulff ball of radius L.
struct MoserFunction {
  double l, L, kappa;
  NormModel norm;

  MoserFunction(double l, double L, const NormModel& norm, double kappa);
  double plateau() const;
  double profile(double h0) const;
  double operator()(const Eigen::Ref<const Vec>& x) const { return profile(dual_norm(norm, x)); }
};

struct MoserEnergy {
  double reduction = 0.0;   ///< coarea form N kappa int_l^L s^{-1} ds / (N kappa log(L/l))
  double quadrature = 0.0;  ///< direct planar quadrature of H(grad m)^2 (N = 2), NaN otherwise
};

MoserEnergy moser_energy_check(double l, double L, const NormModel& norm, double kappa);

/// Upper bound for C_p from the Moser function with l = L exp(-(N-1)(p+1)/N^2),
/// where L is the H0-inradius of the domain.
double cp_upper_bound(double p, double L, int N, double kappa);
double cp_upper_bound(double p, double L, const NormModel& norm);

/// Gauss bracket with an upward nudge so exact integers are not floored down.
inline long gauss_bracket(double x) { return static_cast<long>(std::floor(x + 1e-9)); }

struct GeometryReport {
  int N = 0;
  std::string norm;
  double kappa = 0.0;
  double kappa_std_error = 0.0;
  double beta_N = 0.0;
  double d_N = 0.0;
  Vec d_argmin_X, d_argmin_Y;
  bool d_boundary_suspect = false;
  double lambda_min_sphere = 0.0;
  bool assumption_passes = false;
  double alpha = 0.0, beta = 0.0;
  double cp_limit = 0.0;    ///< (N e beta_N / (N-1))^{N-1}
  double ding_bound = 0.0;  ///< (N/(N-1))^{N-1} N^N kappa
  long blowup_bound = 0;    ///< [e^{(N-1)/N} / d_N]
};

GeometryReport limit_constants(const NormModel& norm, int budget = 64, std::uint64_t seed = 42);

}  // namespace finsler
