#pragma once

// Finsler norms H on R^N, their derivatives and the dual (polar) norm H0.
//
// Three families are built in: the Euclidean norm, quadratic ellipse norms
// H(xi) = sqrt(xi^T A xi), and l_q norms. Every evaluation routine is a free
// function taking an Eigen expression, so callers can pass blocks, maps or
// temporaries without copying.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "finsler/errors.hpp"

namespace finsler {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class DualMode { analytic, numeric };

struct EuclideanNorm {};

struct EllipseNorm {
  Mat A;
  Mat A_inv;
};

struct LqNorm {
  double q;
  double dual_q() const { return q / (q - 1.0); }
};

using NormKind = std::variant<EuclideanNorm, EllipseNorm, LqNorm>;

/// Immutable description of a norm. Cheap to copy for the scalar families;
/// the ellipse variant carries its matrix and inverse.
class NormModel {
 public:
  static NormModel euclidean(int dim, DualMode mode = DualMode::analytic);
  /// Rejects matrices that are not symmetric positive definite.
  static NormModel ellipse(const Mat& A, DualMode mode = DualMode::analytic);
  static NormModel lq(double q, int dim, DualMode mode = DualMode::analytic);

  int dim() const { return dim_; }
  DualMode dual_mode() const { return mode_; }
  const NormKind& kind() const { return kind_; }
  bool is_quadratic() const { return !std::holds_alternative<LqNorm>(kind_); }

  NormModel with_dual_mode(DualMode mode) const {
    NormModel copy = *this;
    copy.mode_ = mode;
    return copy;
  }

  /// Round-trippable spec string, e.g. "lq:3" or "ellipse:4,0,1".
  std::string spec() const;

 private:
  NormModel(NormKind kind, int dim, DualMode mode) : kind_(std::move(kind)), dim_(dim), mode_(mode) {}

  NormKind kind_;
  int dim_;
  DualMode mode_;
};

/// Parses `euclidean`, `ellipse:a11,a12,...` (row-major upper triangle) or `lq:q`.
/// For ellipses the dimension is inferred from the entry count and must agree
/// with `dim`.
NormModel parse_norm(std::string_view spec, int dim, DualMode mode = DualMode::analytic);

namespace detail {

inline void require_nonzero(double n, const char* what) {
  if (n == 0.0) throw std::domain_error(std::string(what) + ": undefined at the origin");
}

template <typename Derived>
double lq_value(const Eigen::MatrixBase<Derived>& xi, double q) {
  const double m = xi.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < xi.size(); ++i) s += std::pow(std::abs(xi[i]) / m, q);
  return m * std::pow(s, 1.0 / q);
}

template <typename Derived>
Vec lq_gradient(const Eigen::MatrixBase<Derived>& xi, double q) {
  const double h = lq_value(xi, q);
  require_nonzero(h, "lq gradient");
  Vec g(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    const double a = std::abs(xi[i]) / h;
    g[i] = (xi[i] < 0 ? -1.0 : 1.0) * (a == 0.0 ? 0.0 : std::pow(a, q - 1.0));
  }
  return g;
}

}  // namespace detail

/// H(xi).
template <typename Derived>
double eval_norm(const NormModel& norm, const Eigen::MatrixBase<Derived>& xi) {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EuclideanNorm>) {
          return xi.norm();
        } else if constexpr (std::is_same_v<K, EllipseNorm>) {
          return std::sqrt(std::max(0.0, xi.dot(k.A * xi)));
        } else {
          return detail::lq_value(xi, k.q);
        }
      },
      norm.kind());
}

/// Gradient of H; throws std::domain_error at xi = 0.
template <typename Derived>
Vec grad_norm(const NormModel& norm, const Eigen::MatrixBase<Derived>& xi) {
  return std::visit(
      [&](const auto& k) -> Vec {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EuclideanNorm>) {
          const double n = xi.norm();
          detail::require_nonzero(n, "grad_norm");
          return xi / n;
        } else if constexpr (std::is_same_v<K, EllipseNorm>) {
          const Vec Ax = k.A * xi;
          const double n = std::sqrt(std::max(0.0, xi.dot(Ax)));
          detail::require_nonzero(n, "grad_norm");
          return Ax / n;
        } else {
          return detail::lq_gradient(xi, k.q);
        }
      },
      norm.kind());
}

/// Hessian of H itself (0-homogeneous of degree -1). Entries may be
/// non-finite for l_q norms with q < 2 on coordinate hyperplanes.
template <typename Derived>
Mat hess_norm(const NormModel& norm, const Eigen::MatrixBase<Derived>& xi) {
  const double h = eval_norm(norm, xi);
  detail::require_nonzero(h, "hess_norm");
  const Vec g = grad_norm(norm, xi);
  const Eigen::Index n = xi.size();
  return std::visit(
      [&](const auto& k) -> Mat {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EuclideanNorm>) {
          return (Mat::Identity(n, n) - g * g.transpose()) / h;
        } else if constexpr (std::is_same_v<K, EllipseNorm>) {
          return (k.A - g * g.transpose()) / h;
        } else {
          Mat D = Mat::Zero(n, n);
          for (Eigen::Index i = 0; i < n; ++i) D(i, i) = std::pow(std::abs(xi[i]) / h, k.q - 2.0);
          return (k.q - 1.0) / h * (D - g * g.transpose());
        }
      },
      norm.kind());
}

/// Hess(H^N / N), the coefficient matrix of the Finsler N-Laplacian.
template <typename Derived>
Mat hess_power(const NormModel& norm, const Eigen::MatrixBase<Derived>& xi) {
  const int N = norm.dim();
  const double h = eval_norm(norm, xi);
  const Vec g = grad_norm(norm, xi);
  Mat out = std::pow(h, N - 1) * hess_norm(norm, xi) + (N - 1) * std::pow(h, N - 2) * g * g.transpose();
  return 0.5 * (out + out.transpose());
}

/// Flux map xi -> H^{N-1}(xi) grad H(xi), continuously extended by 0 at 0.
template <typename Derived>
Vec flux(const NormModel& norm, const Eigen::MatrixBase<Derived>& xi) {
  const double h = eval_norm(norm, xi);
  if (h == 0.0) return Vec::Zero(xi.size());
  return std::pow(h, norm.dim() - 1) * grad_norm(norm, xi);
}

/// Result of maximizing xi . x / H(xi) over the Euclidean unit sphere.
struct DualMaximizer {
  double value = 0.0;
  Vec argmax;  ///< unit vector attaining the sup
  bool converged = true;
  double last_improvement = 0.0;
};

/// Multistart projected ascent for the dual norm (used in numeric mode).
DualMaximizer maximize_dual(const NormModel& norm, const Eigen::Ref<const Vec>& x);

/// H0(x) = sup_{xi != 0} xi . x / H(xi).
double dual_norm(const NormModel& norm, const Eigen::Ref<const Vec>& x);

/// Gradient of H0; throws std::domain_error at x = 0. In numeric mode the
/// gradient is the normalized maximizer xi* / H(xi*) (envelope theorem).
Vec dual_gradient(const NormModel& norm, const Eigen::Ref<const Vec>& x);

/// Support point of the unit Wulff ball in direction n: the point y with
/// H0(y) = 1 and n . y = H(n).
inline Vec wulff_support_point(const NormModel& norm, const Eigen::Ref<const Vec>& n) { return grad_norm(norm, n); }

/// Maximum residual of each identity on the random sample set.
struct IdentityReport {
  int samples = 0;
  double bounded_gradient = 0.0;  ///< max(0, |grad H| - beta)
  double euler = 0.0;             ///< |grad H . xi - H|/H and the same for H0
  double sign_homogeneity = 0.0;  ///< |grad H(t xi) - sign(t) grad H(xi)|
  double unit_dual = 0.0;         ///< |H(grad H0) - 1| and |H0(grad H) - 1|
  double inverse_map = 0.0;       ///< |H0(x) grad H(grad H0(x)) - x| / |x|
  bool passed = true;
  std::string failure;  ///< identity name and violating sample when !passed

  double max_residual() const {
    return std::max({bounded_gradient, euler, sign_homogeneity, unit_dual, inverse_map});
  }
};

/// Checks the gradient/dual identities of a Finsler norm on uniformly random
/// nonzero samples drawn from a seeded generator.
IdentityReport verify_identities(const NormModel& norm, int samples, double tol, std::uint64_t seed = 42);

struct AssumptionReport {
  double alpha = 0.0;  ///< min of H on the Euclidean sphere
  double beta = 0.0;   ///< max of H on the Euclidean sphere
  double lambda_min_sphere = 0.0;
  bool passes = false;
};

/// Sphere sweep for alpha, beta and the least eigenvalue of Hess(H^N/N).
/// Requires at least 64 samples for N = 2.
AssumptionReport check_assumptions(const NormModel& norm, int sphere_samples = 720);

/// Exact extrema of H over the Euclidean unit sphere for the built-in families.
std::pair<double, double> norm_bounds(const NormModel& norm);

/// Deterministic sphere directions: equispaced for N = 2, Fibonacci lattice for
/// N = 3, seeded Gaussian directions otherwise.
std::vector<Vec> sphere_directions(int dim, int count, std::uint64_t seed = 7);

}  // namespace finsler
