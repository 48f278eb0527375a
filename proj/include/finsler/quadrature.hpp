#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include <Eigen/Core>

namespace finsler {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
template <typename Scalar = double>
std::pair<VectorX<Scalar>, VectorX<Scalar>> gauss_legendre(int n) {
  VectorX<Scalar> x(n), w(n);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar z = std::cos(pi * (i + Scalar(0.75)) / (n + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const Scalar pk = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const Scalar dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 4 * std::numeric_limits<Scalar>::epsilon()) break;
    }
    {
      Scalar p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const Scalar pk = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Integral of f over [a, b] with an n-point Gauss-Legendre rule.
template <typename F, typename Scalar = double>
Scalar integrate_gauss(F&& f, Scalar a, Scalar b, int n = 32) {
  static thread_local int cached_n = -1;
  static thread_local std::pair<VectorX<double>, VectorX<double>> rule;
  if (cached_n != n) {
    rule = gauss_legendre<double>(n);
    cached_n = n;
  }
  const Scalar mid = (a + b) / 2, half = (b - a) / 2;
  Scalar s = 0;
  for (int i = 0; i < n; ++i) s += rule.second[i] * f(mid + half * rule.first[i]);
  return half * s;
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace finsler
