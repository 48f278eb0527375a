#include "finsler/constants.hpp"

#include <numbers>
#include <random>

#include "finsler/optimize.hpp"
#include "finsler/quadrature.hpp"

namespace finsler {

namespace {

constexpr double kExclusion = 1e-6;

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

double sphere_area(int N) { return 2.0 * std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0); }

}  // namespace

WulffVolume wulff_volume(const NormModel& norm, std::uint64_t seed) {
  const int N = norm.dim();
  WulffVolume out;
  if (N == 2) {
    constexpr int M = 4096;
    double s = 0.0;
    for (int k = 0; k < M; ++k) {
      const double th = 2.0 * std::numbers::pi * k / M;
      s += std::pow(dual_norm(norm, Eigen::Vector2d(std::cos(th), std::sin(th))), -2.0);
    }
    out.value = 0.5 * s * 2.0 * std::numbers::pi / M;
    return out;
  }
  if (N == 3) {
    constexpr int nz = 96, nphi = 192;
    const auto [z, w] = gauss_legendre<double>(nz);
    double s = 0.0;
    for (int i = 0; i < nz; ++i) {
      const double r = std::sqrt(1.0 - z[i] * z[i]);
      double ring = 0.0;
      for (int k = 0; k < nphi; ++k) {
        const double ph = 2.0 * std::numbers::pi * k / nphi;
        ring += std::pow(dual_norm(norm, Eigen::Vector3d(r * std::cos(ph), r * std::sin(ph), z[i])), -3.0);
      }
      s += w[i] * ring * 2.0 * std::numbers::pi / nphi;
    }
    out.value = s / 3.0;
    return out;
  }

  // Randomized quasi-Monte Carlo: Halton points mapped to Gaussians by
  // Box-Muller, each replicate under an independent Cranley-Patterson shift.
  static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  const int dims = 2 * ((N + 1) / 2);
  if (dims > 16) throw std::invalid_argument("wulff_volume: dimension too large for the Halton rule");
  constexpr int points = 4096, replicates = 8;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> estimates;
  for (int r = 0; r < replicates; ++r) {
    std::vector<double> shift(dims);
    for (auto& s : shift) s = unif(rng);
    double acc = 0.0;
    for (int i = 1; i <= points; ++i) {
      Vec g(dims);
      for (int d = 0; d < dims; d += 2) {
        const double u1 = std::fmod(radical_inverse(i, primes[d]) + shift[d], 1.0);
        const double u2 = std::fmod(radical_inverse(i, primes[d + 1]) + shift[d + 1], 1.0);
        const double rad = std::sqrt(-2.0 * std::log(std::max(u1, 1e-300)));
        g[d] = rad * std::cos(2 * std::numbers::pi * u2);
        g[d + 1] = rad * std::sin(2 * std::numbers::pi * u2);
      }
      const Vec w = g.head(N).normalized();
      acc += std::pow(dual_norm(norm, w), -static_cast<double>(N));
    }
    estimates.push_back(sphere_area(N) / N * acc / points);
  }
  double mean = 0.0, var = 0.0;
  for (double e : estimates) mean += e;
  mean /= replicates;
  for (double e : estimates) var += (e - mean) * (e - mean);
  out.value = mean;
  out.std_error = std::sqrt(var / (replicates - 1) / replicates);
  return out;
}

double flux_quotient(const NormModel& norm, const Eigen::Ref<const Vec>& X, const Eigen::Ref<const Vec>& Y) {
  const Vec diff = X - Y;
  const double hd = eval_norm(norm, diff);
  return (flux(norm, X) - flux(norm, Y)).dot(diff) / std::pow(hd, norm.dim());
}

DConstant d_constant(const NormModel& norm, int budget, std::uint64_t seed) {
  const int N = norm.dim();
  const auto unpack = [&](const Vec& z, Vec& X, Vec& Y) {
    X = z.head(N);
    const double h = eval_norm(norm, X);
    if (h < 1e-12) return false;
    X /= h;
    Y = z.tail(N);
    return true;
  };
  const auto objective = [&](const Vec& z) {
    Vec X, Y;
    if (!unpack(z, X, Y)) return std::numeric_limits<double>::infinity();
    if (eval_norm(norm, Y) < kExclusion || eval_norm(norm, (X - Y).eval()) < kExclusion)
      return std::numeric_limits<double>::infinity();
    return flux_quotient(norm, X, Y);
  };

  std::vector<Vec> starts;
  const auto add_pair = [&](const Vec& X, const Vec& Y) {
    Vec z(2 * N);
    z << X / eval_norm(norm, X), Y;
    starts.push_back(z);
  };
  // Structured collinear and antipodal families along axes and diagonals.
  std::vector<Vec> axes;
  for (int i = 0; i < N; ++i) axes.push_back(Vec::Unit(N, i));
  axes.push_back(Vec::Ones(N).normalized());
  for (int i = 1; i < N; ++i) {
    Vec v = Vec::Unit(N, 0) - Vec::Unit(N, i);
    axes.push_back(v.normalized());
  }
  for (const auto& a : axes) {
    const Vec X = a / eval_norm(norm, a);
    for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) add_pair(X, -t * X);
    for (double t : {0.5, 2.0}) add_pair(X, t * X);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> logscale(std::log(0.1), std::log(10.0));
  for (int b = 0; b < budget; ++b) {
    Vec X(N), Y(N);
    for (int i = 0; i < N; ++i) X[i] = normal(rng), Y[i] = normal(rng);
    Y *= std::exp(logscale(rng)) / Y.norm();
    add_pair(X, Y);
  }

  DConstant out;
  out.value = std::numeric_limits<double>::infinity();
  for (const auto& z0 : starts) {
    auto res = nelder_mead(objective, z0, 0.1, 1e-14, 3000);
    // One restart from the polished point escapes premature simplex collapse.
    res = nelder_mead(objective, res.x, 0.01, 1e-15, 3000);
    if (res.value < out.value) {
      out.value = res.value;
      unpack(res.x, out.X, out.Y);
    }
  }
  out.starts = static_cast<int>(starts.size());
  out.boundary_suspect = eval_norm(norm, out.Y) < 10 * kExclusion ||
                         eval_norm(norm, (out.X - out.Y).eval()) < 10 * kExclusion;
  out.within_upper_bound = out.value <= 1.0 + 1e-6;
  return out;
}

double anisotropic_perimeter(const Polygon& poly, const NormModel& norm) {
  if (norm.dim() != 2) throw std::invalid_argument("anisotropic_perimeter: N = 2 only");
  if (!is_simple(poly)) throw ConfigError("anisotropic_perimeter: polygon is self-intersecting");
  double p = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point e = poly[(i + 1) % poly.size()] - poly[i];
    const Point normal(e.y(), -e.x());
    p += e.norm() * eval_norm(norm, normal.normalized());
  }
  return p;
}

double isoperimetric_ratio(const Polygon& poly, const NormModel& norm, double kappa) {
  const double area = std::abs(signed_area(poly));
  return anisotropic_perimeter(poly, norm) / (2.0 * std::sqrt(kappa) * std::sqrt(area));
}

MoserFunction::MoserFunction(double l_, double L_, const NormModel& norm_, double kappa_)
    : l(l_), L(L_), kappa(kappa_), norm(norm_) {
  if (!(0.0 < l && l < L)) throw std::invalid_argument("MoserFunction: need 0 < l < L");
}

double MoserFunction::plateau() const {
  const int N = norm.dim();
  return std::pow(N * kappa, -1.0 / N) * std::pow(std::log(L / l), (N - 1.0) / N);
}

double MoserFunction::profile(double h0) const {
  const int N = norm.dim();
  if (h0 <= l) return plateau();
  if (h0 >= L) return 0.0;
  return std::pow(N * kappa, -1.0 / N) * std::log(L / h0) / std::pow(std::log(L / l), 1.0 / N);
}

MoserEnergy moser_energy_check(double l, double L, const NormModel& norm, double kappa) {
  const MoserFunction m(l, L, norm, kappa);
  const int N = norm.dim();
  MoserEnergy out;
  // Coarea: H(grad m) = (N kappa)^{-1/N} (log L/l)^{-1/N} / s on {H0 = s}, and
  // the level set {H0 = s} carries N kappa s^{N-1} of measure.
  const double slope = std::pow(N * kappa, -1.0 / N) * std::pow(std::log(L / l), -1.0 / N);
  out.reduction = integrate_gauss(
      [&](double t) {
        const double s = std::exp(t);
        return N * kappa * std::pow(s, N - 1) * std::pow(slope / s, N) * s;
      },
      std::log(l), std::log(L), 16);

  out.quadrature = std::numeric_limits<double>::quiet_NaN();
  if (N == 2) {
    // Polar quadrature with the gradient taken by central differences of m.
    constexpr int nth = 512;
    double total = 0.0;
    for (int k = 0; k < nth; ++k) {
      const double th = 2.0 * std::numbers::pi * k / nth;
      const Eigen::Vector2d w(std::cos(th), std::sin(th));
      const double hw = dual_norm(norm, w);
      const double r0 = l / hw, r1 = L / hw;
      const auto integrand = [&](double t) {
        const double rho = std::exp(t);
        const Eigen::Vector2d x = rho * w;
        const double h = 1e-5 * rho;
        Eigen::Vector2d g;
        for (int i = 0; i < 2; ++i) {
          Eigen::Vector2d xp = x, xm = x;
          xp[i] += h;
          xm[i] -= h;
          g[i] = (m(xp) - m(xm)) / (2 * h);
        }
        return std::pow(eval_norm(norm, g), 2) * rho * rho;  // rho drho = rho^2 dt
      };
      total += integrate_gauss(integrand, std::log(r0), std::log(r1), 24);
    }
    out.quadrature = total * 2.0 * std::numbers::pi / nth;
  }
  return out;
}

double cp_upper_bound(double p, double L, int N, double kappa) {
  return N * kappa * std::pow(N * N * std::numbers::e / (N - 1.0), N - 1) * std::pow(p + 1.0, -(N - 1.0)) *
         std::pow(std::pow(L, N) * kappa, -N / (p + 1.0));
}

double cp_upper_bound(double p, double L, const NormModel& norm) {
  return cp_upper_bound(p, L, norm.dim(), wulff_volume(norm).value);
}

GeometryReport limit_constants(const NormModel& norm, int budget, std::uint64_t seed) {
  const int N = norm.dim();
  GeometryReport g;
  g.N = N;
  g.norm = norm.spec();
  const auto vol = wulff_volume(norm, seed);
  g.kappa = vol.value;
  g.kappa_std_error = vol.std_error;
  g.beta_N = trudinger_moser_exponent(N, g.kappa);
  const auto d = d_constant(norm, budget, seed);
  g.d_N = d.value;
  g.d_argmin_X = d.X;
  g.d_argmin_Y = d.Y;
  g.d_boundary_suspect = d.boundary_suspect;
  const auto a = check_assumptions(norm, N == 2 ? 720 : 2048);
  g.lambda_min_sphere = a.lambda_min_sphere;
  g.assumption_passes = a.passes;
  g.alpha = a.alpha;
  g.beta = a.beta;
  g.cp_limit = std::pow(N * std::numbers::e * g.beta_N / (N - 1.0), N - 1);
  g.ding_bound = std::pow(N / (N - 1.0), N - 1) * std::pow(N, N) * g.kappa;
  g.blowup_bound = gauss_bracket(std::exp((N - 1.0) / N) / g.d_N);
  return g;
}

}  // namespace finsler
