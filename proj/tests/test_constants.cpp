#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "finsler/constants.hpp"

using namespace finsler;
using std::numbers::e;
using std::numbers::pi;

namespace {

NormModel ellipse41() { return NormModel::ellipse((Mat(2, 2) << 4, 0, 0, 1).finished()); }

// Monte Carlo hit counting over the bounding box of {H0 < 1}.
double monte_carlo_wulff_area(const NormModel& norm, int samples) {
  const auto [alpha, beta] = norm_bounds(norm);
  const double box = beta;  // |x| <= beta H0(x)
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-box, box);
  long hits = 0;
  for (int i = 0; i < samples; ++i)
    if (dual_norm(norm, Eigen::Vector2d(u(rng), u(rng))) < 1.0) ++hits;
  return 4.0 * box * box * static_cast<double>(hits) / samples;
}

// Dense scan over (angle of X, radius and angle of Y) with H(X) = 1.
double grid_scan_d(const NormModel& norm, int n_angle, int n_radius) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_angle; ++i) {
    const double th = 2 * pi * i / n_angle;
    Eigen::Vector2d X(std::cos(th), std::sin(th));
    X /= eval_norm(norm, X);
    for (int j = 0; j < n_radius; ++j) {
      const double rho = std::exp(std::log(0.01) + (std::log(100.0) - std::log(0.01)) * j / (n_radius - 1));
      for (int k = 0; k < n_angle; ++k) {
        const double ph = 2 * pi * (k + 0.5) / n_angle;
        const Eigen::Vector2d Y(rho * std::cos(ph), rho * std::sin(ph));
        if (eval_norm(norm, (X - Y).eval()) < 1e-6) continue;
        best = std::min(best, flux_quotient(norm, X, Y));
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("wulff_volume") {
  CHECK(std::abs(wulff_volume(NormModel::euclidean(2)).value - pi) <= 1e-10);
  CHECK(std::abs(wulff_volume(ellipse41()).value - 2 * pi) <= 1e-8);
  CHECK(std::abs(wulff_volume(NormModel::euclidean(3)).value - 4 * pi / 3) <= 1e-6);
  const auto e3 = NormModel::ellipse((Mat(3, 3) << 4, 0, 0, 0, 1, 0, 0, 0, 9).finished());
  // Wulff ball is the ellipsoid with semi-axes sqrt(eig(A)) = 2, 1, 3.
  CHECK(wulff_volume(e3).value == doctest::Approx(4 * pi / 3 * 6).epsilon(1e-6));

  SUBCASE("lq against Monte Carlo hit counting") {
    const auto l3 = NormModel::lq(3, 2);
    const double k = wulff_volume(l3).value;
    const double mc = monte_carlo_wulff_area(l3, 4'000'000);
    CHECK(k == doctest::Approx(mc).epsilon(2e-3));
    // The l_{3/2} unit ball has area 4 Gamma(5/3)^2 / Gamma(7/3).
    CHECK(k == doctest::Approx(4 * std::pow(std::tgamma(5.0 / 3), 2) / std::tgamma(7.0 / 3)).epsilon(1e-8));
  }
  SUBCASE("quasi Monte Carlo in N = 4") {
    const auto v = wulff_volume(NormModel::euclidean(4));
    CHECK(v.std_error > 0.0);
    CHECK(std::abs(v.value - pi * pi / 2) <= std::max(4 * v.std_error, 1e-3));
  }
}

TEST_CASE("flux quotient symmetry and joint homogeneity") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& norm : {NormModel::lq(3, 2), ellipse41(), NormModel::euclidean(3), NormModel::lq(1.7, 3)}) {
    for (int s = 0; s < 200; ++s) {
      Vec X(norm.dim()), Y(norm.dim());
      for (auto& v : X) v = u(rng);
      for (auto& v : Y) v = u(rng);
      const double d = flux_quotient(norm, X, Y);
      CHECK(flux_quotient(norm, Y, X) == doctest::Approx(d).epsilon(1e-10));
      const double t = 0.1 + 5 * std::abs(u(rng));
      CHECK(flux_quotient(norm, t * X, t * Y) == doctest::Approx(d).epsilon(1e-10));
    }
  }
}

TEST_CASE("d_constant") {
  SUBCASE("euclidean N = 2 is identically one") {
    const auto d = d_constant(NormModel::euclidean(2), 16);
    CHECK(std::abs(d.value - 1.0) <= 1e-6);
    CHECK(d.within_upper_bound);
  }
  SUBCASE("euclidean N = 3 reaches the antipodal value 1/2") {
    // Collinear family X = (1,0,0), Y = (-t,0,0): (1 + t^2)/(1 + t)^2, = 1/2 at t = 1.
    for (double t : {0.5, 1.0, 2.0})
      CHECK(flux_quotient(NormModel::euclidean(3), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(-t, 0, 0)) ==
            doctest::Approx((1 + t * t) / ((1 + t) * (1 + t))));
    const auto d = d_constant(NormModel::euclidean(3), 32);
    CHECK(d.value <= 0.5 + 1e-4);
    CHECK(d.value >= 0.5 - 1e-6);
    CHECK_FALSE(d.boundary_suspect);
  }
  SUBCASE("ellipse N = 2") {
    const auto d = d_constant(ellipse41(), 32);
    CHECK(d.value > 0.0);
    CHECK(d.value <= 1.0 + 1e-6);
  }
  SUBCASE("lq 3/2 against a dense grid scan") {
    const auto norm = NormModel::lq(1.5, 2);
    const auto d = d_constant(norm, 64);
    const double grid = grid_scan_d(norm, 120, 90);
    MESSAGE("d_2(l1.5) multistart = " << d.value << ", grid = " << grid);
    CHECK(d.value <= grid + 1e-9);
    CHECK(d.value >= grid - 0.05);
    CHECK(d.value > 0.0);
  }
  SUBCASE("lq 3 degenerates") {
    // Hess(H^2/2) has eigenvalue ~ |xi_2|^{q-2} near the axes, so inf d = 0.
    const auto d = d_constant(NormModel::lq(3, 2), 32);
    CHECK(d.value < 1e-3);
  }
}

TEST_CASE("anisotropic perimeter and isoperimetry") {
  CHECK(anisotropic_perimeter(square_polygon(), NormModel::euclidean(2)) == doctest::Approx(4.0));
  CHECK(4.0 >= 2 * std::sqrt(pi));
  CHECK(isoperimetric_ratio(square_polygon(), NormModel::euclidean(2), pi) == doctest::Approx(4.0 / (2 * std::sqrt(pi))));

  for (const auto& norm : {NormModel::euclidean(2), ellipse41(), NormModel::lq(3, 2), NormModel::lq(1.5, 2)}) {
    const double kappa = wulff_volume(norm).value;
    for (double R : {0.5, 1.0, 3.0}) {
      const auto w = wulff_polygon(norm, R, 256);
      CHECK(anisotropic_perimeter(w, norm) == doctest::Approx(2 * kappa * R).epsilon(1e-2));
      const double ratio = isoperimetric_ratio(w, norm, kappa);
      CHECK(ratio >= 1 - 1e-3);
      CHECK(ratio <= 1 + 1e-2);
    }
    // Random convex polygons: sorted random angles on a random ellipse.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int s = 0; s < 50; ++s) {
      std::vector<double> ang(3 + s % 9);
      for (auto& a : ang) a = 2 * pi * u(rng);
      std::sort(ang.begin(), ang.end());
      const double ax = 0.5 + 2 * u(rng), by = 0.5 + 2 * u(rng);
      Polygon poly;
      for (double a : ang) poly.emplace_back(ax * std::cos(a), by * std::sin(a));
      if (!is_simple(poly) || std::abs(signed_area(poly)) < 1e-6) continue;
      CHECK(isoperimetric_ratio(poly, norm, kappa) >= 1 - 1e-3);
    }
  }

  const Polygon bowtie{Point(0, 0), Point(1, 1), Point(1, 0), Point(0, 1)};
  CHECK_THROWS_AS(anisotropic_perimeter(bowtie, NormModel::euclidean(2)), ConfigError);
}

TEST_CASE("Moser function") {
  const auto norm = ellipse41();
  const double kappa = 2 * pi;
  const MoserFunction m(0.1, 1.0, norm, kappa);
  const double plateau = std::pow(2 * kappa, -0.5) * std::pow(std::log(10.0), 0.5);
  CHECK(m(Eigen::Vector2d(0, 0)) == doctest::Approx(plateau));
  CHECK(m.profile(1.0) == 0.0);
  CHECK(m.profile(std::sqrt(0.1)) == doctest::Approx(plateau / 2));
  CHECK(m(Eigen::Vector2d(2.0, 0.0)) == 0.0);  // H0 = 1 on the Wulff ball boundary
  CHECK_THROWS(MoserFunction(1.0, 0.5, norm, kappa));

  const auto eu = moser_energy_check(0.1, 1.0, NormModel::euclidean(2), pi);
  CHECK(std::abs(eu.reduction - 1.0) <= 1e-12);
  CHECK(std::abs(eu.quadrature - 1.0) <= 1e-6);
  const auto el = moser_energy_check(0.2, 1.0, norm, kappa);
  CHECK(std::abs(el.reduction - 1.0) <= 1e-12);
  CHECK(std::abs(el.quadrature - 1.0) <= 1e-4);
  const auto l3 = NormModel::lq(3, 2);
  const auto ll = moser_energy_check(0.05, 0.7, l3, wulff_volume(l3).value);
  CHECK(std::abs(ll.quadrature - 1.0) <= 1e-4);
}

TEST_CASE("C_p upper bound") {
  const double b = cp_upper_bound(100, 1.0, 2, pi);
  CHECK(b == doctest::Approx(2 * pi * 4 * e / 101 * std::pow(pi, -2.0 / 101)).epsilon(1e-14));
  const double limit = std::pow(2 * e * 4 * pi, 1);
  CHECK(limit == doctest::Approx(68.3179).epsilon(1e-6));
  // (p+1)^{N-1} bound -> N kappa (N^2 e/(N-1))^{N-1} = cp_limit
  for (int N : {2, 3}) {
    const double kappa = N == 2 ? pi : 4 * pi / 3;
    const double cp_limit = std::pow(N * e * trudinger_moser_exponent(N, kappa) / (N - 1), N - 1);
    const double p = 1e9;
    CHECK(std::pow(p + 1, N - 1) * cp_upper_bound(p, 1.0, N, kappa) == doctest::Approx(cp_limit).epsilon(1e-7));
  }
}

TEST_CASE("limit_constants") {
  SUBCASE("euclidean N = 2") {
    const auto g = limit_constants(NormModel::euclidean(2), 16);
    CHECK(g.kappa == doctest::Approx(pi).epsilon(1e-12));
    CHECK(g.beta_N == doctest::Approx(4 * pi).epsilon(1e-12));
    CHECK(g.cp_limit == doctest::Approx(8 * pi * e).epsilon(1e-12));
    CHECK(g.ding_bound == doctest::Approx(8 * pi).epsilon(1e-12));
    CHECK(g.d_N == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(g.blowup_bound == 1);
    CHECK(g.assumption_passes);
  }
  SUBCASE("ellipse diag(4,1)") {
    const auto g = limit_constants(ellipse41(), 16);
    CHECK(g.kappa == doctest::Approx(2 * pi).epsilon(1e-10));
    CHECK(g.beta_N == doctest::Approx(8 * pi).epsilon(1e-10));
    CHECK(g.cp_limit == doctest::Approx(16 * pi * e).epsilon(1e-10));
    CHECK(g.blowup_bound >= 1);
  }
  SUBCASE("euclidean N = 3") {
    const auto g = limit_constants(NormModel::euclidean(3), 16);
    CHECK(g.kappa == doctest::Approx(4 * pi / 3).epsilon(1e-9));
    CHECK(g.beta_N == doctest::Approx(3 * std::sqrt(4 * pi)).epsilon(1e-9));
    CHECK(g.cp_limit == doctest::Approx(std::pow(3 * e * 3 * std::sqrt(4 * pi) / 2, 2)).epsilon(1e-9));
    CHECK(g.blowup_bound == 3);  // [e^{2/3} / (1/2)]
  }
  SUBCASE("beta_N responds to kappa with exponent 1/(N-1)") {
    for (int N : {2, 3, 4}) {
      const double k = 1.7, eps = 1e-3;
      CHECK(trudinger_moser_exponent(N, k * (1 + eps)) / trudinger_moser_exponent(N, k) ==
            doctest::Approx(std::pow(1 + eps, 1.0 / (N - 1))).epsilon(1e-14));
    }
  }
  CHECK(gauss_bracket(2.0) == 2);
  CHECK(gauss_bracket(std::nextafter(2.0, 0.0)) == 2);
  CHECK(gauss_bracket(1.9) == 1);
}
