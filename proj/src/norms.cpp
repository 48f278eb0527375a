#include "finsler/norms.hpp"

#include <array>
#include <charconv>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "finsler/parallel.hpp"

namespace finsler {

NormModel NormModel::euclidean(int dim, DualMode mode) {
  if (dim < 2) throw ConfigError("norm dimension must be >= 2");
  return NormModel(EuclideanNorm{}, dim, mode);
}

NormModel NormModel::ellipse(const Mat& A, DualMode mode) {
  if (A.rows() != A.cols() || A.rows() < 2) throw ConfigError("ellipse matrix must be square with N >= 2");
  if (!A.isApprox(A.transpose(), 1e-14)) throw ConfigError("ellipse matrix must be symmetric");
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) throw ConfigError("ellipse matrix is not positive definite");
  const Eigen::SelfAdjointEigenSolver<Mat> eig(A);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw ConfigError("ellipse matrix is not positive definite");
  EllipseNorm e{A, llt.solve(Mat::Identity(A.rows(), A.cols()))};
  e.A_inv = 0.5 * (e.A_inv + e.A_inv.transpose()).eval();
  return NormModel(std::move(e), static_cast<int>(A.rows()), mode);
}

NormModel NormModel::lq(double q, int dim, DualMode mode) {
  if (!(q > 1.0) || !std::isfinite(q)) throw ConfigError("lq exponent must be a finite real > 1");
  if (dim < 2) throw ConfigError("norm dimension must be >= 2");
  return NormModel(LqNorm{q}, dim, mode);
}

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view tok, std::string_view spec) {
  while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
  while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ConfigError("malformed norm spec '" + std::string(spec) + "': bad number '" + std::string(tok) + "'");
  return v;
}

}  // namespace

std::string NormModel::spec() const {
  return std::visit(
      [&](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EuclideanNorm>) {
          return "euclidean";
        } else if constexpr (std::is_same_v<K, EllipseNorm>) {
          std::string s = "ellipse:";
          bool first = true;
          for (Eigen::Index i = 0; i < k.A.rows(); ++i)
            for (Eigen::Index j = i; j < k.A.cols(); ++j) {
              if (!first) s += ',';
              s += shortest(k.A(i, j));
              first = false;
            }
          return s;
        } else {
          return "lq:" + shortest(k.q);
        }
      },
      kind_);
}

NormModel parse_norm(std::string_view spec, int dim, DualMode mode) {
  if (spec == "euclidean") return NormModel::euclidean(dim, mode);
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw ConfigError("malformed norm spec '" + std::string(spec) + "'");
  const std::string_view family = spec.substr(0, colon);
  std::string_view rest = spec.substr(colon + 1);
  if (family == "lq") return NormModel::lq(parse_number(rest, spec), dim, mode);
  if (family != "ellipse") throw ConfigError("unknown norm family '" + std::string(family) + "'");

  std::vector<double> entries;
  while (true) {
    const auto comma = rest.find(',');
    entries.push_back(parse_number(rest.substr(0, comma), spec));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  int n = 0;
  while (n * (n + 1) / 2 < static_cast<int>(entries.size())) ++n;
  if (n * (n + 1) / 2 != static_cast<int>(entries.size()))
    throw ConfigError("ellipse spec needs N(N+1)/2 upper-triangle entries, got " + std::to_string(entries.size()));
  if (n != dim)
    throw ConfigError("ellipse spec has dimension " + std::to_string(n) + " but dim = " + std::to_string(dim));
  Mat A(n, n);
  std::size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) A(i, j) = A(j, i) = entries[k++];
  return NormModel::ellipse(A, mode);
}

std::vector<Vec> sphere_directions(int dim, int count, std::uint64_t seed) {
  std::vector<Vec> dirs;
  dirs.reserve(count);
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      dirs.emplace_back(Eigen::Vector2d(std::cos(th), std::sin(th)));
    }
  } else if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      dirs.emplace_back(Eigen::Vector3d(r * std::cos(golden * k), r * std::sin(golden * k), z));
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int k = 0; k < count; ++k) {
      Vec v(dim);
      do {
        for (int i = 0; i < dim; ++i) v[i] = normal(rng);
      } while (v.norm() < 1e-12);
      dirs.push_back(v.normalized());
    }
  }
  return dirs;
}

namespace {

// Coordinate descent on g(xi) = H(xi)^2 / 2 - xi . x, whose minimizer solves
// H(xi) grad H(xi) = x, i.e. xi = H0(x) grad H0(x). Each coordinate equation
// is monotone in its variable, so bracketing copes with the unbounded
// curvature of H near coordinate planes. Returns |H grad H - x| / |x|.
double polish_dual(const NormModel& norm, const Vec& x, Vec& xi) {
  const double xn = x.norm();
  const auto flux_at = [&](const Vec& v) -> Vec {
    if (v.norm() == 0.0) return Vec::Zero(v.size());
    return eval_norm(norm, v) * grad_norm(norm, v);
  };
  double r = (flux_at(xi) - x).norm() / xn;
  for (int sweep = 0; sweep < 200 && r > 1e-13; ++sweep) {
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
      Vec v = xi;
      const auto phi = [&](double t) {
        v[i] = t;
        return flux_at(v)[i] - x[i];
      };
      double a = xi[i], fa = phi(a);
      if (fa == 0.0) continue;
      const double dir = fa > 0.0 ? -1.0 : 1.0;
      double step = 1e-8 * xi.norm(), b = a + dir * step, fb = phi(b);
      for (int k = 0; k < 80 && (fb > 0.0) == (fa > 0.0); ++k) {
        a = b;
        fa = fb;
        step *= 2.0;
        b = a + dir * step;
        fb = phi(b);
      }
      if ((fb > 0.0) == (fa > 0.0)) continue;
      // Illinois regula falsi on the sign change in [a, b].
      int side = 0;
      for (int k = 0; k < 100 && std::abs(b - a) > 1e-17 * xi.norm(); ++k) {
        const double c = (a * fb - b * fa) / (fb - fa);
        const double fc = phi(c);
        if (fc == 0.0) {
          a = b = c;
          break;
        }
        if ((fc > 0.0) == (fb > 0.0)) {
          b = c;
          fb = fc;
          if (side == -1) fa *= 0.5;
          side = -1;
        } else {
          a = c;
          fa = fc;
          if (side == 1) fb *= 0.5;
          side = 1;
        }
      }
      xi[i] = std::abs(fa) < std::abs(fb) ? a : b;
    }
    r = (flux_at(xi) - x).norm() / xn;
  }
  return r;
}

}  // namespace

DualMaximizer maximize_dual(const NormModel& norm, const Eigen::Ref<const Vec>& x) {
  const int n = norm.dim();
  DualMaximizer out;
  out.argmax = Vec::Zero(n);
  if (x.norm() == 0.0) {
    out.argmax[0] = 1.0;
    return out;
  }
  const auto objective = [&](const Vec& xi) { return xi.dot(x) / eval_norm(norm, xi); };

  const int starts = n == 2 ? 256 : 2048;
  const auto dirs = sphere_directions(n, starts);
  Vec best = dirs.front();
  double fbest = objective(best);
  for (const auto& d : dirs) {
    const double f = objective(d);
    if (f > fbest) {
      fbest = f;
      best = d;
    }
  }

  // Projected ascent on the sphere with Armijo backtracking. The step grows
  // after each accepted move. Ascent only has to reach the basin; near
  // coordinate planes of l_q norms with q < 2 it creeps, and polish_dual
  // finishes the job.
  double step = 2.0 * std::numbers::pi / starts;
  double improvement = 0.0;
  for (int it = 0; it < 50; ++it) {
    const double h = eval_norm(norm, best);
    Vec grad = x / h - (best.dot(x) / (h * h)) * grad_norm(norm, best);
    grad -= grad.dot(best) * best;
    const double gn = grad.norm();
    if (gn < 1e-15 * std::max(1.0, x.norm())) {
      improvement = 0.0;
      break;
    }
    const Vec dir = grad / gn;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vec cand = (best + step * dir).normalized();
      const double fc = objective(cand);
      if (fc >= fbest + 1e-4 * step * gn) {
        improvement = fc - fbest;
        best = cand;
        fbest = fc;
        accepted = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      improvement = 0.0;
      break;
    }
  }
  out.last_improvement = improvement;
  Vec xi = (fbest / eval_norm(norm, best)) * best;
  const double r = fbest > 0.0 ? polish_dual(norm, x, xi) : HUGE_VAL;
  if (r <= 1e-9) {
    out.argmax = xi.normalized();
    out.value = std::max(fbest, objective(out.argmax));
    out.converged = true;
  } else {
    out.value = fbest;
    out.argmax = best;
    out.converged = false;
  }
  return out;
}

double dual_norm(const NormModel& norm, const Eigen::Ref<const Vec>& x) {
  if (norm.dual_mode() == DualMode::numeric) return maximize_dual(norm, x).value;
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EuclideanNorm>) {
          return x.norm();
        } else if constexpr (std::is_same_v<K, EllipseNorm>) {
          return std::sqrt(std::max(0.0, x.dot(k.A_inv * x)));
        } else {
          return detail::lq_value(x, k.dual_q());
        }
      },
      norm.kind());
}

Vec dual_gradient(const NormModel& norm, const Eigen::Ref<const Vec>& x) {
  detail::require_nonzero(x.norm(), "dual_gradient");
  if (norm.dual_mode() == DualMode::numeric) {
    const auto m = maximize_dual(norm, x);
    if (!m.converged) throw ConvergenceError("numeric dual norm did not converge");
    return m.argmax / eval_norm(norm, m.argmax);
  }
  return std::visit(
      [&](const auto& k) -> Vec {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EuclideanNorm>) {
          return x / x.norm();
        } else if constexpr (std::is_same_v<K, EllipseNorm>) {
          const Vec y = k.A_inv * x;
          return y / std::sqrt(x.dot(y));
        } else {
          return detail::lq_gradient(x, k.dual_q());
        }
      },
      norm.kind());
}

std::pair<double, double> norm_bounds(const NormModel& norm) {
  const double n = norm.dim();
  return std::visit(
      [&](const auto& k) -> std::pair<double, double> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EuclideanNorm>) {
          return {1.0, 1.0};
        } else if constexpr (std::is_same_v<K, EllipseNorm>) {
          const Eigen::SelfAdjointEigenSolver<Mat> eig(k.A);
          return {std::sqrt(eig.eigenvalues().minCoeff()), std::sqrt(eig.eigenvalues().maxCoeff())};
        } else {
          const double corner = std::pow(n, 1.0 / k.q - 0.5);
          return k.q >= 2.0 ? std::pair{corner, 1.0} : std::pair{1.0, corner};
        }
      },
      norm.kind());
}

IdentityReport verify_identities(const NormModel& norm, int samples, double tol, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("verify_identities: samples must be >= 1");
  const int n = norm.dim();
  const double beta = norm_bounds(norm).second;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.1, 3.0);

  IdentityReport rep;
  rep.samples = samples;
  const auto draw = [&] {
    Vec v(n);
    do {
      for (int i = 0; i < n; ++i) v[i] = unit(rng);
    } while (v.norm() < 1e-3);
    return v;
  };
  const auto fmt = [](const Vec& v) {
    std::ostringstream os;
    os << '(' << v.transpose() << ')';
    return os.str();
  };
  const auto record = [&](double& slot, double r, const char* name, const Vec& sample) {
    slot = std::max(slot, r);
    if (rep.passed && !(r <= tol)) {
      rep.passed = false;
      rep.failure = std::string(name) + " residual " + std::to_string(r) + " at sample " + fmt(sample);
    }
  };

  // Samples are drawn serially so the stream does not depend on the thread
  // count; residuals are computed in parallel and reduced in sample order.
  struct Sample {
    Vec xi, x;
    double t = 0.0;
    std::array<double, 7> r{};
  };
  std::vector<Sample> draws(samples);
  for (auto& d : draws) {
    d.xi = draw();
    d.x = draw();
    d.t = (unit(rng) < 0 ? -1.0 : 1.0) * scale(rng);
  }
  parallel_chunks(draws.size(), 4 * thread_limit(), [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      auto& [xi, x, t, r] = draws[s];
      const double H = eval_norm(norm, xi);
      const Vec gH = grad_norm(norm, xi);
      const double H0 = dual_norm(norm, x);
      const Vec gH0 = dual_gradient(norm, x);
      r[0] = std::max(0.0, gH.norm() - beta * (1.0 + 1e-12));
      r[1] = std::abs(gH.dot(xi) - H) / H;
      r[2] = std::abs(gH0.dot(x) - H0) / H0;
      r[3] = (grad_norm(norm, (t * xi).eval()) - (t > 0 ? 1.0 : -1.0) * gH).norm();
      r[4] = std::abs(eval_norm(norm, gH0) - 1.0);
      r[5] = std::abs(dual_norm(norm, gH) - 1.0);
      r[6] = (H0 * grad_norm(norm, gH0) - x).norm() / x.norm();
    }
  });
  for (const auto& [xi, x, t, r] : draws) {
    record(rep.bounded_gradient, r[0], "bounded gradient", xi);
    record(rep.euler, r[1], "Euler (H)", xi);
    record(rep.euler, r[2], "Euler (H0)", x);
    record(rep.sign_homogeneity, r[3], "sign homogeneity", xi);
    record(rep.unit_dual, r[4], "H(grad H0) = 1", x);
    record(rep.unit_dual, r[5], "H0(grad H) = 1", xi);
    record(rep.inverse_map, r[6], "H0 grad H(grad H0) = x", x);
  }
  return rep;
}

AssumptionReport check_assumptions(const NormModel& norm, int sphere_samples) {
  const int n = norm.dim();
  if (sphere_samples < (n == 2 ? 64 : 256))
    throw std::invalid_argument("check_assumptions: too few sphere samples for dimension " + std::to_string(n));
  AssumptionReport rep;
  rep.alpha = std::numeric_limits<double>::infinity();
  rep.beta = 0.0;
  rep.lambda_min_sphere = std::numeric_limits<double>::infinity();
  auto dirs = sphere_directions(n, sphere_samples);
  // Coordinate axes are where l_q norms degenerate; always include them.
  for (int i = 0; i < n; ++i) dirs.push_back(Vec::Unit(n, i));
  for (const auto& d : dirs) {
    const double h = eval_norm(norm, d);
    rep.alpha = std::min(rep.alpha, h);
    rep.beta = std::max(rep.beta, h);
    const Mat hess = hess_power(norm, d);
    double lam = 0.0;
    if (hess.allFinite()) lam = Eigen::SelfAdjointEigenSolver<Mat>(hess, Eigen::EigenvaluesOnly).eigenvalues()[0];
    rep.lambda_min_sphere = std::min(rep.lambda_min_sphere, lam);
  }
  rep.passes = rep.lambda_min_sphere > 1e-8;
  return rep;
}

}  // namespace finsler
