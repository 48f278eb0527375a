#include "finsler/planar.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include <Eigen/SparseCholesky>

#include "finsler/errors.hpp"
#include "finsler/parallel.hpp"

namespace finsler {

namespace {

using Grad3 = Eigen::Matrix<double, 2, 3>;

struct Geometry {
  std::vector<double> area;
  std::vector<Grad3> grad;  ///< columns: gradients of the barycentric coordinates
};

Geometry geometry(const Mesh& mesh) {
  Geometry g;
  const std::size_t nt = mesh.triangles.size();
  g.area.resize(nt);
  g.grad.resize(nt);
  const double tiny = 1e-14 * mesh.h_max * mesh.h_max;
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    const double A = triangle_area(mesh, static_cast<int>(t));
    if (!(A > tiny)) throw ConfigError("mesh has a degenerate or inverted triangle (index " + std::to_string(t) + ")");
    g.area[t] = A;
    for (int k = 0; k < 3; ++k) {
      const Point d = mesh.vertices[tri[(k + 2) % 3]] - mesh.vertices[tri[(k + 1) % 3]];
      g.grad[t].col(k) = Point(-d.y(), d.x()) / (2 * A);
    }
  }
  return g;
}

void require_planar(const NormModel& norm) {
  if (norm.dim() != 2) throw AssumptionViolation("planar solver needs a norm on R^2, got dimension " + std::to_string(norm.dim()));
}

constexpr std::size_t kParallelThreshold = 20000;
constexpr std::size_t kChunks = 64;

// Energy and (optionally) its gradient; per-chunk partial sums combined in order.
double energy_impl(const Mesh& mesh, const Geometry& geo, const Eigen::VectorXd& u, const NormModel& norm,
                   Eigen::VectorXd* grad) {
  const std::size_t nt = mesh.triangles.size();
  const std::size_t chunks = nt >= kParallelThreshold ? kChunks : 1;
  std::vector<double> partial(chunks, 0.0);
  std::vector<Eigen::Vector3d> local(grad ? nt : 0);
  parallel_chunks(nt, chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t t = b; t < e; ++t) {
      const auto& tri = mesh.triangles[t];
      const Eigen::Vector3d ut(u[tri[0]], u[tri[1]], u[tri[2]]);
      const Eigen::Vector2d g = geo.grad[t] * ut;
      const double h = eval_norm(norm, g);
      s += geo.area[t] * h * h;
      if (grad) local[t] = 2.0 * geo.area[t] * (geo.grad[t].transpose() * flux(norm, g));
    }
    partial[c] = s;
  });
  if (grad) {
    grad->setZero(u.size());
    for (std::size_t t = 0; t < nt; ++t)
      for (int k = 0; k < 3; ++k) (*grad)[mesh.triangles[t][k]] += local[t][k];
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

Eigen::Matrix2d quadratic_part(const NormModel& norm) {
  if (const auto* e = std::get_if<EllipseNorm>(&norm.kind())) return e->A;
  return Eigen::Matrix2d::Identity();
}

// Scales v (>= 0) so that sum m v^{p+1} = 1, forming the norm in log space.
bool normalize(Eigen::VectorXd& v, const Eigen::VectorXd& m, double p) {
  const double s = v.maxCoeff();
  if (!(s > 0.0) || !std::isfinite(s)) return false;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] > 0.0) acc += m[i] * std::exp((p + 1) * std::log(v[i] / s));
  const double logPhi = (p + 1) * std::log(s) + std::log(acc);
  v *= std::exp(-logPhi / (p + 1));
  return true;
}

Eigen::VectorXd nodal_power(const Eigen::VectorXd& u, double p) {
  Eigen::VectorXd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = u[i] > 0.0 ? std::exp(p * std::log(u[i])) : 0.0;
  return out;
}

// Least-squares quadratic through node i and its neighbours; returns its
// maximizer when the fit is concave and the maximizer stays within the ring,
// otherwise the node itself.
Point refine_peak(const Mesh& mesh, const Eigen::VectorXd& u, int i) {
  std::vector<int> ring{i};
  for (const auto& t : mesh.triangles)
    if (t[0] == i || t[1] == i || t[2] == i)
      for (int v : t)
        if (std::find(ring.begin(), ring.end(), v) == ring.end()) ring.push_back(v);
  if (ring.size() < 6) return mesh.vertices[i];
  const Point x0 = mesh.vertices[i];
  double reach = 0.0;
  Eigen::MatrixXd V(ring.size(), 6);
  Eigen::VectorXd b(ring.size());
  for (std::size_t k = 0; k < ring.size(); ++k) {
    const Point d = mesh.vertices[ring[k]] - x0;
    reach = std::max(reach, d.norm());
    V.row(k) << 1.0, d.x(), d.y(), d.x() * d.x(), d.x() * d.y(), d.y() * d.y();
    b[k] = u[ring[k]];
  }
  const Eigen::VectorXd c = V.colPivHouseholderQr().solve(b);
  Eigen::Matrix2d Hs;
  Hs << 2 * c[3], c[4], c[4], 2 * c[5];
  if (!(Hs.determinant() > 0.0 && Hs(0, 0) < 0.0)) return x0;
  const Point d = -Hs.inverse() * Point(c[1], c[2]);
  return d.norm() <= reach ? Point(x0 + d) : x0;
}

struct Descent {
  Eigen::VectorXd u;
  double J = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  std::vector<double> history;
};

Descent descend(const Mesh& mesh, const NormModel& norm, double p, const SolveConfig& cfg,
                const Eigen::VectorXd* warm) {
  require_planar(norm);
  if (!(cfg.max_iters >= 1)) throw ConfigError("max_iters must be at least 1");
  if (!(cfg.grad_tol > 0.0)) throw ConfigError("grad_tol must be positive");
  if (!check_assumptions(norm).passes)
    throw AssumptionViolation("norm '" + norm.spec() +
                              "' fails the positive-definiteness assumption; planar solves are refused");

  const Geometry geo = geometry(mesh);
  const int n = mesh.size();
  const Eigen::VectorXd m = lumped_mass(mesh);
  std::vector<int> interior;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i)
    if (!mesh.boundary_flags[i]) {
      slot[i] = static_cast<int>(interior.size());
      interior.push_back(i);
    }
  const int ni = static_cast<int>(interior.size());
  if (ni == 0) throw ConfigError("mesh has no interior nodes");

  // Stiffness matrix of the quadratic part, restricted to interior nodes.
  const Eigen::Matrix2d M = quadratic_part(norm);
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Eigen::Matrix3d Kt = geo.area[t] * geo.grad[t].transpose() * M * geo.grad[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const int i = slot[mesh.triangles[t][a]], j = slot[mesh.triangles[t][b]];
        if (i >= 0 && j >= 0) trip.emplace_back(i, j, Kt(a, b));
      }
  }
  Eigen::SparseMatrix<double> K(ni, ni);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(K);
  if (chol.info() != Eigen::Success) throw ConvergenceError("stiffness factorization failed");

  Eigen::VectorXd mi(ni);
  for (int k = 0; k < ni; ++k) mi[k] = m[interior[k]];
  const auto scatter = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < ni; ++k) full[interior[k]] = x[k];
    return full;
  };
  const auto gather = [&](const Eigen::VectorXd& full) {
    Eigen::VectorXd x(ni);
    for (int k = 0; k < ni; ++k) x[k] = full[interior[k]];
    return x;
  };
  const auto energy = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (!g) return energy_impl(mesh, geo, scatter(x), norm, nullptr);
    Eigen::VectorXd full;
    const double E = energy_impl(mesh, geo, scatter(x), norm, &full);
    *g = gather(full);
    return E;
  };

  Descent d;
  if (warm) {
    d.u = gather(*warm).cwiseAbs();
  } else {
    // Torsion function plus a small seeded perturbation.
    d.u = chol.solve(mi);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double amp = 1e-3 * d.u.maxCoeff();
    for (int k = 0; k < ni; ++k) d.u[k] = std::abs(d.u[k] + amp * unif(rng));
  }
  if (!normalize(d.u, mi, p)) throw ConvergenceError("initial iterate vanishes");

  // Sobolev gradient of J = E / (sum m u^{p+1})^{2/(p+1)} at a normalized
  // iterate, its slope gJ . K^{-1} gJ and the relative norm reported to callers.
  struct Step {
    Eigen::VectorXd s;
    double slope = 0.0;
    double norm = 0.0;
  };
  const auto measure = [&](const Eigen::VectorXd& u, double J, const Eigen::VectorXd& gE) {
    const Eigen::VectorXd gJ = gE - 2.0 * J * mi.cwiseProduct(nodal_power(u, p));
    Step st;
    st.s = chol.solve(gJ);
    st.slope = gJ.dot(st.s);
    st.norm = std::sqrt(std::max(st.slope, 0.0)) / (2.0 * std::sqrt(J));
    return st;
  };

  double alpha0 = cfg.step;
  Eigen::VectorXd gE;
  d.J = energy(d.u, &gE);
  Step st = measure(d.u, d.J, gE);
  for (d.iterations = 0; d.iterations < cfg.max_iters; ++d.iterations) {
    d.grad_norm = st.norm;
    if (d.grad_norm <= cfg.grad_tol) {
      d.converged = true;
      break;
    }
    // Armijo decreases below a few ulps of J cannot be certified. The fallback
    // guard uses the summation bound, one ulp of J per triangle.
    const double eps = std::numeric_limits<double>::epsilon();
    const double floor = 16.0 * eps * d.J;
    const double noise = eps * static_cast<double>(mesh.triangles.size()) * d.J;
    double alpha = alpha0;
    bool accepted = false;
    Eigen::VectorXd cand;
    for (; cfg.armijo * alpha * st.slope > floor; alpha *= cfg.shrink) {
      cand = (d.u - alpha * st.s).cwiseAbs();
      if (normalize(cand, mi, p) && energy(cand, nullptr) <= d.J - cfg.armijo * alpha * st.slope) {
        accepted = true;
        break;
      }
    }
    Eigen::VectorXd gc;
    double Jc = 0.0;
    Step sc;
    if (accepted) {
      Jc = energy(cand, &gc);
      sc = measure(cand, Jc, gc);
      alpha0 = std::min(2.0 * alpha, cfg.step);
    } else {
      // At the rounding floor: take the longest step that lowers the gradient
      // norm without raising the energy beyond its rounding noise.
      for (alpha = cfg.step; alpha >= cfg.step / 64 && !accepted; alpha *= 0.5) {
        cand = (d.u - alpha * st.s).cwiseAbs();
        if (!normalize(cand, mi, p)) continue;
        Jc = energy(cand, &gc);
        sc = measure(cand, Jc, gc);
        accepted = Jc <= d.J + noise && sc.norm < st.norm;
      }
      if (!accepted) {
        d.stalled = true;
        break;
      }
    }
    d.u = std::move(cand);
    if (d.u.maxCoeff() > 1e6) throw ConvergenceError("iterate collapsed: sup norm exceeds 1e6");
    d.J = Jc;
    gE = std::move(gc);
    st = std::move(sc);
    d.history.push_back(d.J);
  }
  if (!d.converged) d.grad_norm = st.norm;
  d.u = scatter(d.u);
  return d;
}

}  // namespace

Eigen::VectorXd lumped_mass(const Mesh& mesh) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(mesh.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double A = triangle_area(mesh, static_cast<int>(t));
    for (int k : mesh.triangles[t]) m[k] += A / 3.0;
  }
  return m;
}

double assemble_energy(const PlanarField& field, const NormModel& norm) {
  require_planar(norm);
  return energy_impl(*field.mesh, geometry(*field.mesh), field.values, norm, nullptr);
}

Eigen::VectorXd energy_gradient(const PlanarField& field, const NormModel& norm) {
  require_planar(norm);
  Eigen::VectorXd g;
  energy_impl(*field.mesh, geometry(*field.mesh), field.values, norm, &g);
  return g;
}

CpResult minimize_cp(std::shared_ptr<const Mesh> mesh, const NormModel& norm, const SolveConfig& config,
                     const PlanarField* warm_start) {
  if (!(config.p > 1.0)) throw ConfigError("minimize_cp: p must exceed 1");
  const Eigen::VectorXd* warm = warm_start && warm_start->mesh == mesh ? &warm_start->values : nullptr;
  auto d = descend(*mesh, norm, config.p, config, warm);
  CpResult r;
  r.u_bar = PlanarField(mesh, std::move(d.u));
  r.Cp = d.J;
  r.grad_norm = d.grad_norm;
  r.iterations = d.iterations;
  r.converged = d.converged;
  r.stalled = d.stalled;
  r.history = std::move(d.history);
  return r;
}

PlanarField least_energy_solution(const PlanarField& u_bar, double Cp, double p) {
  return PlanarField(u_bar.mesh, u_bar.values * std::pow(Cp, 1.0 / (p - 1.0)));
}

double weak_residual(const PlanarField& u, const NormModel& norm, double p) {
  const Eigen::VectorXd g = energy_gradient(u, norm);
  const Eigen::VectorXd m = lumped_mass(*u.mesh);
  const Eigen::VectorXd rhs = m.cwiseProduct(nodal_power(u.values, p));
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < u.mesh->size(); ++i) {
    if (u.mesh->boundary_flags[i]) continue;
    worst = std::max(worst, std::abs(0.5 * g[i] - rhs[i]));
    scale = std::max(scale, rhs[i]);
  }
  return worst / scale;
}

EigenResult first_eigenvalue(std::shared_ptr<const Mesh> mesh, const NormModel& norm, const SolveConfig& config) {
  auto d = descend(*mesh, norm, 1.0, config, nullptr);
  EigenResult r;
  r.lambda = d.J;
  r.u = PlanarField(mesh, std::move(d.u));
  r.iterations = d.iterations;
  r.converged = d.converged;
  return r;
}

std::vector<BlowupRow> blowup_diagnostics(const std::vector<std::pair<double, PlanarField>>& sequence,
                                          const NormModel& norm, double d_N, double beta_N) {
  std::vector<BlowupRow> rows;
  for (const auto& [p, u] : sequence) {
    const Mesh& mesh = *u.mesh;
    const Eigen::VectorXd m = lumped_mass(mesh);
    const Eigen::VectorXd up = nodal_power(u.values, p);
    BlowupRow r;
    r.p = p;
    Eigen::Index imax;
    r.umax = u.values.maxCoeff(&imax);
    r.peak = mesh.vertices[imax];
    r.peak_refined = refine_peak(mesh, u.values, static_cast<int>(imax));
    r.peak_dist = boundary_distance(mesh.domain, r.peak);
    r.lambda_p = m.dot(up);
    r.p_lambda = p * r.lambda_p;
    r.L0_estimate = r.p_lambda / (2.0 * std::exp(0.5));
    r.L1_estimate = r.L0_estimate / d_N;
    r.gamma_lower = beta_N / r.L1_estimate;
    r.v = u.values / r.lambda_p;

    const double diam = diameter(mesh.domain);
    const double frac[3] = {0.05, 0.1, 0.2};
    for (int i = 0; i < mesh.size(); ++i) {
      const double h0 = dual_norm(norm, Eigen::Vector2d(mesh.vertices[i] - r.peak));
      for (int k = 0; k < 3; ++k)
        if (h0 < frac[k] * diam) r.gamma_hat[k] += m[i] * up[i] / r.lambda_p;
    }

    std::vector<bool> is_max(mesh.size(), true);
    for (const auto& t : mesh.triangles)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (u.values[t[a]] < u.values[t[b]]) is_max[t[a]] = false;
    for (int i = 0; i < mesh.size(); ++i)
      if (is_max[i] && u.values[i] > 0.5 * r.umax) ++r.local_maxima;
    rows.push_back(std::move(r));
  }
  return rows;
}

double planar_green_error(const PlanarField& v, const NormModel& norm, double kappa, double R, double s0,
                          double s1) {
  double worst = 0.0;
  for (int i = 0; i < v.mesh->size(); ++i) {
    const double h0 = dual_norm(norm, Eigen::Vector2d(v.mesh->vertices[i]));
    if (h0 < s0 || h0 > s1) continue;
    worst = std::max(worst, std::abs(v.values[i] - std::log(R / h0) / (2.0 * kappa)));
  }
  return worst;
}

}  // namespace finsler
