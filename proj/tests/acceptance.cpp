// Acceptance suite: one PASS/FAIL verdict line per check. Run all checks, or
// one with --check <name>. Exit status is nonzero when any selected check
// fails. Tolerances are fixed here and are not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finsler/constants.hpp"
#include "finsler/errors.hpp"
#include "finsler/mesh.hpp"
#include "finsler/planar.hpp"
#include "finsler/radial.hpp"
#include "finsler/sweep.hpp"

namespace {

using namespace finsler;

constexpr double pi = std::numbers::pi;
constexpr double e = std::numbers::e;
constexpr double kJ01 = 2.404825557695773;
const std::vector<double> kSweep{10, 20, 50, 100, 200, 400, 800};
const std::vector<double> kSquareP{10, 20, 50, 100, 200};
constexpr double kMeshH = 1.0 / 64;
const std::string kEllipse = "ellipse:4,0,1";

struct Result {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  // Folds a sub-condition into the verdict and logs it.
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok    " : "FAILED") + "  " + what);
  }
  void note(const std::string& what) { details.push_back("        " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void require_runtime(Result& r, const Stopwatch& w, double limit) {
  const double s = w.seconds();
  r.require(s < limit, fmt("runtime %.2f s < %.0f s", s, limit));
}

std::vector<SweepRecord> radial_sweep(const std::string& norm, int dim) {
  SweepConfig c;
  c.solver = SolverKind::radial;
  c.norm = norm;
  c.dim = dim;
  c.p_list = kSweep;
  const auto records = run_sweep(c);
  for (const auto& rec : records)
    if (!rec.ok()) throw ConvergenceError("radial p = " + format_double(rec.p) + ": " + rec.status);
  return records;
}

double lambda1_disk() {
  ShootOptions o;
  o.rtol = 1e-10;
  const double R1 = shoot(2, 1.0, o).R1;
  return R1 * R1;
}

void print_fits(Result& r, const std::vector<std::pair<double, double>>& s, double target) {
  for (const auto& f : extrapolate_all(s))
    r.note(fmt("fit %-16s a = %.6g (%+.2f%%), rms %.3g%s", formula(f.model).c_str(), f.a, 100 * (f.a / target - 1),
               f.residual, f.ill_conditioned ? ", ill-conditioned" : ""));
}

// Energy limit protocol: distance to the target decreasing along the sweep,
// last value within `last_tol`, a + b/log p extrapolation within `fit_tol`.
void energy_limit(Result& r, const std::vector<SweepRecord>& rec, double target, double last_tol, double fit_tol,
                  const std::string& label) {
  const auto s = series(rec, &SweepRecord::pN1energy);
  bool monotone = true;
  std::string first_break;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(std::abs(s[i].second - target) < std::abs(s[i - 1].second - target))) {
      if (monotone) first_break = fmt(" (breaks at p = %g -> %g: %.6g -> %.6g)", s[i - 1].first, s[i].first,
                                      s[i - 1].second, s[i].second);
      monotone = false;
    }
  r.require(monotone, label + " monotone toward " + fmt("%.6g", target) + first_break);
  const double last = s.back().second;
  r.require(std::abs(last / target - 1) <= last_tol,
            label + fmt(" at p = 800: %.6g (%+.2f%%, tol %.0f%%)", last, 100 * (last / target - 1), 100 * last_tol));
  const auto fit = extrapolate(s, FitModel::logp);
  r.require(std::abs(fit.a / target - 1) <= fit_tol,
            label + fmt(" a + b/log p limit: %.6g (%+.2f%%, tol %.0f%%)", fit.a, 100 * (fit.a / target - 1), 100 * fit_tol));
  print_fits(r, s, target);
}

// Least energy solutions on the unit square with continuation in p.
struct SquareRun {
  std::vector<double> Cp;
  std::vector<BlowupRow> rows;
  double seconds = 0.0;
};

SquareRun square_run(const NormModel& norm) {
  const Stopwatch w;
  const auto mesh = std::make_shared<const Mesh>(mesh_from_spec("square", kMeshH));
  const GeometryReport g = limit_constants(norm);
  SquareRun out;
  std::vector<std::pair<double, PlanarField>> seq;
  std::optional<CpResult> prev;
  for (double p : kSquareP) {
    SolveConfig sc;
    sc.p = p;
    CpResult res = minimize_cp(mesh, norm, sc, prev ? &prev->u_bar : nullptr);
    if (!res.converged) throw ConvergenceError("square p = " + format_double(p) + " did not converge");
    out.Cp.push_back(res.Cp);
    seq.emplace_back(p, least_energy_solution(res.u_bar, res.Cp, p));
    prev = std::move(res);
  }
  out.rows = blowup_diagnostics(seq, norm, g.d_N, g.beta_N);
  out.seconds = w.seconds();
  return out;
}

Result norm_identities() {
  Result r;
  const Stopwatch w;
  const std::vector<std::pair<std::string, NormModel>> norms{
      {"euclidean N=2", NormModel::euclidean(2)}, {"euclidean N=3", NormModel::euclidean(3)},
      {kEllipse, parse_norm(kEllipse, 2)},     {"lq:3 N=2", NormModel::lq(3, 2)},
      {"lq:1.5 N=3", NormModel::lq(1.5, 3)}};
  for (const auto& [name, norm] : norms) {
    const auto a = verify_identities(norm, 1000, 1e-8, 42);
    r.require(a.passed, fmt("%s analytic: max residual %.3g <= 1e-8 %s", name.c_str(), a.max_residual(), a.failure.c_str()));
    const auto n = verify_identities(norm.with_dual_mode(DualMode::numeric), 1000, 1e-5, 42);
    r.require(n.passed, fmt("%s numeric dual: max residual %.3g <= 1e-5 %s", name.c_str(), n.max_residual(), n.failure.c_str()));
  }
  require_runtime(r, w, 5);
  r.summary = "gradient, Euler, duality and inverse-map identities on 1000 samples per norm";
  return r;
}

Result constants() {
  Result r;
  const Stopwatch w;
  const double k2 = wulff_volume(NormModel::euclidean(2)).value;
  r.require(std::abs(k2 - pi) <= 1e-8, fmt("kappa_2 euclidean = %.15g, |err| %.3g <= 1e-8", k2, std::abs(k2 - pi)));
  const double ke = wulff_volume(parse_norm(kEllipse, 2)).value;
  r.require(std::abs(ke - 2 * pi) <= 1e-6, fmt("kappa_2 ellipse diag(4,1) = %.15g, |err| %.3g <= 1e-6", ke, std::abs(ke - 2 * pi)));
  // beta_2 = 4 kappa_2 inherits four times the kappa tolerance.
  const double b2 = trudinger_moser_exponent(2, k2);
  r.require(std::abs(b2 - 4 * pi) <= 4e-8, fmt("beta_2 euclidean = %.15g, |err| %.3g <= 4e-8", b2, std::abs(b2 - 4 * pi)));
  const DConstant d2 = d_constant(NormModel::euclidean(2));
  r.require(std::abs(d2.value - 1) <= 1e-6, fmt("d_2 euclidean = %.12g, |err| %.3g <= 1e-6", d2.value, std::abs(d2.value - 1)));
  const auto eu3 = NormModel::euclidean(3);
  const DConstant d3 = d_constant(eu3);
  r.require(d3.value <= 0.5 + 1e-4, fmt("d_3 euclidean = %.12g <= 0.5 + 1e-4", d3.value));
  // The minimizing pair should be the collinear antipodal family X = -Y.
  const double cosine = d3.X.dot(d3.Y) / (d3.X.norm() * d3.Y.norm());
  r.require(cosine <= -1 + 1e-6, fmt("d_3 argmin collinear antipodal: cos(X, Y) = %.12g", cosine));
  const Vec X = Vec::Unit(3, 0);
  const double family = flux_quotient(eu3, X, -X);
  r.require(std::abs(family - 0.5) <= 1e-12, fmt("collinear family X=(1,0,0), Y=(-1,0,0): quotient %.15g = 1/2", family));
  require_runtime(r, w, 30);
  r.summary = "kappa, beta_2, d_2 and d_3 against closed forms";
  return r;
}

Result bessel() {
  Result r;
  const Stopwatch w;
  ShootOptions o;
  o.rtol = 1e-10;
  const double R1 = shoot(2, 1.0, o).R1;
  r.require(std::abs(R1 - 2.404826) <= 1e-6, fmt("radial p = 1 first zero %.10f, target 2.404826 +- 1e-6", R1));
  const auto mesh = std::make_shared<const Mesh>(disk_mesh(1.0, kMeshH));
  const double lam = first_eigenvalue(mesh, NormModel::euclidean(2), SolveConfig{}).lambda;
  r.require(std::abs(lam / (kJ01 * kJ01) - 1) <= 0.02,
            fmt("planar lambda_1 unit disk h = 1/64: %.6g vs j01^2 = %.6g (%+.2f%%, tol 2%%)", lam, kJ01 * kJ01,
                100 * (lam / (kJ01 * kJ01) - 1)));
  require_runtime(r, w, 60);
  r.summary = "Bessel case: first zero of J0 and the planar first eigenvalue";
  return r;
}

Result energy_limit_2d() {
  Result r;
  const Stopwatch w;
  energy_limit(r, radial_sweep("euclidean", 2), 8 * pi * e, 0.05, 0.02, "euclidean p E");
  energy_limit(r, radial_sweep(kEllipse, 2), 16 * pi * e, 0.05, 0.03, "ellipse p E");
  require_runtime(r, w, 120);
  r.summary = "p E_p -> 8 pi e (euclidean disk) and 16 pi e (ellipse diag(4,1))";
  return r;
}

Result energy_limit_3d() {
  Result r;
  const Stopwatch w;
  const double beta3 = 3 * std::sqrt(4 * pi);
  const double target = std::pow(3 * e * beta3 / 2, 2);
  const auto s = series(radial_sweep("euclidean", 3), &SweepRecord::pN1energy);
  r.note(fmt("target (3 e beta_3 / 2)^2 = %.8g", target));
  for (const auto& [p, v] : s) r.note(fmt("p = %4g: p^2 E = %.6g", p, v));
  const auto fit = extrapolate(s, FitModel::logp);
  r.require(std::abs(fit.a / target - 1) <= 0.05,
            fmt("a + b/log p limit: %.6g (%+.2f%%, tol 5%%)", fit.a, 100 * (fit.a / target - 1)));
  print_fits(r, s, target);
  require_runtime(r, w, 120);
  r.summary = "p^2 E_p -> (3 e beta_3 / 2)^2 on the 3D ball";
  return r;
}

Result sup_norm() {
  Result r;
  const double lam1 = lambda1_disk();
  const auto rec = radial_sweep("euclidean", 2);
  for (const auto& x : rec) {
    if (x.p < 50) continue;
    const double lo = std::pow(lam1, 1 / (x.p - 1)), hi = std::sqrt(e) * 1.03;
    r.require(*x.umax >= lo && *x.umax <= hi, fmt("p = %4g: umax %.8g in [%.8g, %.8g]", x.p, *x.umax, lo, hi));
  }
  const double last = *rec.back().umax;
  r.require(std::abs(last / std::sqrt(e) - 1) <= 0.03,
            fmt("p = 800: umax %.8g vs sqrt(e) (%+.2f%%, tol 3%%)", last, 100 * (last / std::sqrt(e) - 1)));
  r.summary = "sup norm of u_p on the disk between lambda_1^{1/(p-1)} and 1.03 sqrt(e)";
  return r;
}

Result mass_bounds() {
  Result r;
  const double lam1 = lambda1_disk();
  // Constants from the two-sided estimate with the energy limit L substituted,
  // widened by a factor 2.
  const double L = 8 * pi * e;
  const double C = L / (2 * std::exp(0.5)), Cprime = 2 * L;
  r.note(fmt("band [C, C'] = [%.6g, %.6g]", C, Cprime));
  for (const auto& x : radial_sweep("euclidean", 2)) {
    const double pl = *x.plambdap;
    r.require(pl >= C && pl <= Cprime, fmt("p = %4g: p int u^p = %.6g", x.p, pl));
    // umax^{p-1} >= 0.99 lambda_1, compared in logs.
    const double lhs = (x.p - 1) * std::log(*x.umax), rhs = std::log(0.99 * lam1);
    r.require(lhs >= rhs, fmt("p = %4g: log umax^{p-1} = %.6g >= log(0.99 lambda_1) = %.6g", x.p, lhs, rhs));
  }
  r.summary = "p int u^p stays in [C, C'] and umax^{p-1} >= 0.99 lambda_1";
  return r;
}

Result green_limit() {
  Result r;
  for (const std::string norm : {"euclidean", kEllipse.c_str()}) {
    const auto rec = radial_sweep(norm, 2);
    bool decreasing = true;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      r.note(fmt("%s p = %4g: log sup error %.6g", norm.c_str(), rec[i].p, *rec[i].log_greensup));
      if (i > 0 && !(*rec[i].log_greensup < *rec[i - 1].log_greensup)) decreasing = false;
    }
    r.require(decreasing, norm + " sup error strictly decreasing along the sweep");
    if (norm == "euclidean")
      r.require(*rec.back().log_greensup <= std::log(0.01),
                fmt("euclidean p = 800: sup error exp(%.6g) <= 0.01", *rec.back().log_greensup));
  }
  r.summary = "v_p -> G on the annulus 0.3 <= H0 <= 0.9 (disk and ellipse Wulff ball)";
  return r;
}

Result ding_mass() {
  Result r;
  const double target = 8 * pi;
  const auto rec = radial_sweep("euclidean", 2);
  for (const auto& x : rec)
    r.require(*x.dingmass >= 0.9 * target, fmt("p = %4g: mass %.6g >= 0.9 * 8 pi = %.6g", x.p, *x.dingmass, 0.9 * target));
  const double last = *rec.back().dingmass;
  r.require(std::abs(last / target - 1) <= 0.1, fmt("p = 800: mass %.6g vs 8 pi (%+.2f%%, tol 10%%)", last, 100 * (last / target - 1)));
  const auto eu = NormModel::euclidean(2);
  const auto sol = rescale_to_domain(shoot(2, 800.0), 1.0, eu);
  for (double rho : {1.0, 2.0, 4.0}) {
    const double z = rescaled_z(sol, rho), liouville = -2 * std::log(1 + rho * rho / 8);
    r.require(std::abs(z - liouville) <= 0.1, fmt("p = 800, rho = %g: z_p %.6g vs Liouville %.6g", rho, z, liouville));
  }
  r.summary = "rescaled mass toward 8 pi, never below 0.9 * 8 pi, Liouville profile";
  return r;
}

Result pohozaev() {
  Result r;
  const std::vector<std::pair<std::string, int>> cases{{"euclidean", 2}, {kEllipse, 2}, {"euclidean", 3}};
  double worst = 0.0;
  for (const auto& [name, N] : cases) {
    const auto norm = parse_norm(name, N);
    for (double p : kSweep) {
      const double res = pohozaev_residual(rescale_to_domain(shoot(N, p), 1.0, norm), norm);
      worst = std::max(worst, res);
      if (!(res <= 2e-2)) r.require(false, fmt("%s N=%d p = %g: residual %.3g > 2e-2", name.c_str(), N, p, res));
    }
  }
  r.require(worst <= 2e-2, fmt("worst residual over all radial solutions %.3g <= 2e-2", worst));
  // Least-squares slope of log10 residual against log10 rtol over 1e-4 .. 1e-8.
  for (int N : {2, 3}) {
    const auto norm = NormModel::euclidean(N);
    for (double p : {10.0, 100.0, 800.0}) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int n = 0;
      for (double k = 4; k <= 8; ++k, ++n) {
        ShootOptions o;
        o.rtol = std::pow(10.0, -k);
        o.atol = o.rtol * 1e-2;
        const double res = pohozaev_residual(rescale_to_domain(shoot(N, p, o), 1.0, norm), norm);
        sx += -k, sy += std::log10(res), sxx += k * k, sxy += -k * std::log10(res);
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      r.require(slope >= 1.0, fmt("N=%d p = %g: log-log slope against rtol %.3g >= 1", N, p, slope));
    }
  }
  r.summary = "Pohozaev residual <= 2% and at least linear in rtol";
  return r;
}

Result cp_bound() {
  Result r;
  int checked = 0, failed = 0;
  const auto check = [&](const std::string& what, double p, double Cp, double bound) {
    ++checked;
    const bool ok = Cp <= bound;
    if (!ok) ++failed;
    r.require(ok, fmt("%s p = %g: Cp %.6g <= bound %.6g", what.c_str(), p, Cp, bound));
  };
  const std::vector<std::pair<std::string, int>> radial{
      {"euclidean", 2}, {kEllipse, 2}, {"lq:1.5", 2}, {"lq:3", 2}, {"euclidean", 3}};
  for (const auto& [name, N] : radial) {
    const auto norm = parse_norm(name, N);
    for (const auto& x : radial_sweep(name, N))
      check("radial " + name + " N=" + std::to_string(N) + " ball R=1", x.p, *x.Cp, cp_upper_bound(x.p, 1.0, norm));
  }
  // lq norms fail the Hessian assumption and are radial-only.
  for (const std::string name : {"euclidean", kEllipse.c_str(), "ellipse:2,0.5,1"}) {
    const auto norm = parse_norm(name, 2);
    const double L = h0_inradius(norm, square_polygon()).radius;
    const auto run = square_run(norm);
    for (std::size_t i = 0; i < kSquareP.size(); ++i)
      check("planar " + name + fmt(" square L=%.6g", L), kSquareP[i], run.Cp[i], cp_upper_bound(kSquareP[i], L, norm));
  }
  const auto eu = NormModel::euclidean(2);
  const auto disk = std::make_shared<const Mesh>(disk_mesh(1.0, kMeshH));
  const double Ld = h0_inradius(eu, disk->domain).radius;
  for (double p : {3.0, 5.0, 10.0}) {
    SolveConfig sc;
    sc.p = p;
    check(fmt("planar euclidean disk L=%.6g", Ld), p, minimize_cp(disk, eu, sc).Cp, cp_upper_bound(p, Ld, eu));
  }
  r.summary = fmt("Cp below the Moser-function bound for every solve (%d of %d violate)", failed, checked);
  return r;
}

Result interior_blowup() {
  Result r;
  double seconds = 0.0;
  for (const std::string name : {"euclidean", kEllipse.c_str()}) {
    const auto norm = parse_norm(name, 2);
    const auto run = square_run(norm);
    seconds += run.seconds;
    const long bound = limit_constants(norm).blowup_bound;
    for (const auto& row : run.rows) {
      r.require(row.peak_dist >= 0.1, fmt("%s p = %g: peak (%.4f, %.4f), distance to boundary %.4f >= 0.1", name.c_str(),
                                          row.p, row.peak.x(), row.peak.y(), row.peak_dist));
      if (name == "euclidean")
        r.require(row.local_maxima <= bound, fmt("%s p = %g: %d local maxima <= %ld", name.c_str(), row.p, row.local_maxima, bound));
    }
  }
  r.require(seconds < 600, fmt("planar sweep runtime %.2f s < 600 s", seconds));
  r.summary = "interior peak on the unit square, h = 1/64, p = 10 .. 200";
  return r;
}

Result cross_solver() {
  Result r;
  const auto eu = NormModel::euclidean(2);
  const auto disk = std::make_shared<const Mesh>(disk_mesh(1.0, kMeshH));
  for (double p : {3.0, 5.0, 10.0}) {
    SolveConfig sc;
    sc.p = p;
    const double planar = minimize_cp(disk, eu, sc).Cp;
    const double radial = rescale_to_domain(shoot(2, p), 1.0, eu).Cp;
    r.require(std::abs(planar / radial - 1) <= 0.03,
              fmt("p = %g: planar %.6g vs radial %.6g (%+.2f%%, tol 3%%)", p, planar, radial, 100 * (planar / radial - 1)));
  }
  r.summary = "planar Cp on the disk matches the radial Cp";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Result()>>> checks{
      {"norm_identities", norm_identities}, {"constants", constants},
      {"bessel", bessel},                   {"energy_limit_2d", energy_limit_2d},
      {"energy_limit_3d", energy_limit_3d}, {"sup_norm", sup_norm},
      {"mass_bounds", mass_bounds},         {"green_limit", green_limit},
      {"ding_mass", ding_mass},             {"pohozaev", pohozaev},
      {"cp_bound", cp_bound},               {"interior_blowup", interior_blowup},
      {"cross_solver", cross_solver}};

  CLI::App app{"acceptance checks"};
  std::string only;
  app.add_option("--check", only, "run a single check by name");
  bool list = false;
  app.add_flag("--list", list, "print the check names and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& [name, f] : checks) std::printf("%s\n", name.c_str());
    return 0;
  }
  bool any = false, all_pass = true;
  for (const auto& [name, run] : checks) {
    if (!only.empty() && name != only) continue;
    any = true;
    Result r;
    try {
      r = run();
    } catch (const std::exception& ex) {
      r.pass = false;
      r.summary = std::string("threw: ") + ex.what();
    }
    for (const auto& d : r.details) std::printf("  %s\n", d.c_str());
    std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", name.c_str(), r.summary.c_str());
    std::fflush(stdout);
    all_pass = all_pass && r.pass;
  }
  if (!any) {
    std::fprintf(stderr, "unknown check '%s'\n", only.c_str());
    return 2;
  }
  return all_pass ? 0 : 1;
}
