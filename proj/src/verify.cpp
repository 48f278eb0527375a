#include "finsler/verify.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "finsler/constants.hpp"
#include "finsler/errors.hpp"
#include "finsler/planar.hpp"
#include "finsler/radial.hpp"

namespace finsler {

namespace {

constexpr double kJ01 = 2.404825557695773;

class Suite {
 public:
  Suite(VerifyReport& report, std::string name) : report_(report), name_(std::move(name)) {}

  // |value - target| <= tol
  void near(const std::string& name, double value, double target, double tol) {
    add(name, std::abs(value - target) <= tol, value, tol, "target " + format_double(target));
  }
  // value <= bound
  void below(const std::string& name, double value, double bound, const std::string& detail = "") {
    add(name, value <= bound, value, bound, detail);
  }
  void add(const std::string& name, bool ok, double value, double tol, std::string detail) {
    report_.checks.push_back({name_, name, ok && std::isfinite(value), value, tol, std::move(detail)});
  }
  // Runs f and records a failed check if it throws.
  template <class F>
  void guard(const std::string& name, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      add(name, false, NAN, 0.0, std::string("threw: ") + e.what());
    }
  }

 private:
  VerifyReport& report_;
  std::string name_;
};

void norm_suite(VerifyReport& rep, const RunConfig& cfg) {
  Suite s(rep, "norm_identities");
  const std::vector<std::pair<std::string, NormModel>> norms{
      {"euclidean N=2", NormModel::euclidean(2)},
      {"euclidean N=3", NormModel::euclidean(3)},
      {"ellipse diag(4,1)", NormModel::ellipse((Mat(2, 2) << 4, 0, 0, 1).finished())},
      {"lq q=3 N=2", NormModel::lq(3, 2)},
      {"lq q=1.5 N=3", NormModel::lq(1.5, 3)}};
  for (const auto& [name, norm] : norms) {
    s.guard(name, [&] {
      const auto r = verify_identities(norm, 1000, 1e-8, cfg.seed);
      s.add(name + " analytic", r.passed, r.max_residual(), 1e-8, r.failure);
    });
    s.guard(name + " numeric", [&] {
      const auto r = verify_identities(norm.with_dual_mode(DualMode::numeric), 1000, 1e-5, cfg.seed);
      s.add(name + " numeric dual", r.passed, r.max_residual(), 1e-5, r.failure);
    });
  }
  s.guard("configured norm", [&] {
    const auto r = verify_identities(parse_norm(cfg.norm, cfg.dim), 1000, 1e-8, cfg.seed);
    s.add("configured norm " + cfg.norm, r.passed, r.max_residual(), 1e-8, r.failure);
  });
}

void constants_suite(VerifyReport& rep, const RunConfig& cfg) {
  Suite s(rep, "constants");
  const double pi = std::numbers::pi;
  s.guard("kappa", [&] {
    s.near("kappa_2 euclidean", wulff_volume(NormModel::euclidean(2), cfg.seed).value, pi, 1e-8);
    s.near("kappa_2 ellipse diag(4,1)", wulff_volume(NormModel::ellipse((Mat(2, 2) << 4, 0, 0, 1).finished()), cfg.seed).value,
           2 * pi, 1e-6);
    s.near("kappa_3 euclidean", wulff_volume(NormModel::euclidean(3), cfg.seed).value, 4 * pi / 3, 1e-6);
  });
  s.near("beta_2 euclidean", trudinger_moser_exponent(2, pi), 4 * pi, 1e-12);
  s.guard("d_N", [&] {
    s.near("d_2 euclidean", d_constant(NormModel::euclidean(2), cfg.quad_budget, cfg.seed).value, 1.0, 1e-6);
    s.below("d_3 euclidean", d_constant(NormModel::euclidean(3), cfg.quad_budget, cfg.seed).value, 0.5 + 1e-4,
            "collinear infimum 1/2");
  });
}

void bessel_suite(VerifyReport& rep, const RunConfig& cfg) {
  Suite s(rep, "bessel");
  s.guard("radial", [&] {
    ShootOptions opt;
    opt.rtol = std::min(cfg.rtol, 1e-10);
    s.near("first zero of J0", shoot(2, 1.0, opt).R1, kJ01, 1e-6);
  });
  s.guard("planar", [&] {
    SolveConfig sc;
    sc.grad_tol = cfg.grad_tol;
    sc.max_iters = cfg.max_iters;
    sc.seed = cfg.seed;
    const auto mesh = std::make_shared<const Mesh>(disk_mesh(1.0, 1.0 / 32));
    const double lam = first_eigenvalue(mesh, NormModel::euclidean(2), sc).lambda;
    s.add("lambda_1 unit disk", std::abs(lam / (kJ01 * kJ01) - 1.0) <= 0.02, lam, 0.02, "relative to j01^2");
  });
}

void pohozaev_suite(VerifyReport& rep, const RunConfig& cfg) {
  Suite s(rep, "pohozaev");
  for (int N : {2, 3}) {
    const NormModel norm = NormModel::euclidean(N);
    for (double p : cfg.p_list) {
      const std::string name = "N=" + std::to_string(N) + " p=" + format_double(p);
      s.guard(name, [&] {
        ShootOptions opt;
        opt.rtol = cfg.rtol;
        const auto sol = rescale_to_domain(shoot(N, p, opt), 1.0, norm);
        s.below(name, pohozaev_residual(sol, norm), 2e-2, "relative residual");
      });
    }
  }
}

void cross_suite(VerifyReport& rep, const RunConfig& cfg) {
  Suite s(rep, "radial_vs_planar");
  const NormModel norm = NormModel::euclidean(2);
  const auto mesh = std::make_shared<const Mesh>(disk_mesh(1.0, 1.0 / 48));
  for (double p : {3.0, 5.0, 10.0}) {
    const std::string name = "Cp disk p=" + format_double(p);
    s.guard(name, [&] {
      SolveConfig sc;
      sc.p = p;
      sc.grad_tol = cfg.grad_tol;
      sc.max_iters = cfg.max_iters;
      sc.seed = cfg.seed;
      ShootOptions opt;
      opt.rtol = cfg.rtol;
      const double planar = minimize_cp(mesh, norm, sc).Cp;
      const double radial = rescale_to_domain(shoot(2, p, opt), 1.0, norm).Cp;
      s.add(name, std::abs(planar / radial - 1.0) <= 0.03, planar, 0.03, "radial " + format_double(radial));
    });
  }
}

}  // namespace

bool VerifyReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

std::string VerifyReport::to_json() const {
  nlohmann::ordered_json j;
  j["passed"] = passed();
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json o;
    o["suite"] = c.suite;
    o["name"] = c.name;
    o["passed"] = c.passed;
    o["value"] = std::isfinite(c.value) ? nlohmann::ordered_json(c.value) : nlohmann::ordered_json(nullptr);
    o["tolerance"] = c.tolerance;
    o["detail"] = c.detail;
    j["checks"].push_back(o);
  }
  return j.dump(2) + "\n";
}

VerifyReport verify_all(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.solver == SolverKind::planar) {
    const NormModel norm = parse_norm(cfg.norm, cfg.dim);
    if (norm.dim() != 2) throw AssumptionViolation("planar solves require N = 2");
    if (!check_assumptions(norm).passes)
      throw AssumptionViolation("norm '" + cfg.norm +
                                "' violates the positive-definiteness assumption; planar solve refused");
  }
  VerifyReport rep;
  norm_suite(rep, cfg);
  constants_suite(rep, cfg);
  bessel_suite(rep, cfg);
  pohozaev_suite(rep, cfg);
  cross_suite(rep, cfg);
  return rep;
}

}  // namespace finsler
