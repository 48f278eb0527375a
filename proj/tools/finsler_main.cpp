// finsler: command line front end for the norm, constants, radial, planar and
// sweep modules.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration, assumption
// or I/O error, 3 solver non-convergence (thrown, or recorded for some p).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "finsler/config.hpp"
#include "finsler/constants.hpp"
#include "finsler/errors.hpp"
#include "finsler/parallel.hpp"
#include "finsler/sweep.hpp"
#include "finsler/verify.hpp"

namespace {

using namespace finsler;

enum Exit { kOk = 0, kVerifyFailed = 1, kConfig = 2, kNotConverged = 3 };

// Flag values; an empty optional leaves the config-file (or default) value.
struct Overrides {
  std::string config;
  std::optional<std::string> norm, domain, p_list, out, model, solver, dump;
  std::optional<int> dim, max_iters, budget;
  std::optional<double> radius, rtol, grad_tol, mesh_h;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool no_continuation = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "key = value configuration file; flags override its values");
  app->add_option("--seed", o.seed, "seed for every random draw (default 42)");
  app->add_option("--threads", o.threads, "cap on worker threads (0 = hardware concurrency)");
}

void add_norm(CLI::App* app, Overrides& o) {
  app->add_option("--norm", o.norm, "euclidean | ellipse:a11,a12,a22[,...] | lq:q");
  app->add_option("--dim", o.dim, "space dimension N >= 2");
}

void add_radial(CLI::App* app, Overrides& o) {
  app->add_option("--radius", o.radius, "Wulff ball radius R");
  app->add_option("--rtol", o.rtol, "ODE relative tolerance (default 1e-8)");
}

void add_planar(CLI::App* app, Overrides& o) {
  app->add_option("--domain", o.domain, "square | disk | polygon:<file>");
  app->add_option("--mesh-h", o.mesh_h, "target mesh size (default 1/64)");
  app->add_option("--grad-tol", o.grad_tol, "descent stopping tolerance (default 1e-7)");
  app->add_option("--max-iters", o.max_iters, "descent iteration cap");
  app->add_flag("--no-continuation", o.no_continuation, "cold-start every p instead of warm-starting");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.norm) c.norm = *o.norm;
  if (o.dim) c.dim = *o.dim;
  if (o.solver) c.solver = parse_solver(*o.solver);
  if (o.domain) c.domain = *o.domain;
  if (o.radius) c.radius = *o.radius;
  if (o.p_list) c.p_list = parse_p_list(*o.p_list);
  if (o.rtol) c.rtol = *o.rtol;
  if (o.grad_tol) c.grad_tol = *o.grad_tol;
  if (o.max_iters) c.max_iters = *o.max_iters;
  if (o.mesh_h) c.mesh_h = *o.mesh_h;
  if (o.no_continuation) c.continuation = false;
  if (o.budget) c.quad_budget = *o.budget;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.model) c.model = parse_model(*o.model);
  if (o.threads) c.threads = *o.threads;
  if (c.dim < 2) throw ConfigError("dim must be >= 2");
  if (!(c.radius > 0.0)) throw ConfigError("radius must be positive");
  if (!(c.rtol > 0.0) || !(c.grad_tol > 0.0) || !(c.mesh_h > 0.0)) throw ConfigError("tolerances and mesh_h must be positive");
  if (c.max_iters < 1 || c.quad_budget < 1) throw ConfigError("max_iters and budget must be >= 1");
  validate(c);
  set_thread_limit(c.threads);
  return c;
}

nlohmann::ordered_json vec_json(const Vec& v) {
  auto a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

int run_constants(const RunConfig& c, bool table) {
  const GeometryReport g = limit_constants(parse_norm(c.norm, c.dim), c.quad_budget, c.seed);
  if (table) {
    const auto row = [](const char* name, const std::string& value) { std::printf("%-20s %s\n", name, value.c_str()); };
    row("norm", g.norm);
    row("N", std::to_string(g.N));
    row("kappa", format_double(g.kappa));
    row("kappa_std_error", format_double(g.kappa_std_error));
    row("beta_N", format_double(g.beta_N));
    row("d_N", format_double(g.d_N));
    row("d_boundary_suspect", g.d_boundary_suspect ? "yes" : "no");
    row("alpha", format_double(g.alpha));
    row("beta", format_double(g.beta));
    row("lambda_min_sphere", format_double(g.lambda_min_sphere));
    row("assumption_passes", g.assumption_passes ? "yes" : "no");
    row("cp_limit", format_double(g.cp_limit));
    row("ding_bound", format_double(g.ding_bound));
    row("blowup_bound", std::to_string(g.blowup_bound));
    return kOk;
  }
  nlohmann::ordered_json j;
  j["norm"] = g.norm;
  j["N"] = g.N;
  j["kappa"] = g.kappa;
  j["kappa_std_error"] = g.kappa_std_error;
  j["beta_N"] = g.beta_N;
  j["d_N"] = g.d_N;
  j["d_argmin"] = {vec_json(g.d_argmin_X), vec_json(g.d_argmin_Y)};
  j["d_boundary_suspect"] = g.d_boundary_suspect;
  j["alpha"] = g.alpha;
  j["beta"] = g.beta;
  j["lambda_min_sphere"] = g.lambda_min_sphere;
  j["assumption_passes"] = g.assumption_passes;
  j["cp_limit"] = g.cp_limit;
  j["ding_bound"] = g.ding_bound;
  j["blowup_bound"] = g.blowup_bound;
  j["seed"] = c.seed;
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int status_of(const std::vector<SweepRecord>& records) {
  int code = kOk;
  for (const auto& r : records)
    if (!r.ok()) {
      std::cerr << "p = " << format_double(r.p) << ": " << r.status << "\n";
      code = kNotConverged;
    }
  return code;
}

// radial and planar: one CSV row per p on stdout.
int run_rows(RunConfig c, SolverKind solver, const std::optional<std::string>& dump) {
  c.solver = solver;
  SweepConfig s = to_sweep_config(c);
  if (dump) s.dump_dir = *dump;
  const auto records = run_sweep(s);
  std::cout << to_csv(records);
  return status_of(records);
}

int run_sweep_cmd(const RunConfig& c, const std::optional<std::string>& dump) {
  SweepConfig s = to_sweep_config(c);
  if (dump) s.dump_dir = *dump;
  const auto records = run_sweep(s);
  emit(records, s, c.model, c.out);
  std::cout << "wrote " << c.out << "/sweep.csv, sweep.json, extrapolation.json, sweep.plt\n";
  return status_of(records);
}

int run_verify(const RunConfig& c, const std::optional<std::string>& report) {
  const VerifyReport rep = verify_all(c);
  const std::string json = rep.to_json();
  if (report) {
    std::ofstream out(*report, std::ios::binary);
    if (!(out << json)) throw std::runtime_error("cannot write '" + *report + "'");
  } else {
    std::cout << json;
  }
  for (const auto& chk : rep.checks)
    if (!chk.passed) std::cerr << "FAIL " << chk.suite << ": " << chk.name << " (" << chk.detail << ")\n";
  return rep.passed() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler N-Laplacian Lane-Emden solvers and asymptotic sweeps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "finsler 1.0");

  Overrides o;
  bool table = false;

  auto* constants = app.add_subcommand("constants", "geometric constants of a norm (JSON, or a table with --table)");
  add_common(constants, o);
  add_norm(constants, o);
  constants->add_option("--budget", o.budget, "multistart budget for d_N (default 64)");
  constants->add_flag("--table", table, "print a human-readable table instead of JSON");

  auto* radial = app.add_subcommand("radial", "radial shooting on the Wulff ball; CSV rows on stdout");
  add_common(radial, o);
  add_norm(radial, o);
  add_radial(radial, o);
  radial->add_option("--p-list", o.p_list, "comma-separated increasing p values > 1");
  radial->add_option("--dump", o.dump, "directory for phi_pNNN.csv profile dumps");

  auto* planar = app.add_subcommand("planar", "P1 minimization of C_p in 2D; CSV rows on stdout");
  add_common(planar, o);
  add_norm(planar, o);
  add_planar(planar, o);
  planar->add_option("--p-list", o.p_list, "comma-separated increasing p values > 1");
  planar->add_option("--dump", o.dump, "directory for u_pNNN.txt field dumps (x y u per node)");

  auto* sweep = app.add_subcommand("sweep", "p-sweep with extrapolation; writes CSV, JSON and a gnuplot script");
  add_common(sweep, o);
  add_norm(sweep, o);
  add_radial(sweep, o);
  add_planar(sweep, o);
  sweep->add_option("--solver", o.solver, "radial | planar");
  sweep->add_option("--p-list", o.p_list, "comma-separated increasing p values > 1");
  sweep->add_option("--out", o.out, "output directory (default out)");
  sweep->add_option("--model", o.model, "extrapolation model: logp | p | plogp");
  sweep->add_option("--dump", o.dump, "directory for profile or field dumps");

  auto* verify = app.add_subcommand("verify", "run the full property suite; JSON report");
  add_common(verify, o);
  add_norm(verify, o);
  add_radial(verify, o);
  add_planar(verify, o);
  verify->add_option("--solver", o.solver, "radial | planar");
  verify->add_option("--p-list", o.p_list, "p values for the Pohozaev suite");
  std::optional<std::string> report;
  verify->add_option("--report", report, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const RunConfig c = resolve(o);
    if (constants->parsed()) return run_constants(c, table);
    if (radial->parsed()) return run_rows(c, SolverKind::radial, o.dump);
    if (planar->parsed()) return run_rows(c, SolverKind::planar, o.dump);
    if (sweep->parsed()) return run_sweep_cmd(c, o.dump);
    return run_verify(c, report);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
}
