#include "finsler/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>
#include <json.hpp>

#include "finsler/constants.hpp"
#include "finsler/errors.hpp"
#include "finsler/parallel.hpp"
#include "finsler/radial.hpp"

namespace finsler {

namespace {

using Field = std::optional<double> SweepRecord::*;

// Emit order; index 0 is p and has no member.
constexpr std::array<Field, 15> kFields{nullptr,
                                        &SweepRecord::Cp,
                                        &SweepRecord::pN1Cp,
                                        &SweepRecord::energy,
                                        &SweepRecord::pN1energy,
                                        &SweepRecord::massp1,
                                        &SweepRecord::pN1massp1,
                                        &SweepRecord::umax,
                                        &SweepRecord::lambdap,
                                        &SweepRecord::plambdap,
                                        &SweepRecord::L0est,
                                        &SweepRecord::dingmass,
                                        &SweepRecord::greensup,
                                        &SweepRecord::peakdist,
                                        &SweepRecord::gammahat};

constexpr std::array<const char*, 15> kColumns{"p",       "Cp",        "pN1Cp",    "energy",   "pN1energy",
                                               "massp1",  "pN1massp1", "umax",     "lambdap",  "plambdap",
                                               "L0est",   "dingmass",  "greensup", "peakdist", "gammahat"};

void validate_p_list(const std::vector<double>& ps) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!(ps[i] > 1.0) || !std::isfinite(ps[i])) throw ConfigError("p values must be finite and > 1");
    if (i > 0 && !(ps[i] > ps[i - 1])) throw ConfigError("p_list must be strictly increasing");
  }
}

// Fills the quantities shared by both solvers from energy, mass_{p+1},
// mass_p and umax of a solution of -Q_N u = u^p.
void fill_common(SweepRecord& r, int N, double Cp, double energy, double mass_p1, double mass_p, double umax) {
  const double w = std::pow(r.p, N - 1);
  r.Cp = Cp;
  r.pN1Cp = w * Cp;
  r.energy = energy;
  r.pN1energy = w * energy;
  r.massp1 = mass_p1;
  r.pN1massp1 = w * mass_p1;
  r.umax = umax;
  r.lambdap = std::pow(mass_p, 1.0 / (N - 1));
  r.plambdap = r.p * *r.lambdap;
  r.L0est = *r.plambdap / (N / (N - 1.0) * std::exp((N - 1.0) / N));
}

SweepRecord radial_record(const SweepConfig& cfg, const NormModel& norm, double p) {
  SweepRecord r;
  r.p = p;
  ShootOptions opt;
  opt.rtol = cfg.rtol;
  const RadialProfile profile = shoot(norm.dim(), p, opt);
  if (!cfg.dump_dir.empty()) write_profile_csv(profile, cfg.dump_dir);
  const RadialSolution sol = rescale_to_domain(profile, cfg.radius, norm);
  fill_common(r, norm.dim(), sol.Cp, sol.energy, sol.mass_p1, sol.mass_p, sol.umax);
  r.dingmass = rescaled_profile(sol).ding_mass;
  const GreenComparison g = green_compare(sol, cfg.green_s0 * cfg.radius, cfg.green_s1 * cfg.radius);
  r.log_greensup = g.log_sup_error;
  if (g.sup_error > 0.0) r.greensup = g.sup_error;
  return r;
}

// Planar records from a minimizer; the Green error is only defined on the
// Euclidean disk, where G has the closed form used by planar_green_error.
SweepRecord planar_record(const SweepConfig& cfg, const NormModel& norm, double kappa, const CpResult& res) {
  SweepRecord r;
  r.p = cfg.planar.p;
  const double p = r.p;
  const PlanarField u = least_energy_solution(res.u_bar, res.Cp, p);
  if (!cfg.dump_dir.empty()) {
    char name[32];
    std::snprintf(name, sizeof name, "u_p%03lld.txt", std::llround(p));
    write_field(*u.mesh, u.values, (std::filesystem::path(cfg.dump_dir) / name).string());
  }
  const Eigen::VectorXd m = lumped_mass(*u.mesh);
  const Eigen::VectorXd up = u.values.array().pow(p).matrix();
  const double mass_p = m.dot(up);
  const double mass_p1 = m.dot(up.cwiseProduct(u.values));
  fill_common(r, 2, res.Cp, assemble_energy(u, norm), mass_p1, mass_p, u.values.maxCoeff());
  const auto rows = blowup_diagnostics({{p, u}}, norm, 1.0, trudinger_moser_exponent(2, kappa));
  r.peakdist = rows[0].peak_dist;
  r.gammahat = rows[0].gamma_hat[2];
  if (cfg.domain == "disk" && std::holds_alternative<EuclideanNorm>(norm.kind())) {
    const double e = planar_green_error(PlanarField(u.mesh, rows[0].v), norm, kappa, 1.0, cfg.green_s0, cfg.green_s1);
    r.greensup = e;
    r.log_greensup = std::log(e);
  }
  if (!res.converged) {
    std::ostringstream os;
    os << (res.stalled ? "stalled at working precision after " : "not converged after ") << res.iterations
       << " iterations (grad_norm " << format_double(res.grad_norm) << ")";
    r.status = os.str();
  }
  return r;
}

SweepRecord failed(double p, const std::exception& e) {
  SweepRecord r;
  r.p = p;
  r.status = e.what();
  return r;
}

double basis(FitModel model, double p) {
  switch (model) {
    case FitModel::logp: return 1.0 / std::log(p);
    case FitModel::p: return 1.0 / p;
    case FitModel::plogp: return std::log(p) / p;
  }
  return 0.0;
}

}  // namespace

SolverKind parse_solver(const std::string& name) {
  if (name == "radial") return SolverKind::radial;
  if (name == "planar") return SolverKind::planar;
  throw ConfigError("unknown solver '" + name + "' (expected radial or planar)");
}

std::string to_string(SolverKind solver) { return solver == SolverKind::radial ? "radial" : "planar"; }

const std::array<const char*, 15>& sweep_columns() { return kColumns; }

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
  validate_p_list(cfg.p_list);
  if (!cfg.dump_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.dump_dir, ec);
    if (ec) throw ConfigError("cannot create directory '" + cfg.dump_dir + "': " + ec.message());
  }
  const NormModel norm = parse_norm(cfg.norm, cfg.dim);
  std::vector<SweepRecord> out(cfg.p_list.size());

  if (cfg.solver == SolverKind::radial) {
    if (!(cfg.radius > 0.0)) throw ConfigError("radius must be positive");
    parallel_chunks(out.size(), out.size(), [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        try {
          out[i] = radial_record(cfg, norm, cfg.p_list[i]);
        } catch (const std::exception& ex) {
          out[i] = failed(cfg.p_list[i], ex);
        }
      }
    });
    return out;
  }

  if (norm.dim() != 2) throw AssumptionViolation("planar solver requires N = 2");
  if (!check_assumptions(norm).passes)
    throw AssumptionViolation("norm '" + norm.spec() + "' violates the positive-definiteness assumption; planar solve refused");
  const auto mesh = std::make_shared<const Mesh>(mesh_from_spec(cfg.domain, cfg.mesh_h));
  const double kappa = wulff_volume(norm).value;
  const auto solve = [&](std::size_t i, const PlanarField* warm) -> std::optional<CpResult> {
    SweepConfig local = cfg;
    local.planar.p = cfg.p_list[i];
    try {
      CpResult res = minimize_cp(mesh, norm, local.planar, warm);
      out[i] = planar_record(local, norm, kappa, res);
      return res;
    } catch (const std::exception& ex) {
      out[i] = failed(cfg.p_list[i], ex);
      return std::nullopt;
    }
  };
  if (cfg.planar.continuation) {
    std::optional<CpResult> prev;
    for (std::size_t i = 0; i < out.size(); ++i) {
      auto res = solve(i, prev ? &prev->u_bar : nullptr);
      if (res) prev = std::move(res);
    }
  } else {
    parallel_chunks(out.size(), out.size(), [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) solve(i, nullptr);
    });
  }
  return out;
}

FitModel parse_model(const std::string& name) {
  if (name == "logp") return FitModel::logp;
  if (name == "p") return FitModel::p;
  if (name == "plogp") return FitModel::plogp;
  throw ConfigError("unknown model '" + name + "' (expected logp, p or plogp)");
}

std::string to_string(FitModel model) {
  switch (model) {
    case FitModel::logp: return "logp";
    case FitModel::p: return "p";
    case FitModel::plogp: return "plogp";
  }
  return "";
}

std::string formula(FitModel model) {
  switch (model) {
    case FitModel::logp: return "a + b/log(p)";
    case FitModel::p: return "a + b/p";
    case FitModel::plogp: return "a + b*log(p)/p";
  }
  return "";
}

ExtrapolationResult extrapolate(std::vector<std::pair<double, double>> pts, FitModel model) {
  if (pts.size() < 4) throw ConfigError("extrapolation needs at least 4 points");
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].first > 1.0) || !std::isfinite(pts[i].second)) throw ConfigError("extrapolation needs finite values at p > 1");
    if (i > 0 && pts[i].first == pts[i - 1].first) throw ConfigError("extrapolation needs distinct p values");
  }
  const std::size_t n = std::max<std::size_t>(2, (pts.size() + 1) / 2);
  const std::size_t first = pts.size() - n;

  ExtrapolationResult r;
  r.model = model;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [p, v] = pts[first + i];
    r.p_used.push_back(p);
    X(i, 0) = 1.0;
    X(i, 1) = basis(model, p);
    y[i] = v;
  }
  const Eigen::Vector2d scale = X.colwise().norm().transpose();
  const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  r.condition = s[1] > 0.0 ? s[0] / s[1] : HUGE_VAL;
  r.ill_conditioned = !(r.condition < 1e8);
  const Eigen::Vector2d coef = svd.solve(y).cwiseQuotient(scale);
  r.a = coef[0];
  r.b = coef[1];
  r.residual = std::sqrt((X * coef - y).squaredNorm() / static_cast<double>(n));
  return r;
}

std::vector<ExtrapolationResult> extrapolate_all(const std::vector<std::pair<double, double>>& pts) {
  return {extrapolate(pts, FitModel::logp), extrapolate(pts, FitModel::p), extrapolate(pts, FitModel::plogp)};
}

std::size_t best_fit(const std::vector<ExtrapolationResult>& fits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < fits.size(); ++i)
    if (!fits[i].ill_conditioned && (fits[best].ill_conditioned || fits[i].residual < fits[best].residual)) best = i;
  return best;
}

std::vector<std::pair<double, double>> series(const std::vector<SweepRecord>& records, Field field) {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : records)
    if (r.ok() && (r.*field).has_value()) out.emplace_back(r.p, *(r.*field));
  return out;
}

std::string format_double(double v) {
  char buf[32];
  return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

std::string to_csv(const std::vector<SweepRecord>& records) {
  std::string s;
  for (std::size_t k = 0; k < kColumns.size(); ++k) s += (k ? "," : "") + std::string(kColumns[k]);
  s += '\n';
  for (const auto& r : records) {
    s += format_double(r.p);
    for (std::size_t k = 1; k < kFields.size(); ++k) {
      s += ',';
      if (const auto& v = r.*kFields[k]) s += format_double(*v);
    }
    s += '\n';
  }
  return s;
}

std::vector<SweepRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string header;
  for (std::size_t k = 0; k < kColumns.size(); ++k) header += (k ? "," : "") + std::string(kColumns[k]);
  if (!std::getline(in, line) || line != header) throw ConfigError("CSV header mismatch");
  std::vector<SweepRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    SweepRecord r;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < kFields.size(); ++k) {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      if (pos > line.size()) throw ConfigError("CSV line " + std::to_string(lineno) + ": too few fields");
      const std::string cell = line.substr(pos, end - pos);
      pos = end + 1;
      if (cell.empty()) {
        if (k == 0) throw ConfigError("CSV line " + std::to_string(lineno) + ": missing p");
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw ConfigError("CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      if (k == 0)
        r.p = v;
      else
        r.*kFields[k] = v;
    }
    if (pos <= line.size()) throw ConfigError("CSV line " + std::to_string(lineno) + ": too many fields");
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

nlohmann::ordered_json record_json(const SweepRecord& r) {
  nlohmann::ordered_json j;
  j["p"] = r.p;
  for (std::size_t k = 1; k < kFields.size(); ++k) {
    const auto& v = r.*kFields[k];
    j[kColumns[k]] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  }
  j["log_greensup"] = r.log_greensup ? nlohmann::ordered_json(*r.log_greensup) : nlohmann::ordered_json(nullptr);
  j["status"] = r.status;
  return j;
}

nlohmann::ordered_json metadata(const SweepConfig& c) {
  nlohmann::ordered_json m;
  m["solver"] = to_string(c.solver);
  m["norm"] = c.norm;
  m["dim"] = c.dim;
  if (c.solver == SolverKind::radial) {
    m["radius"] = c.radius;
    m["rtol"] = c.rtol;
  } else {
    m["domain"] = c.domain;
    m["mesh_h"] = c.mesh_h;
    m["grad_tol"] = c.planar.grad_tol;
    m["max_iters"] = c.planar.max_iters;
    m["continuation"] = c.planar.continuation;
    m["seed"] = c.planar.seed;
  }
  m["p_list"] = c.p_list;
  m["green_annulus"] = {c.green_s0, c.green_s1};
  return m;
}

nlohmann::ordered_json fit_json(const ExtrapolationResult& f) {
  nlohmann::ordered_json j;
  j["model"] = to_string(f.model);
  j["formula"] = formula(f.model);
  j["a"] = f.a;
  j["b"] = f.b;
  j["residual"] = f.residual;
  j["points_used"] = f.p_used;
  j["condition"] = f.condition;
  j["ill_conditioned"] = f.ill_conditioned;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

std::string to_json(const std::vector<SweepRecord>& records, const SweepConfig& config) {
  nlohmann::ordered_json j;
  j["metadata"] = metadata(config);
  j["records"] = nlohmann::ordered_json::array();
  for (const auto& r : records) j["records"].push_back(record_json(r));
  return j.dump(2) + "\n";
}

void emit(const std::vector<SweepRecord>& records, const SweepConfig& config, FitModel model, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  write_file(base / "sweep.csv", to_csv(records));
  write_file(base / "sweep.json", to_json(records, config));

  nlohmann::ordered_json ex;
  ex["selected_model"] = to_string(model);
  ex["note"] = "limits are proved without rates; the fit model is an empirical choice";
  ex["quantities"] = nlohmann::ordered_json::object();
  for (std::size_t k : {2, 4, 6, 7, 9}) {
    const auto pts = series(records, kFields[k]);
    nlohmann::ordered_json q;
    if (pts.size() < 4) {
      q["error"] = "fewer than 4 points";
    } else {
      const auto fits = extrapolate_all(pts);
      q["selected"] = fit_json(fits[static_cast<std::size_t>(model)]);
      q["best_residual_model"] = to_string(fits[best_fit(fits)].model);
      q["fits"] = nlohmann::ordered_json::array();
      for (const auto& f : fits) q["fits"].push_back(fit_json(f));
    }
    ex["quantities"][kColumns[k]] = q;
  }
  write_file(base / "extrapolation.json", ex.dump(2) + "\n");

  std::string plt =
      "# gnuplot script for sweep.csv\n"
      "set datafile separator ','\n"
      "set key autotitle columnhead\n"
      "set logscale x\n"
      "set xlabel 'p'\n"
      "set multiplot layout 2,2\n"
      "plot 'sweep.csv' using 1:5 with linespoints, '' using 1:7 with linespoints\n"
      "plot 'sweep.csv' using 1:8 with linespoints\n"
      "plot 'sweep.csv' using 1:10 with linespoints\n"
      "set logscale y\n"
      "plot 'sweep.csv' using 1:13 with linespoints\n"
      "unset multiplot\n";
  write_file(base / "sweep.plt", plt);
}

}  // namespace finsler
