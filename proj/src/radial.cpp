#include "finsler/radial.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "finsler/constants.hpp"
#include "finsler/errors.hpp"
#include "finsler/quadrature.hpp"

namespace finsler {

namespace {

using State = Eigen::Vector4d;

struct ProfileRhs {
  int N;
  double p;

  State operator()(double t, const State& y) const {
    const double phi = 1.0 - y[0];
    const double S = std::max(y[1], 0.0);
    // e^{Nt} phi |phi|^{p-1}, formed in log space to avoid overflow of e^{Nt}.
    const double ap = std::abs(phi);
    const double fp = ap == 0.0 ? 0.0 : std::copysign(std::exp(N * t + p * std::log(ap)), phi);
    const double s1 = std::pow(S, 1.0 / (N - 1));
    State d;
    d << s1, fp, s1 * S, fp * ap;
    return d;
  }
};

// Leading-order series at the origin: |phi'|^{N-1} = r/N.
State series_state(int N, double r) {
  const double k = 1.0 / (N - 1);
  const double w = (N - 1.0) / N * std::pow(N, -k) * std::pow(r, N * k);
  const double S = std::pow(r, N) / N;
  const double IE = (N - 1.0) / (N * N) * std::pow(N, -N * k) * std::pow(r, N * N * k);
  const double Ip1 = std::pow(r, N) / N;
  return State(w, S, IE, Ip1);
}

const char* status_text(OdeStatus s) {
  switch (s) {
    case OdeStatus::reached_t_max: return "phi has no zero before the integration limit";
    case OdeStatus::step_underflow: return "step size underflow";
    case OdeStatus::too_many_steps: return "step budget exhausted";
    default: return "stopped";
  }
}

// log(int_a^b exp(l(x)) dx) for l linear between the endpoint values la, lb.
double log_exp_segment(double h, double la, double lb) {
  if (la == -HUGE_VAL && lb == -HUGE_VAL) return -HUGE_VAL;
  const double hi = std::max(la, lb), d = std::abs(la - lb);
  if (d < 1e-8) return std::log(h) + 0.5 * (la + lb);
  return std::log(h) + hi + std::log(-std::expm1(-d)) - std::log(d);
}

}  // namespace

double RadialProfile::w_at(double t) const {
  if (t <= t0) return series_state(N, std::exp(t))[0];
  if (t >= t1) return 1.0;
  return trajectory(t)[0];
}

RadialProfile shoot(int N, double p, double rtol) {
  ShootOptions o;
  o.rtol = rtol;
  return shoot(N, p, o);
}

RadialProfile shoot(int N, double p, const ShootOptions& opt) {
  if (N < 2) throw ConfigError("shoot: N must be at least 2");
  if (!(p >= 1.0)) throw ConfigError("shoot: p must be at least 1");
  if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) throw ConfigError("shoot: tolerances must be positive");
  if (!(opt.r0 > 0.0 && opt.r0 < 1e-2)) throw ConfigError("shoot: r0 must lie in (0, 1e-2)");

  const ProfileRhs f{N, p};
  OdeOptions<double, 4> o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  o.t_max = opt.t_max;
  const double t0 = std::log(opt.r0);
  auto traj = dopri5(f, t0, series_state(N, opt.r0), o, [](double, const State& y) { return y[0] >= 1.0; });
  if (traj.status != OdeStatus::stopped)
    throw ConvergenceError(std::string("shoot(N=") + std::to_string(N) + ", p=" + std::to_string(p) +
                           "): " + status_text(traj.status));

  // Bracket the zero inside the last step with the dense output, then polish
  // with Newton on full Runge-Kutta steps from the last accepted point.
  const auto last = traj.segments.back();
  double lo = last.t0, hi = last.t1();
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (last(mid)[0] < 1.0 ? lo : hi) = mid;
  }
  const State ya = last.start();
  const State ka = f(last.t0, ya);
  double h = 0.5 * (lo + hi) - last.t0;
  DenseSegment<double, 4> seg;
  State y1 = dopri5_step(f, last.t0, ya, ka, h, nullptr, &seg);
  for (int it = 0; it < 8; ++it) {
    const double slope = f(last.t0 + h, y1)[0];
    if (!(slope > 0.0)) break;
    const double dh = (1.0 - y1[0]) / slope;
    h += dh;
    y1 = dopri5_step(f, last.t0, ya, ka, h, nullptr, &seg);
    if (std::abs(dh) <= 1e-15 * std::max(1.0, std::abs(last.t0 + h))) break;
  }
  traj.segments.back() = seg;

  RadialProfile out;
  out.p = p;
  out.N = N;
  out.rtol = opt.rtol;
  out.t0 = t0;
  out.t1 = last.t0 + h;
  out.R1 = std::exp(out.t1);
  out.S1 = y1[1];
  out.I_energy = y1[2];
  out.I_p1 = y1[3];

  const auto push = [&](double t, const State& y) {
    const double r = std::exp(t);
    out.r.push_back(r);
    out.phi.push_back(1.0 - y[0]);
    out.dphi.push_back(-std::pow(std::max(y[1], 0.0), 1.0 / (N - 1)) / r);
  };
  push(t0, traj.segments.front().start());
  for (const auto& s : traj.segments) push(s.t1(), s.end());
  out.phi.back() = 0.0;

  // Residual: compare each step's increment with Gauss quadrature of the
  // right-hand side along the dense output.
  const auto [gx, gw] = gauss_legendre<double>(8);
  double res = 0.0;
  for (const auto& s : traj.segments) {
    State q = State::Zero();
    for (int i = 0; i < 8; ++i) q += gw[i] * f(s.t0 + 0.5 * s.h * (1.0 + gx[i]), s(s.t0 + 0.5 * s.h * (1.0 + gx[i])));
    q *= 0.5 * s.h;
    const State inc = s.end() - s.start();
    const State w = (opt.atol + opt.rtol * s.start().cwiseAbs().cwiseMax(s.end().cwiseAbs()).array()).matrix();
    res = std::max(res, ((inc - q).array() / w.array()).abs().maxCoeff() * opt.rtol);
  }
  out.residual = res;
  out.trajectory = std::move(traj);
  return out;
}

double RadialSolution::u(double s) const {
  if (s <= 0.0) return c;
  return c * (1.0 - profile.w_at(log_a + std::log(s)));
}

RadialSolution rescale_to_domain(const RadialProfile& prof, double R, const NormModel& norm) {
  if (!(R > 0.0)) throw ConfigError("rescale_to_domain: R must be positive");
  if (norm.dim() != prof.N) throw ConfigError("rescale_to_domain: norm dimension does not match the profile");
  const int N = prof.N;
  const double p = prof.p;
  const double log_a = prof.t1 - std::log(R);
  // p = N - 1 is the eigenvalue problem: only R = R1 is admissible and the
  // amplitude is left at 1.
  if (p + 1.0 - N == 0.0 && std::abs(log_a) > 1e-12)
    throw ConfigError("rescale_to_domain: for p = N - 1 the radius must equal R1");
  if (p + 1.0 - N < 0.0) throw ConfigError("rescale_to_domain: need p >= N - 1");

  RadialSolution s;
  s.profile = prof;
  s.norm = norm.spec();
  s.N = N;
  s.p = p;
  s.R = R;
  s.kappa = wulff_volume(norm).value;
  s.log_a = log_a;
  s.c = p + 1.0 - N == 0.0 ? 1.0 : std::exp(N * log_a / (p + 1.0 - N));
  const double NcN = N * s.kappa * std::pow(s.c, N);
  s.energy = NcN * prof.I_energy;
  s.mass_p1 = NcN * prof.I_p1;
  s.mass_p = N * s.kappa * std::pow(s.c, N - 1) * prof.S1;
  s.Cp = s.energy / std::pow(s.mass_p1, N / (p + 1.0));
  s.umax = s.c;
  s.lambda_p = std::pow(s.mass_p, 1.0 / (N - 1));
  s.log_eps_p = -(N - 1.0) / N * std::log(p) - s.log_a;
  s.eps_p = std::exp(s.log_eps_p);
  return s;
}

double green_function(const RadialSolution& sol, double s) {
  return std::pow(sol.N * sol.kappa, -1.0 / (sol.N - 1)) * std::log(sol.R / s);
}

GreenComparison green_compare(const RadialSolution& sol, double s0, double s1) {
  if (!(0.0 < s0 && s0 < s1 && s1 < sol.R)) throw ConfigError("green_compare: need 0 < s0 < s1 < R");
  const auto& prof = sol.profile;
  const int N = sol.N;
  const double p = sol.p;
  const double ta = std::max(sol.log_a + std::log(s0), prof.t0);
  const double tb = prof.t1;

  constexpr int M = 4000;
  std::vector<double> tau(M + 1), lf(M + 1);
  for (int j = 0; j <= M; ++j) {
    tau[j] = ta + (tb - ta) * j / M;
    const double phi = 1.0 - prof.w_at(tau[j]);
    lf[j] = phi > 0.0 ? N * tau[j] + p * std::log(phi) : -HUGE_VAL;
  }
  lf[M] = -HUGE_VAL;

  // log T(tau_j) by backward accumulation, then log of the bracket g.
  const double logS1 = std::log(prof.S1);
  std::vector<double> lg(M + 1, -HUGE_VAL);
  double logT = -HUGE_VAL;
  for (int j = M - 1; j >= 0; --j) {
    logT = log_add(logT, log_exp_segment(tau[j + 1] - tau[j], lf[j], lf[j + 1]));
    const double lx = logT - logS1;
    if (lx < -30.0) {
      lg[j] = lx - std::log(N - 1.0);
    } else {
      const double x = std::min(std::exp(lx), 1.0);
      lg[j] = std::log(-std::expm1(std::log1p(-x) / (N - 1)));
    }
  }
  double logI = -HUGE_VAL;
  for (int j = 0; j < M; ++j) logI = log_add(logI, log_exp_segment(tau[j + 1] - tau[j], lg[j], lg[j + 1]));

  GreenComparison out;
  out.log_sup_error = -std::log(N * sol.kappa) / (N - 1) + logI;
  out.sup_error = std::exp(out.log_sup_error);
  out.argmax = s0;
  return out;
}

double green_compare_direct(const RadialSolution& sol, double s0, double s1, int samples) {
  const double scale = std::pow(sol.N * sol.kappa, -1.0 / (sol.N - 1));
  const double denom = std::pow(sol.profile.S1, 1.0 / (sol.N - 1));
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double s = s0 + (s1 - s0) * i / (samples - 1);
    const double v = scale * (1.0 - sol.profile.w_at(sol.log_a + std::log(s))) / denom;
    best = std::max(best, std::abs(v - green_function(sol, s)));
  }
  return best;
}

double rescaled_z(const RadialSolution& sol, double rho) {
  if (rho <= 0.0) return 0.0;
  const double t = -(sol.N - 1.0) / sol.N * std::log(sol.p) + std::log(rho);
  return -sol.p * sol.profile.w_at(t);
}

RescaledProfile rescaled_profile(const RadialSolution& sol) {
  const int N = sol.N;
  RescaledProfile out;
  out.ding_mass = N * sol.kappa * std::pow(sol.p, N - 1) * sol.profile.I_p1;
  out.p_lambda = sol.p * sol.lambda_p;
  out.L0_estimate = out.p_lambda / (N / (N - 1.0) * std::exp((N - 1.0) / N));
  out.rho_max = sol.R / sol.eps_p;
  return out;
}

double pohozaev_residual(const RadialSolution& sol, const NormModel& norm) {
  if (norm.dim() != sol.N) throw ConfigError("pohozaev_residual: norm dimension does not match the solution");
  const int N = sol.N;
  const double cN = std::pow(sol.c, N);
  const double lhs = N / (sol.p + 1.0) * N * sol.kappa * cN * sol.profile.I_p1;
  const double rhs = (N - 1.0) * sol.kappa * cN * std::pow(sol.profile.S1, N / (N - 1.0));
  return std::abs(lhs - rhs) / std::abs(lhs);
}

std::string write_profile_csv(const RadialProfile& prof, const std::string& dir) {
  char name[64];
  if (prof.p == std::floor(prof.p) && prof.p < 1e9) {
    std::snprintf(name, sizeof name, "phi_p%03lld.csv", static_cast<long long>(prof.p));
  } else {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, prof.p);
    std::snprintf(name, sizeof name, "phi_p%.*s.csv", static_cast<int>(r.ptr - buf), buf);
  }
  const auto path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const auto fmt = [](double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
  };
  out << "r,phi,dphi\n";
  for (std::size_t i = 0; i < prof.r.size(); ++i)
    out << fmt(prof.r[i]) << ',' << fmt(prof.phi[i]) << ',' << fmt(prof.dphi[i]) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
  return path;
}

}  // namespace finsler
