#pragma once

// Dormand-Prince 5(4) with dense output. Templated on scalar and state size so
// the radial solver can run in double or long double without changes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

namespace finsler {

template <class Scalar, int Dim>
struct OdeOptions {
  Scalar rtol = Scalar(1e-8);
  Scalar atol = Scalar(1e-10);
  Scalar h0 = Scalar(0);  ///< 0 selects the initial step automatically
  Scalar h_max = std::numeric_limits<Scalar>::infinity();
  Scalar t_max = Scalar(2000);
  long max_steps = 2'000'000;
};

enum class OdeStatus { stopped, reached_t_max, step_underflow, too_many_steps };

/// One accepted step with its continuous extension.
template <class Scalar, int Dim>
struct DenseSegment {
  using State = Eigen::Matrix<Scalar, Dim, 1>;
  Scalar t0 = 0, h = 0;
  Eigen::Matrix<Scalar, Dim, 5> rc;

  Scalar t1() const { return t0 + h; }
  State operator()(Scalar t) const {
    const Scalar th = (t - t0) / h, th1 = 1 - th;
    return rc.col(0) + th * (rc.col(1) + th1 * (rc.col(2) + th * (rc.col(3) + th1 * rc.col(4))));
  }
  State start() const { return rc.col(0); }
  State end() const { return rc.col(0) + rc.col(1); }
};

template <class Scalar, int Dim>
struct Trajectory {
  using State = Eigen::Matrix<Scalar, Dim, 1>;
  std::vector<DenseSegment<Scalar, Dim>> segments;
  OdeStatus status = OdeStatus::stopped;
  long rejected = 0;

  Scalar t_begin() const { return segments.front().t0; }
  Scalar t_end() const { return segments.back().t1(); }

  /// Dense evaluation; t is clamped to the integrated range.
  State operator()(Scalar t) const {
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](Scalar v, const DenseSegment<Scalar, Dim>& s) { return v < s.t1(); });
    if (it == segments.end()) --it;
    return (*it)(std::clamp(t, it->t0, it->t1()));
  }
};

namespace detail {

template <class Scalar>
struct DP5 {
  static constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5, c5 = Scalar(8) / 9;
  static constexpr Scalar a21 = Scalar(1) / 5;
  static constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  static constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
  static constexpr Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187, a53 = Scalar(64448) / 6561,
                          a54 = Scalar(-212) / 729;
  static constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33, a63 = Scalar(46732) / 5247,
                          a64 = Scalar(49) / 176, a65 = Scalar(-5103) / 18656;
  static constexpr Scalar a71 = Scalar(35) / 384, a73 = Scalar(500) / 1113, a74 = Scalar(125) / 192,
                          a75 = Scalar(-2187) / 6784, a76 = Scalar(11) / 84;
  static constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695, e4 = Scalar(71) / 1920,
                          e5 = Scalar(-17253) / 339200, e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;
  static constexpr Scalar d1 = Scalar(-12715105075.0L) / Scalar(11282082432.0L),
                          d3 = Scalar(87487479700.0L) / Scalar(32700410799.0L),
                          d4 = Scalar(-10690763975.0L) / Scalar(1880347072.0L),
                          d5 = Scalar(701980252875.0L) / Scalar(199316789632.0L),
                          d6 = Scalar(-1453857185.0L) / Scalar(822651844.0L),
                          d7 = Scalar(69997945.0L) / Scalar(29380423.0L);
};

}  // namespace detail

/// One Dormand-Prince step. Returns the fifth-order solution; `err` receives
/// the embedded error estimate and `seg` the dense-output coefficients.
template <class Scalar, int Dim, class Rhs>
Eigen::Matrix<Scalar, Dim, 1> dopri5_step(const Rhs& f, Scalar t, const Eigen::Matrix<Scalar, Dim, 1>& y,
                                          const Eigen::Matrix<Scalar, Dim, 1>& k1, Scalar h,
                                          std::type_identity_t<Eigen::Matrix<Scalar, Dim, 1>>* err = nullptr,
                                          std::type_identity_t<DenseSegment<Scalar, Dim>>* seg = nullptr,
                                          std::type_identity_t<Eigen::Matrix<Scalar, Dim, 1>>* k7_out = nullptr) {
  using T = detail::DP5<Scalar>;
  using State = Eigen::Matrix<Scalar, Dim, 1>;
  const State k2 = f(t + T::c2 * h, (y + h * T::a21 * k1).eval());
  const State k3 = f(t + T::c3 * h, (y + h * (T::a31 * k1 + T::a32 * k2)).eval());
  const State k4 = f(t + T::c4 * h, (y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3)).eval());
  const State k5 = f(t + T::c5 * h, (y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4)).eval());
  const State k6 =
      f(t + h, (y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5)).eval());
  const State y1 = y + h * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
  const State k7 = f(t + h, y1);
  if (err) *err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
  if (seg) {
    seg->t0 = t;
    seg->h = h;
    seg->rc.col(0) = y;
    seg->rc.col(1) = y1 - y;
    seg->rc.col(2) = h * k1 - seg->rc.col(1);
    seg->rc.col(3) = seg->rc.col(1) - h * k7 - seg->rc.col(2);
    seg->rc.col(4) = h * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 + T::d7 * k7);
  }
  if (k7_out) *k7_out = k7;
  return y1;
}

/// Adaptive integration from (t0, y0) until `stop(t, y)` returns true after an
/// accepted step, t exceeds t_max, or step control fails.
template <class Scalar, int Dim, class Rhs, class Stop>
Trajectory<Scalar, Dim> dopri5(const Rhs& f, Scalar t0, const Eigen::Matrix<Scalar, Dim, 1>& y0,
                               const OdeOptions<Scalar, Dim>& opt, const Stop& stop) {
  using State = Eigen::Matrix<Scalar, Dim, 1>;
  using std::abs, std::max, std::min, std::pow, std::sqrt;
  Trajectory<Scalar, Dim> traj;

  const auto scale = [&](const State& a, const State& b) {
    return (opt.atol + opt.rtol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix();
  };

  Scalar t = t0;
  State y = y0;
  State k1 = f(t, y);
  Scalar h = opt.h0;
  if (h <= 0) {
    // Hairer's starting step heuristic.
    const State sc = scale(y, y);
    const Scalar d0 = sqrt((y.array() / sc.array()).square().mean());
    const Scalar d1 = sqrt((k1.array() / sc.array()).square().mean());
    Scalar h0 = (d0 < Scalar(1e-5) || d1 < Scalar(1e-5)) ? Scalar(1e-6) : Scalar(0.01) * d0 / d1;
    const State k2 = f(t + h0, (y + h0 * k1).eval());
    const Scalar d2 = sqrt(((k2 - k1).array() / sc.array()).square().mean()) / h0;
    const Scalar h1 = max(d1, d2) <= Scalar(1e-15) ? max(Scalar(1e-6), h0 * Scalar(1e-3))
                                                  : pow(Scalar(0.01) / max(d1, d2), Scalar(0.2));
    h = min(Scalar(100) * h0, h1);
  }
  h = min(h, opt.h_max);

  Scalar err_prev = Scalar(1e-4);
  for (long steps = 0;; ++steps) {
    if (steps >= opt.max_steps) {
      traj.status = OdeStatus::too_many_steps;
      return traj;
    }
    if (t >= opt.t_max) {
      traj.status = OdeStatus::reached_t_max;
      return traj;
    }
    if (h < 16 * std::numeric_limits<Scalar>::epsilon() * max(Scalar(1), abs(t))) {
      traj.status = OdeStatus::step_underflow;
      return traj;
    }
    State err, k7;
    DenseSegment<Scalar, Dim> seg;
    const State y1 = dopri5_step(f, t, y, k1, h, &err, &seg, &k7);
    Scalar en = sqrt((err.array() / scale(y, y1).array()).square().mean());
    if (!std::isfinite(static_cast<double>(en)) || !y1.allFinite()) en = Scalar(1e10);
    if (en <= 1) {
      // PI controller (Gustafsson) on accepted steps.
      Scalar fac = Scalar(0.9) * pow(en, Scalar(-0.7) / 5) * pow(err_prev, Scalar(0.4) / 5);
      fac = std::clamp(fac, Scalar(0.2), Scalar(10));
      err_prev = max(en, Scalar(1e-4));
      traj.segments.push_back(seg);
      t += h;
      y = y1;
      k1 = k7;
      h = min(h * fac, opt.h_max);
      if (stop(t, y)) {
        traj.status = OdeStatus::stopped;
        return traj;
      }
    } else {
      ++traj.rejected;
      h *= std::clamp(Scalar(0.9) * pow(en, Scalar(-0.2)), Scalar(0.1), Scalar(0.9));
    }
  }
}

}  // namespace finsler
