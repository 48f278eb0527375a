#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace finsler {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Downhill simplex minimization. `f` may return +inf to reject a point.
template <typename F>
NelderMeadResult nelder_mead(F&& f, const Eigen::VectorXd& start, double initial_step, double ftol = 1e-13,
                             int max_evals = 4000) {
  const Eigen::Index n = start.size();
  std::vector<Eigen::VectorXd> simplex(n + 1, start);
  std::vector<double> fv(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) simplex[i + 1][i] += initial_step;
  int evals = 0;
  for (Eigen::Index i = 0; i <= n; ++i) fv[i] = f(simplex[i]), ++evals;

  std::vector<Eigen::Index> order(n + 1);
  bool converged = false;
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    const double fbest = fv[order.front()], fworst = fv[order.back()];
    if (std::isfinite(fworst) && std::abs(fworst - fbest) <= ftol * (std::abs(fbest) + ftol)) {
      converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[order[i]];
    centroid /= static_cast<double>(n);
    const auto worst = order.back();
    const Eigen::VectorXd xr = centroid + (centroid - simplex[worst]);
    const double fr = f(xr);
    ++evals;
    if (fr < fbest) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) simplex[worst] = xe, fv[worst] = fe;
      else simplex[worst] = xr, fv[worst] = fr;
    } else if (fr < fv[order[n - 1]]) {
      simplex[worst] = xr, fv[worst] = fr;
    } else {
      const bool outside = fr < fworst;
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                         : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = f(xc);
      ++evals;
      if (fc < (outside ? fr : fworst)) {
        simplex[worst] = xc, fv[worst] = fc;
      } else {
        const auto best = order.front();
        for (Eigen::Index i = 0; i <= n; ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          fv[i] = f(simplex[i]);
          ++evals;
        }
      }
    }
  }
  const auto best = std::min_element(fv.begin(), fv.end()) - fv.begin();
  return {simplex[best], fv[best], evals, converged};
}

}  // namespace finsler
