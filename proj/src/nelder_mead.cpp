#include "optdes/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace optdes {

namespace {

double safe(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

MinimizeResult nm_run(const std::function<double(const Vector&)>& f, const Vector& x0, double step,
                      std::size_t budget, double ftol) {
  const auto n = x0.size();
  std::vector<Vector> simplex(static_cast<std::size_t>(n) + 1, x0);
  std::vector<double> fv(simplex.size());
  std::size_t evals = 0;
  auto eval = [&](const Vector& x) {
    ++evals;
    return safe(f(x));
  };
  for (Eigen::Index i = 0; i < n; ++i) simplex[static_cast<std::size_t>(i) + 1][i] += step;
  for (std::size_t i = 0; i < simplex.size(); ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(simplex.size());
  while (evals < budget) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    if (std::isfinite(fv[worst]) && fv[worst] - fv[best] <= ftol * (1.0 + std::abs(fv[best]))) break;

    Vector centroid = Vector::Zero(n);
    for (std::size_t i = 0; i < simplex.size(); ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const Vector xr = centroid + (centroid - simplex[worst]);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      const Vector xe = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                              : Vector(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      fv[i] = eval(simplex[i]);
    }
  }
  const auto it = std::min_element(fv.begin(), fv.end());
  return {simplex[static_cast<std::size_t>(it - fv.begin())], *it, evals};
}

Vector gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  Vector y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double hi = h * std::max(1.0, std::abs(x[i]));
    y[i] = x[i] + hi;
    const double fp = f(y);
    y[i] = x[i] - hi;
    const double fm = f(y);
    y[i] = x[i];
    g[i] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

}  // namespace

MinimizeResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                           const NelderMeadOptions& options) {
  MinimizeResult best{x0, safe(f(x0)), 1};
  double step = options.initial_step;
  for (std::size_t r = 0; r <= options.restarts; ++r) {
    MinimizeResult run = nm_run(f, best.x, step, options.max_evals, options.ftol);
    best.evals += run.evals;
    if (run.value <= best.value) {
      best.x = std::move(run.x);
      best.value = run.value;
    }
    step *= options.shrink;
  }
  return best;
}

MinimizeResult bfgs(const std::function<double(const Vector&)>& f, const Vector& x0, std::size_t max_iters,
                    double fd_step, double gtol) {
  const auto n = x0.size();
  MinimizeResult res{x0, safe(f(x0)), 1};
  if (!std::isfinite(res.value)) return res;
  Matrix h_inv = Matrix::Identity(n, n);
  Vector g = gradient(f, res.x, fd_step);
  res.evals += 2 * static_cast<std::size_t>(n);
  for (std::size_t it = 0; it < max_iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < gtol) break;
    Vector dir = -h_inv * g;
    if (dir.dot(g) >= 0.0) {
      h_inv.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    Vector x_new;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = res.x + step * dir;
      f_new = safe(f(x_new));
      ++res.evals;
      if (f_new <= res.value + 1e-4 * step * g.dot(dir)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Vector g_new = gradient(f, x_new, fd_step);
    res.evals += 2 * static_cast<std::size_t>(n);
    const Vector s = x_new - res.x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    const double improvement = res.value - f_new;
    res.x = x_new;
    res.value = f_new;
    g = g_new;
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Matrix i_n = Matrix::Identity(n, n);
      h_inv = (i_n - rho * s * y.transpose()) * h_inv * (i_n - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    if (improvement < 1e-15 * (1.0 + std::abs(f_new))) break;
  }
  return res;
}

}  // namespace optdes
