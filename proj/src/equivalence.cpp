#include "optdes/equivalence.hpp"

#include "optdes/errors.hpp"
#include "optdes/parallel.hpp"
#include "optdes/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace optdes {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

double radical_inverse(std::size_t i, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (i > 0) {
    result += f * static_cast<double>(i % base);
    i /= base;
    f /= base;
  }
  return result;
}

std::vector<double> axis_values(const Interval& iv, double step) {
  if (iv.width() == 0.0) return {iv.lower};
  const auto n = static_cast<std::size_t>(std::llround(iv.width() / step)) + 1;
  std::vector<double> values(std::max<std::size_t>(n, 2));
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = iv.lower + iv.width() * static_cast<double>(i) / static_cast<double>(values.size() - 1);
  return values;
}

std::vector<Point> lds_points(const std::vector<Interval>& box, const GridSpec& grid) {
  const std::size_t d = box.size();
  if (d > std::size(kPrimes)) throw UnsupportedError("low-discrepancy grid supports at most 20 dimensions");
  Rng rng = Rng::substream(grid.seed, "grid.halton");
  std::vector<double> shift(d);
  for (auto& s : shift) s = rng.uniform();

  std::vector<Point> pts;
  // 3^d lattice of lower/mid/upper when small enough.
  std::size_t lattice = 1;
  for (std::size_t j = 0; j < d && lattice <= grid.lds_points; ++j) lattice *= 3;
  if (lattice <= grid.lds_points) {
    for (std::size_t idx = 0; idx < lattice; ++idx) {
      Point x(d);
      std::size_t r = idx;
      for (std::size_t j = 0; j < d; ++j) {
        x[j] = box[j].lower + 0.5 * static_cast<double>(r % 3) * box[j].width();
        r /= 3;
      }
      pts.push_back(std::move(x));
    }
  }
  for (std::size_t i = 1; i <= grid.lds_points; ++i) {
    Point x(d);
    for (std::size_t j = 0; j < d; ++j) {
      double v = radical_inverse(i, kPrimes[j]) + shift[j];
      v -= std::floor(v);
      x[j] = box[j].lower + v * box[j].width();
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

// Coordinate descent with a shrinking step, staying inside the box.
std::pair<Point, double> refine(Point x, double fx, const std::vector<Interval>& box,
                                const std::function<double(const Point&)>& psi,
                                const std::function<bool(const Point&)>& skip) {
  double h = 0.1;
  while (h >= 1e-5) {
    bool improved = false;
    for (std::size_t j = 0; j < box.size(); ++j) {
      if (box[j].width() == 0.0) continue;
      for (double sign : {-1.0, 1.0}) {
        Point y = x;
        y[j] = std::clamp(x[j] + sign * h * box[j].width(), box[j].lower, box[j].upper);
        if (y[j] == x[j] || (skip && skip(y))) continue;
        const double fy = psi(y);
        if (fy < fx) {
          x = std::move(y);
          fx = fy;
          improved = true;
          break;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return {x, fx};
}

}  // namespace

std::vector<Point> tensor_grid(const std::vector<Interval>& box, double step) {
  if (!(step > 0.0)) throw ValidationError("grid step must be positive");
  std::vector<std::vector<double>> axes;
  std::size_t total = 1;
  for (const auto& iv : box) {
    axes.push_back(axis_values(iv, step));
    total *= axes.back().size();
  }
  std::vector<Point> pts;
  pts.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Point x(box.size());
    std::size_t r = idx;
    for (std::size_t j = 0; j < box.size(); ++j) {
      x[j] = axes[j][r % axes[j].size()];
      r /= axes[j].size();
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

EquivalenceReport scan_minimum(const std::vector<Interval>& box, const GridSpec& grid, std::size_t p,
                               const std::function<double(const Point&)>& psi,
                               const std::function<bool(const Point&)>& skip) {
  for (const auto& iv : box)
    if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper))
      throw ValidationError("search box must be finite");
  const bool tensor = box.size() <= grid.tensor_max_dim;
  std::vector<Point> pts = tensor ? tensor_grid(box, grid.step) : lds_points(box, grid);
  if (skip) {
    std::vector<Point> kept;
    kept.reserve(pts.size());
    for (auto& x : pts)
      if (!skip(x)) kept.push_back(std::move(x));
    pts = std::move(kept);
  }
  if (pts.empty()) throw ValidationError("search grid is empty");

  std::vector<double> values(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { values[i] = psi(pts[i]); });

  EquivalenceReport report;
  report.tolerance = grid.tolerance > 0.0 ? grid.tolerance : default_equivalence_tolerance(p);
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  report.min_psi = values[best];
  report.argmin = pts[best];

  if (!tensor && grid.refine_starts > 0) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t starts = std::min(grid.refine_starts, pts.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return values[a] < values[b] || (values[a] == values[b] && a < b);
                      });
    std::vector<std::pair<Point, double>> refined(starts);
    parallel_for(starts, [&](std::size_t s) {
      refined[s] = refine(pts[order[s]], values[order[s]], box, psi, skip);
    });
    for (const auto& [x, fx] : refined)
      if (fx < report.min_psi) {
        report.min_psi = fx;
        report.argmin = x;
      }
  }

  report.is_optimal = report.min_psi >= -report.tolerance;
  if (grid.keep_grid) {
    report.grid = std::move(pts);
    report.psi = std::move(values);
  }
  return report;
}

std::vector<Interval> search_box(const ModelSpec& model, const ParameterSample& sample, const GridSpec& grid,
                                 const ContinuousDesign* design) {
  std::vector<Interval> box = model.region.bounds();
  const auto axis = model.region.unbounded_axis();
  if (!axis) return box;
  if (grid.unbounded_window) {
    box[*axis] = *grid.unbounded_window;
    return box;
  }
  if (!model.basis.is_first_order())
    throw UnsupportedError("an unbounded axis needs an explicit window unless the basis is first order");

  // Informative eta range: u >= 1e-6 max u on a fine eta scan.
  double eta_lo = std::numeric_limits<double>::infinity();
  double eta_hi = -eta_lo;
  {
    std::vector<double> etas;
    std::vector<double> us;
    for (double eta = -60.0; eta <= 60.0; eta += 0.01) {
      if (!model.link.admissible(eta)) continue;
      etas.push_back(eta);
      us.push_back(glm_weight_eta(model.family, model.link, eta));
    }
    if (etas.empty()) throw DomainError("no admissible linear predictor values for " + model.link.name());
    const double umax = *std::max_element(us.begin(), us.end());
    for (std::size_t i = 0; i < etas.size(); ++i)
      if (us[i] >= 1e-6 * umax) {
        eta_lo = std::min(eta_lo, etas[i]);
        eta_hi = std::max(eta_hi, etas[i]);
      }
  }

  const std::size_t a = *axis;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& theta : sample.draws) {
    const double slope = theta[static_cast<Eigen::Index>(a + 1)];
    if (slope == 0.0)
      throw ValidationError("the parameter of the unbounded axis is zero; supply an explicit window");
    double rest_lo = theta[0];
    double rest_hi = theta[0];
    for (std::size_t j = 0; j < box.size(); ++j) {
      if (j == a) continue;
      const double t = theta[static_cast<Eigen::Index>(j + 1)];
      rest_lo += std::min(t * box[j].lower, t * box[j].upper);
      rest_hi += std::max(t * box[j].lower, t * box[j].upper);
    }
    const double x1 = (eta_lo - rest_hi) / slope;
    const double x2 = (eta_hi - rest_lo) / slope;
    lo = std::min({lo, x1, x2});
    hi = std::max({hi, x1, x2});
  }
  if (design)
    for (const auto& x : design->points) {
      lo = std::min(lo, x[static_cast<Eigen::Index>(a)]);
      hi = std::max(hi, x[static_cast<Eigen::Index>(a)]);
    }
  const double mid = 0.5 * (lo + hi);
  const double half = 0.6 * (hi - lo);
  box[a] = {mid - half, mid + half};
  return box;
}

EquivalenceReport equivalence_check(const ContinuousDesign& design, const ModelSpec& model,
                                    const ParameterSample& sample, const GridSpec& grid) {
  const BayesSensitivity psi(design, model, sample);
  const auto box = search_box(model, sample, grid, &design);
  return scan_minimum(box, grid, model.p(), [&](const Point& x) { return psi(x); });
}

EquivalenceReport equivalence_check(const ContinuousDesign& design, const ModelSpec& model,
                                    const Prior& prior, const SampleSpec& spec, const GridSpec& grid) {
  return equivalence_check(design, model, sample_prior(prior, spec), grid);
}

}  // namespace optdes
