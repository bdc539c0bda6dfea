#include "optdes/optimize.hpp"

#include "optdes/errors.hpp"
#include "optdes/nelder_mead.hpp"
#include "optdes/parallel.hpp"
#include "optdes/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <string>

namespace optdes {

namespace {

struct Candidate {
  std::vector<Point> points;
  std::vector<double> weights;
  double objective = std::numeric_limits<double>::infinity();
};

// Decision vector: one angle per coordinate, then t - 1 weight angles.
class Encoding {
 public:
  Encoding(const std::vector<Interval>& box, std::size_t t) : box_(box), t_(t) {}

  std::size_t size() const { return t_ * box_.size() + t_ - 1; }

  Vector encode(const std::vector<Point>& points, const std::vector<double>& weights) const {
    Vector z(static_cast<Eigen::Index>(size()));
    Eigen::Index r = 0;
    for (const auto& x : points)
      for (std::size_t j = 0; j < box_.size(); ++j) {
        const double w = box_[j].width();
        const double s = w > 0.0 ? std::clamp((x[j] - box_[j].lower) / w, 0.0, 1.0) : 0.0;
        z[r++] = std::asin(std::sqrt(s));
      }
    double rem = 1.0;
    for (std::size_t i = 0; i + 1 < t_; ++i) {
      const double c = rem > 0.0 ? std::clamp(std::sqrt(std::max(weights[i], 0.0) / rem), 0.0, 1.0) : 0.0;
      z[r++] = rem > 0.0 ? std::acos(c) : 0.0;
      rem -= weights[i];
    }
    return z;
  }

  void decode(const Vector& z, std::vector<Point>& points, std::vector<double>& weights) const {
    const std::size_t d = box_.size();
    points.assign(t_, Point(static_cast<Eigen::Index>(d)));
    weights.assign(t_, 0.0);
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < t_; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double s = std::sin(z[r++]);
        points[i][static_cast<Eigen::Index>(j)] = box_[j].lower + box_[j].width() * s * s;
      }
    double prod = 1.0;
    for (std::size_t i = 0; i + 1 < t_; ++i) {
      const double a = z[r++];
      const double c = std::cos(a);
      weights[i] = prod * c * c;
      const double s = std::sin(a);
      prod *= s * s;
    }
    weights[t_ - 1] = prod;
  }

 private:
  const std::vector<Interval>& box_;
  std::size_t t_;
};

Point canonical_point(const SupportProblem& problem, const Point& x) {
  return problem.canonical ? problem.canonical(x) : x;
}

Candidate tidy(const SupportProblem& problem, const DesignRegion& region, Candidate c) {
  ContinuousDesign d;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    d.points.push_back(canonical_point(problem, c.points[i]));
    d.weights.push_back(c.weights[i]);
  }
  d = canonical_order(merge_support(d, region));
  c.points = std::move(d.points);
  c.weights = std::move(d.weights);
  c.objective = problem.objective(c.points, c.weights);
  return c;
}

// Multiplicative weight algorithm at fixed support: w_i <- w_i d_i / p.
Candidate polish_weights(const SupportProblem& problem, Candidate c, std::size_t iters = 2000) {
  if (!std::isfinite(c.objective) || c.points.size() < 2) return c;
  const auto p = static_cast<double>(problem.p);
  Candidate cur = c;
  for (std::size_t it = 0; it < iters; ++it) {
    std::function<double(const Point&)> psi;
    try {
      psi = problem.sensitivity(cur.points, cur.weights);
    } catch (const SingularMatrixError&) {
      break;
    }
    double worst = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < cur.points.size(); ++i) {
      const double di = p - psi(cur.points[i]);
      worst = std::max(worst, std::abs(di - p));
      cur.weights[i] *= di / p;
      total += cur.weights[i];
    }
    for (double& w : cur.weights) w /= total;
    if (worst < 1e-10) break;
  }
  cur.objective = problem.objective(cur.points, cur.weights);
  return cur.objective <= c.objective ? cur : c;
}

Candidate local_search(const SupportProblem& problem, const Encoding& enc, const Candidate& start,
                       const ContinuousOptOptions& options) {
  const auto f = [&](const Vector& z) {
    std::vector<Point> lp;
    std::vector<double> lw;
    enc.decode(z, lp, lw);
    return problem.objective(lp, lw);
  };
  NelderMeadOptions nm;
  nm.max_evals = options.max_iters;
  nm.ftol = options.tol_obj;
  const Vector z0 = enc.encode(start.points, start.weights);
  MinimizeResult res = nelder_mead(f, z0, nm);
  if (std::isfinite(res.value)) res = bfgs(f, res.x);
  Candidate out;
  enc.decode(res.x, out.points, out.weights);
  out.objective = res.value;
  return out;
}

Candidate random_start(const SupportProblem& problem, std::size_t t, Rng& rng) {
  Candidate c;
  for (std::size_t i = 0; i < t; ++i) {
    Point x(static_cast<Eigen::Index>(problem.box.size()));
    for (std::size_t j = 0; j < problem.box.size(); ++j)
      x[static_cast<Eigen::Index>(j)] = rng.uniform(problem.box[j].lower, problem.box[j].upper);
    c.points.push_back(canonical_point(problem, x));
  }
  c.weights.assign(t, 1.0 / static_cast<double>(t));
  c.objective = problem.objective(c.points, c.weights);
  return c;
}

// Strictly better objective, or equal objective with a lexicographically
// smaller (points, weights) listing.
bool better(const Candidate& a, const Candidate& b) {
  if (a.objective < b.objective - 1e-12 * (1.0 + std::abs(b.objective))) return true;
  if (b.objective < a.objective - 1e-12 * (1.0 + std::abs(a.objective))) return false;
  if (a.points.size() != b.points.size()) return a.points.size() < b.points.size();
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const Point& x = a.points[i];
    const Point& y = b.points[i];
    for (Eigen::Index j = 0; j < x.size(); ++j)
      if (x[j] != y[j]) return x[j] < y[j];
    if (a.weights[i] != b.weights[i]) return a.weights[i] < b.weights[i];
  }
  return false;
}

}  // namespace

SupportSolution optimize_support(const SupportProblem& problem, const ContinuousOptOptions& options) {
  if (problem.box.empty()) throw ValidationError("empty search box");
  for (const auto& iv : problem.box)
    if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper))
      throw UnsupportedError("numerical optimisation needs a bounded design region");
  const std::size_t bound = caratheodory_bound(problem.p);
  const std::size_t t_min = options.t_min ? options.t_min : std::max<std::size_t>(problem.t_min, 1);
  const std::size_t t_max = options.t_max ? options.t_max : bound;
  if (t_min > t_max) throw ValidationError("t_min exceeds t_max");
  if (options.multistarts < 1) throw ValidationError("multistarts must be at least 1");

  const DesignRegion region(problem.box);
  const Rng master = Rng::substream(options.seed, "optimize.multistart");
  Candidate incumbent;
  EquivalenceReport report;
  Candidate overall;

  for (std::size_t t = t_min; t <= t_max; ++t) {
    const Encoding enc(problem.box, t);
    std::vector<Candidate> starts(options.multistarts);
    std::vector<Candidate> results(options.multistarts);
    for (std::size_t s = 0; s < options.multistarts; ++s) {
      Rng rng = master.split(t * 100003 + s);
      if (s == 0 && std::isfinite(incumbent.objective) && incumbent.points.size() < t) {
        // Previous best with the most negative psi point added; any further
        // slots get random points at small weight.
        Candidate c = incumbent;
        const double w = 1.0 / static_cast<double>(t);
        for (double& wi : c.weights) wi *= 1.0 - w;
        c.points.push_back(canonical_point(problem, report.argmin));
        c.weights.push_back(w);
        while (c.points.size() < t) {
          Point x(static_cast<Eigen::Index>(problem.box.size()));
          for (std::size_t j = 0; j < problem.box.size(); ++j)
            x[static_cast<Eigen::Index>(j)] = rng.uniform(problem.box[j].lower, problem.box[j].upper);
          c.points.push_back(canonical_point(problem, x));
          c.weights.push_back(1e-3);
        }
        double total = 0.0;
        for (double wi : c.weights) total += wi;
        for (double& wi : c.weights) wi /= total;
        c.objective = problem.objective(c.points, c.weights);
        starts[s] = std::move(c);
      } else {
        starts[s] = random_start(problem, t, rng);
        for (int retry = 0; retry < 32 && !std::isfinite(starts[s].objective); ++retry)
          starts[s] = random_start(problem, t, rng);
      }
    }
    parallel_for(options.multistarts, [&](std::size_t s) {
      Candidate c = local_search(problem, enc, starts[s], options);
      if (!std::isfinite(c.objective)) {
        results[s] = starts[s];
        return;
      }
      c = tidy(problem, region, std::move(c));
      c = polish_weights(problem, std::move(c));
      results[s] = c.objective <= starts[s].objective ? std::move(c) : starts[s];
    });

    Candidate best;
    for (std::size_t s = 0; s < options.multistarts; ++s)
      if (std::isfinite(results[s].objective) && (!std::isfinite(best.objective) || better(results[s], best)))
        best = results[s];
    if (!std::isfinite(best.objective)) continue;
    if (options.verbose) std::cerr << "t=" << t << " objective " << best.objective << '\n';

    incumbent = best;
    report = scan_minimum(problem.box, options.grid, problem.p, problem.sensitivity(best.points, best.weights),
                          problem.skip);
    if (!std::isfinite(overall.objective) || best.objective < overall.objective - options.tol_obj) overall = best;
    if (report.is_optimal) break;
  }
  if (!std::isfinite(overall.objective))
    throw SingularMatrixError("no nonsingular design found for any support size");

  SupportSolution sol;
  sol.points = std::move(overall.points);
  sol.weights = std::move(overall.weights);
  sol.objective = overall.objective;
  sol.report = scan_minimum(problem.box, options.grid, problem.p, problem.sensitivity(sol.points, sol.weights),
                            problem.skip);
  return sol;
}

ContinuousResult optimize_continuous(const ModelSpec& model, const ParameterSample& sample,
                                     const ContinuousOptOptions& options) {
  model.validate();
  if (!model.region.is_bounded())
    throw UnsupportedError("optimize_continuous needs a bounded region; use the closed-form constructor");
  SupportProblem problem;
  problem.box = model.region.bounds();
  problem.p = model.p();
  problem.t_min = model.p();
  problem.objective = [&](const std::vector<Point>& pts, const std::vector<double>& ws) {
    ContinuousDesign d{pts, ws};
    try {
      return bayes_objective(d, model, sample);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  problem.sensitivity = [&](const std::vector<Point>& pts, const std::vector<double>& ws) {
    auto psi = std::make_shared<BayesSensitivity>(ContinuousDesign{pts, ws}, model, sample);
    return std::function<double(const Point&)>([psi](const Point& x) { return (*psi)(x); });
  };
  SupportSolution sol = optimize_support(problem, options);
  ContinuousResult out;
  out.design = ContinuousDesign{std::move(sol.points), std::move(sol.weights)};
  out.objective = sol.objective;
  out.report = std::move(sol.report);
  return out;
}

ContinuousResult optimize_continuous(const ModelSpec& model, const Prior& prior,
                                     const ContinuousOptOptions& options) {
  return optimize_continuous(model, sample_prior(prior, options.sample), options);
}

WynnResult wynn_fedorov(const ModelSpec& model, const ParameterVector& theta, const WynnOptions& options,
                        const ContinuousDesign* start) {
  model.validate();
  if (!model.region.is_bounded()) throw UnsupportedError("wynn_fedorov needs a bounded region");
  const std::size_t p = model.p();
  const auto& box = model.region.bounds();

  ContinuousDesign xi;
  if (start) {
    xi = *start;
  } else {
    Rng rng = Rng::substream(options.seed, "wynn.start");
    bool ok = false;
    for (int attempt = 0; attempt < 32 && !ok; ++attempt) {
      std::vector<Point> pts;
      for (std::size_t i = 0; i <= p; ++i) {
        Point x(static_cast<Eigen::Index>(box.size()));
        for (std::size_t j = 0; j < box.size(); ++j)
          x[static_cast<Eigen::Index>(j)] = rng.uniform(box[j].lower, box[j].upper);
        pts.push_back(std::move(x));
      }
      xi = equal_weights(std::move(pts));
      ok = std::isfinite(d_objective(information_matrix(xi, model, theta)));
    }
    if (!ok) throw SingularMatrixError("no nonsingular starting design after 32 draws");
  }

  const double tol = options.grid.tolerance > 0.0 ? options.grid.tolerance : default_equivalence_tolerance(p);
  GridSpec grid = options.grid;
  grid.keep_grid = false;

  WynnResult res;
  double current = d_objective(information_matrix(xi, model, theta));
  if (!std::isfinite(current)) throw SingularMatrixError("starting design is singular");
  ContinuousDesign best = xi;
  double best_obj = current;

  std::size_t s = 0;
  for (;; ++s) {
    const LocalSensitivity psi(xi, model, theta);
    const EquivalenceReport rep = scan_minimum(box, grid, p, [&](const Point& x) { return psi(x); });
    res.min_psi = rep.min_psi;
    if (rep.min_psi >= -tol || s >= options.max_iters) break;
    const double alpha = 1.0 / static_cast<double>(s + 1 + p);
    for (double& w : xi.weights) w *= 1.0 - alpha;
    bool merged = false;
    for (std::size_t i = 0; i < xi.size(); ++i)
      if (xi.points[i] == rep.argmin) {
        xi.weights[i] += alpha;
        merged = true;
        break;
      }
    if (!merged) {
      xi.points.push_back(rep.argmin);
      xi.weights.push_back(alpha);
    }
    current = d_objective(information_matrix(xi, model, theta));
    if (current < best_obj) {
      best_obj = current;
      best = xi;
    }
    res.history.push_back(best_obj);
  }
  res.iterations = s;
  ContinuousDesign merged = canonical_order(merge_support(best, model.region));
  const double merged_obj = d_objective(information_matrix(merged, model, theta));
  if (merged_obj <= best_obj) {
    best = std::move(merged);
    best_obj = merged_obj;
  }
  res.design = std::move(best);
  res.objective = best_obj;
  return res;
}

}  // namespace optdes
