#include "optdes/exact.hpp"

#include "optdes/equivalence.hpp"
#include "optdes/errors.hpp"
#include "optdes/nelder_mead.hpp"
#include "optdes/parallel.hpp"
#include "optdes/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace optdes {

namespace {

// sqrt(u) f(x) for every draw, or empty if x is inadmissible for some draw.
std::optional<std::vector<Vector>> scaled_rows(const ModelSpec& model, const ParameterSample& sample,
                                               const Point& x) {
  const Vector f = model.basis.eval(x);
  std::vector<Vector> rows;
  rows.reserve(sample.size());
  for (const auto& theta : sample.draws) {
    const double eta = theta.dot(f);
    if (!model.link.admissible(eta)) return std::nullopt;
    rows.push_back(std::sqrt(glm_weight_eta(model.family, model.link, eta)) * f);
  }
  return rows;
}

// Per-draw unnormalised information sum_i g_i g_i' and its inverse.
class TrialState {
 public:
  TrialState(const ModelSpec& model, const ParameterSample& sample, std::vector<Point> trials)
      : model_(&model), sample_(&sample), trials_(std::move(trials)) {
    rows_.resize(trials_.size());
    for (std::size_t i = 0; i < trials_.size(); ++i) {
      auto r = scaled_rows(model, sample, trials_[i]);
      if (!r) throw DomainError("trial " + std::to_string(i + 1) + " is outside the link's domain");
      rows_[i] = std::move(*r);
    }
    refresh();
  }

  bool ok() const { return ok_; }
  double objective() const { return objective_; }
  const std::vector<Point>& trials() const { return trials_; }
  const std::vector<Vector>& rows(std::size_t i) const { return rows_[i]; }
  const Matrix& inverse(std::size_t d) const { return inverses_[d]; }

  void refresh() {
    const std::size_t p = model_->p();
    const std::size_t nd = sample_->size();
    inverses_.assign(nd, Matrix());
    logdets_.assign(nd, 0.0);
    ok_ = true;
    for (std::size_t d = 0; d < nd; ++d) {
      Matrix m = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
      for (const auto& r : rows_) m.noalias() += r[d] * r[d].transpose();
      const auto ld = log_determinant(m);
      if (!ld) {
        ok_ = false;
        continue;
      }
      logdets_[d] = *ld;
      inverses_[d] = m.ldlt().solve(Matrix::Identity(m.rows(), m.cols()));
    }
    recompute_objective();
  }

  // Change in sum_d w_d log det when trial i's rows become `g`; nullopt if
  // the exchange makes some draw singular.
  std::optional<double> exchange_gain(std::size_t i, const std::vector<Vector>& g) const {
    double gain = 0.0;
    for (std::size_t d = 0; d < sample_->size(); ++d) {
      const Vector& gi = rows_[i][d];
      const Vector a = inverses_[d] * g[d];
      const double dx = g[d].dot(a);
      const double di = gi.dot(inverses_[d] * gi);
      const double cross = gi.dot(a);
      const double ratio = (1.0 + dx) * (1.0 - di) + cross * cross;
      if (!(ratio > 1e-12)) return std::nullopt;
      gain += sample_->weights[d] * std::log(ratio);
    }
    return gain;
  }

  void apply(std::size_t i, Point x, std::vector<Vector> g) {
    for (std::size_t d = 0; d < sample_->size(); ++d) {
      Matrix& inv = inverses_[d];
      // Add g, then remove the old row (Sherman-Morrison twice).
      Vector a = inv * g[d];
      inv -= (a * a.transpose()) / (1.0 + g[d].dot(a));
      const Vector& old = rows_[i][d];
      Vector b = inv * old;
      inv += (b * b.transpose()) / (1.0 - old.dot(b));
    }
    trials_[i] = std::move(x);
    rows_[i] = std::move(g);
    if (++updates_ % 500 == 0) {
      refresh();
    } else {
      for (std::size_t d = 0; d < sample_->size(); ++d) logdets_[d] = -std::log(inverses_[d].determinant());
      recompute_objective();
    }
  }

 private:
  void recompute_objective() {
    if (!ok_) {
      objective_ = std::numeric_limits<double>::infinity();
      return;
    }
    const double n = static_cast<double>(trials_.size());
    const double p = static_cast<double>(model_->p());
    double total = 0.0;
    for (std::size_t d = 0; d < sample_->size(); ++d) total -= sample_->weights[d] * logdets_[d];
    objective_ = total + p * std::log(n);
  }

  const ModelSpec* model_;
  const ParameterSample* sample_;
  std::vector<Point> trials_;
  std::vector<std::vector<Vector>> rows_;
  std::vector<Matrix> inverses_;
  std::vector<double> logdets_;
  double objective_ = 0.0;
  bool ok_ = true;
  std::size_t updates_ = 0;
};

Point random_point(const std::vector<Interval>& box, Rng& rng) {
  Point x(static_cast<Eigen::Index>(box.size()));
  for (std::size_t j = 0; j < box.size(); ++j) x[static_cast<Eigen::Index>(j)] = rng.uniform(box[j].lower, box[j].upper);
  return x;
}

std::vector<Point> random_trials(const ModelSpec& model, const ParameterSample& sample, int n, Rng& rng,
                                 const std::vector<Point>* candidates) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<Point> trials;
    for (int i = 0; i < n; ++i)
      trials.push_back(candidates ? (*candidates)[rng.below(candidates->size())]
                                  : random_point(model.region.bounds(), rng));
    bool ok = true;
    for (const auto& x : trials) ok = ok && scaled_rows(model, sample, x).has_value();
    if (!ok) continue;
    if (TrialState(model, sample, trials).ok()) return trials;
  }
  throw SingularMatrixError("could not draw a nonsingular starting design");
}

ExactResult finish(const ModelSpec& model, const ParameterSample& sample, const std::vector<Point>& trials) {
  ExactResult res;
  res.design = collect_trials(trials);
  res.objective = exact_objective(res.design, model, sample);
  return res;
}

// Quasi-Newton descent on all trial coordinates, kept inside the region by
// x = l + (u - l) sin^2(phi).
std::vector<Point> polish_trials(const ModelSpec& model, const ParameterSample& sample, std::vector<Point> trials) {
  const auto& box = model.region.bounds();
  const std::size_t k = box.size();
  const auto decode = [&](const Vector& z) {
    std::vector<Point> out(trials.size(), Point(static_cast<Eigen::Index>(k)));
    for (std::size_t i = 0; i < trials.size(); ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const double s = std::sin(z[static_cast<Eigen::Index>(i * k + j)]);
        out[i][static_cast<Eigen::Index>(j)] = box[j].lower + box[j].width() * s * s;
      }
    return out;
  };
  Vector z0(static_cast<Eigen::Index>(trials.size() * k));
  for (std::size_t i = 0; i < trials.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double r = std::clamp((trials[i][static_cast<Eigen::Index>(j)] - box[j].lower) / box[j].width(), 0.0, 1.0);
      z0[static_cast<Eigen::Index>(i * k + j)] = std::asin(std::sqrt(r));
    }
  const auto f = [&](const Vector& z) {
    try {
      return bayes_objective(equal_weights(decode(z)), model, sample);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const double before = f(z0);
  const MinimizeResult res = bfgs(f, z0, 500);
  return res.value < before ? decode(res.x) : trials;
}

ExactResult run_exchange(const ModelSpec& model, const ParameterSample& sample, const ExactOptOptions& options,
                         const std::vector<Point>& candidates, const std::vector<std::vector<Vector>>& cand_rows,
                         Rng rng) {
  TrialState state(model, sample, random_trials(model, sample, options.n, rng, &candidates));
  const std::size_t n = static_cast<std::size_t>(options.n);
  for (int pass = 0; pass < 10000; ++pass) {
    double best_gain = 1e-10;
    std::size_t best_i = n;
    std::size_t best_c = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        const auto gain = state.exchange_gain(i, cand_rows[c]);
        if (gain && *gain > best_gain) {
          best_gain = *gain;
          best_i = i;
          best_c = c;
        }
      }
    if (best_i == n) break;
    state.apply(best_i, candidates[best_c], cand_rows[best_c]);
    state.refresh();
  }
  return finish(model, sample, state.trials());
}

ExactResult run_anneal(const ModelSpec& model, const ParameterSample& sample, const ExactOptOptions& options,
                       double t0, Rng rng) {
  const auto& box = model.region.bounds();
  const std::size_t n = static_cast<std::size_t>(options.n);
  const std::size_t k = box.size();
  const AnnealSchedule& sched = options.anneal;
  TrialState state(model, sample, random_trials(model, sample, options.n, rng, nullptr));
  std::vector<Point> best = state.trials();
  double best_obj = state.objective();
  double temp = t0;
  const std::size_t cool_every = 100 * n;
  for (std::size_t step = 0; step < sched.steps; ++step) {
    if (step > 0 && step % cool_every == 0) temp *= sched.cooling;
    const double frac = static_cast<double>(step) / static_cast<double>(sched.steps);
    const double radius = sched.radius_start * std::pow(sched.radius_end / sched.radius_start, frac);
    const std::size_t i = rng.below(n);
    const std::size_t j = rng.below(k);
    Point x = state.trials()[i];
    const auto jj = static_cast<Eigen::Index>(j);
    x[jj] = std::clamp(x[jj] + radius * box[j].width() * rng.uniform(-1.0, 1.0), box[j].lower, box[j].upper);
    const double u = rng.uniform();
    auto rows = scaled_rows(model, sample, x);
    if (!rows) continue;
    const auto gain = state.exchange_gain(i, *rows);
    if (!gain) continue;
    // The objective is -log det, so an improvement is a positive gain.
    if (*gain >= 0.0 || (temp > 0.0 && u < std::exp(*gain / temp))) {
      state.apply(i, std::move(x), std::move(*rows));
      if (state.objective() < best_obj) {
        best_obj = state.objective();
        best = state.trials();
      }
    }
  }
  return finish(model, sample, polish_trials(model, sample, std::move(best)));
}

double probe_temperature(const ModelSpec& model, const ParameterSample& sample, const ExactOptOptions& options) {
  Rng rng = Rng::substream(options.seed, "exact.anneal.probes");
  std::vector<double> values;
  for (std::size_t i = 0; i < options.anneal.probes; ++i) {
    std::vector<Point> trials;
    for (int t = 0; t < options.n; ++t) trials.push_back(random_point(model.region.bounds(), rng));
    bool ok = true;
    for (const auto& x : trials) ok = ok && scaled_rows(model, sample, x).has_value();
    if (!ok) continue;
    const double v = TrialState(model, sample, trials).objective();
    if (std::isfinite(v)) values.push_back(v);
  }
  if (values.size() < 2) return 1.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

double exact_objective(const ExactDesign& design, const ModelSpec& model, const ParameterSample& sample) {
  return bayes_objective(design.as_continuous(), model, sample);
}

ExactDesign collect_trials(const std::vector<Point>& trials) {
  auto less = [](const Point& a, const Point& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  };
  std::map<Point, int, decltype(less)> counts(less);
  for (const auto& x : trials) ++counts[x];
  ExactDesign out;
  for (const auto& [x, c] : counts) {
    out.points.push_back(x);
    out.reps.push_back(c);
  }
  return out;
}

ExactResult optimize_exact(const ModelSpec& model, const ParameterSample& sample, const ExactOptOptions& options) {
  model.validate();
  if (!model.region.is_bounded()) throw UnsupportedError("exact designs need a bounded region");
  if (options.n < static_cast<int>(model.p()))
    throw ValidationError("n = " + std::to_string(options.n) + " is smaller than p = " + std::to_string(model.p()));
  if (options.multistarts < 1) throw ValidationError("multistarts must be at least 1");
  const Rng master = Rng::substream(options.seed, options.method == ExactMethod::anneal ? "exact.anneal" : "exact.exchange");
  std::vector<ExactResult> results(options.multistarts);

  if (options.method == ExactMethod::grid_exchange) {
    if (!(options.grid_step > 0.0)) throw ValidationError("grid_step must be positive");
    std::vector<Point> candidates;
    std::vector<std::vector<Vector>> cand_rows;
    for (auto& x : tensor_grid(model.region.bounds(), options.grid_step)) {
      auto rows = scaled_rows(model, sample, x);
      if (!rows) continue;
      candidates.push_back(std::move(x));
      cand_rows.push_back(std::move(*rows));
    }
    if (candidates.empty()) throw DomainError("no admissible candidate points");
    parallel_for(options.multistarts, [&](std::size_t s) {
      results[s] = run_exchange(model, sample, options, candidates, cand_rows, master.split(s));
    });
  } else {
    const double t0 = options.anneal.t0 > 0.0 ? options.anneal.t0 : probe_temperature(model, sample, options);
    parallel_for(options.multistarts,
                 [&](std::size_t s) { results[s] = run_anneal(model, sample, options, t0, master.split(s)); });
  }

  std::size_t best = 0;
  for (std::size_t s = 1; s < results.size(); ++s)
    if (results[s].objective < results[best].objective) best = s;
  return results[best];
}

ExactResult optimize_exact(const ModelSpec& model, const Prior& prior, const ExactOptOptions& options) {
  return optimize_exact(model, sample_prior(prior, options.sample), options);
}

}  // namespace optdes
