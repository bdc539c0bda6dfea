#include "optdes/prior.hpp"

#include "optdes/errors.hpp"
#include "optdes/rng.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace optdes {

Prior Prior::point(ParameterVector theta) {
  if (theta.size() == 0) throw ValidationError("point prior needs a non-empty parameter vector");
  Prior p;
  p.kind_ = PriorKind::point;
  p.theta_ = std::move(theta);
  return p;
}

Prior Prior::uniform_box(std::vector<Interval> bounds) {
  if (bounds.empty()) throw ValidationError("uniform prior needs at least one parameter");
  for (std::size_t i = 0; i < bounds.size(); ++i)
    if (!(std::isfinite(bounds[i].lower) && std::isfinite(bounds[i].upper) &&
          bounds[i].lower <= bounds[i].upper))
      throw ValidationError("uniform prior bounds for parameter " + std::to_string(i + 1) +
                            " need finite lower <= upper");
  Prior p;
  p.kind_ = PriorKind::uniform_box;
  p.bounds_ = std::move(bounds);
  return p;
}

Prior Prior::sample(std::vector<ParameterVector> draws, std::vector<double> weights) {
  if (draws.empty()) throw ValidationError("sample prior needs at least one draw");
  if (weights.empty()) weights.assign(draws.size(), 1.0 / static_cast<double>(draws.size()));
  if (weights.size() != draws.size()) throw ValidationError("sample prior needs one weight per draw");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("sample prior weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("sample prior weights must sum to 1");
  for (const auto& d : draws)
    if (d.size() != draws.front().size()) throw ValidationError("sample prior draws differ in length");
  Prior p;
  p.kind_ = PriorKind::sample;
  p.draws_ = std::move(draws);
  p.weights_ = std::move(weights);
  return p;
}

std::size_t Prior::dimension() const {
  switch (kind_) {
    case PriorKind::point: return static_cast<std::size_t>(theta_.size());
    case PriorKind::uniform_box: return bounds_.size();
    case PriorKind::sample: return static_cast<std::size_t>(draws_.front().size());
  }
  return 0;
}

ParameterVector Prior::mean() const {
  switch (kind_) {
    case PriorKind::point: return theta_;
    case PriorKind::uniform_box: {
      ParameterVector m(bounds_.size());
      for (std::size_t i = 0; i < bounds_.size(); ++i) m[i] = bounds_[i].midpoint();
      return m;
    }
    case PriorKind::sample: {
      ParameterVector m = ParameterVector::Zero(draws_.front().size());
      for (std::size_t i = 0; i < draws_.size(); ++i) m += weights_[i] * draws_[i];
      return m;
    }
  }
  return {};
}

ParameterSample sample_prior(const Prior& prior, const SampleSpec& spec) {
  if (spec.n_draws < 1) throw ValidationError("n_draws must be at least 1");
  switch (prior.kind()) {
    case PriorKind::point:
      return ParameterSample::single(prior.theta());
    case PriorKind::sample:
      if (spec.method == SamplingMethod::lhs)
        throw UnsupportedError("Latin hypercube sampling is not defined for an explicit sample prior");
      return {prior.draws(), prior.weights()};
    case PriorKind::uniform_box:
      break;
  }

  const auto& bounds = prior.bounds();
  const std::size_t n = spec.n_draws;
  const std::size_t d = bounds.size();
  ParameterSample out;
  out.draws.assign(n, ParameterVector(d));
  out.weights.assign(n, 1.0 / static_cast<double>(n));

  if (spec.method == SamplingMethod::iid) {
    Rng rng = Rng::substream(spec.seed, "prior.iid");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) out.draws[i][j] = rng.uniform(bounds[j].lower, bounds[j].upper);
    return out;
  }

  Rng rng = Rng::substream(spec.seed, "prior.lhs");
  for (std::size_t j = 0; j < d; ++j) {
    const auto perm = rng.permutation(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double cell = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
      out.draws[i][j] = bounds[j].lower + bounds[j].width() * cell;
    }
  }
  return out;
}

double bayes_objective(const ContinuousDesign& design, const ModelSpec& model,
                       const ParameterSample& sample) {
  double total = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample.weights[i] == 0.0) continue;
    const double obj = d_objective(information_matrix(design, model, sample.draws[i]));
    if (!std::isfinite(obj)) return std::numeric_limits<double>::infinity();
    total += sample.weights[i] * obj;
  }
  return total;
}

double bayes_objective(const ContinuousDesign& design, const ModelSpec& model, const Prior& prior,
                       const SampleSpec& spec) {
  return bayes_objective(design, model, sample_prior(prior, spec));
}

BayesSensitivity::BayesSensitivity(const ContinuousDesign& design, const ModelSpec& model,
                                   const ParameterSample& sample)
    : model_(&model), sample_(&sample) {
  inverses_.reserve(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const InformationMatrix m = information_matrix(design, model, sample.draws[i]);
    if (!log_determinant(m))
      throw SingularMatrixError("information matrix is singular at prior draw " + std::to_string(i + 1));
    Matrix inv = m.ldlt().solve(Matrix::Identity(m.rows(), m.cols()));
    inverses_.push_back(0.5 * (inv + inv.transpose()));
  }
}

double BayesSensitivity::variance_term(const Point& x) const {
  const Vector f = model_->basis.eval(x);
  double total = 0.0;
  for (std::size_t i = 0; i < inverses_.size(); ++i) {
    const double w = sample_->weights[i];
    if (w == 0.0) continue;
    const double u = glm_weight_eta(model_->family, model_->link, sample_->draws[i].dot(f));
    if (u == 0.0) continue;
    total += w * u * f.dot(inverses_[i] * f);
  }
  return total;
}

double BayesSensitivity::operator()(const Point& x) const {
  return static_cast<double>(model_->p()) - variance_term(x);
}

double bayes_sensitivity(const Point& x, const ContinuousDesign& design, const ModelSpec& model,
                         const ParameterSample& sample) {
  return BayesSensitivity(design, model, sample)(x);
}

}  // namespace optdes
