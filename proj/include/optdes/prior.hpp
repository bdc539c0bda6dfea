#pragma once

#include "optdes/design.hpp"
#include "optdes/region.hpp"
#include "optdes/types.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace optdes {

enum class PriorKind { point, uniform_box, sample };

// Prior information on theta: a point mass, independent uniforms on a box,
// or an explicit weighted sample. Box axes with lower == upper are held fixed.
class Prior {
 public:
  static Prior point(ParameterVector theta);
  static Prior uniform_box(std::vector<Interval> bounds);
  static Prior sample(std::vector<ParameterVector> draws, std::vector<double> weights = {});

  PriorKind kind() const { return kind_; }
  std::size_t dimension() const;
  const ParameterVector& theta() const { return theta_; }
  const std::vector<Interval>& bounds() const { return bounds_; }
  const std::vector<ParameterVector>& draws() const { return draws_; }
  const std::vector<double>& weights() const { return weights_; }

  // E(theta); analytic for the box (midpoints).
  ParameterVector mean() const;

 private:
  PriorKind kind_ = PriorKind::point;
  ParameterVector theta_;
  std::vector<Interval> bounds_;
  std::vector<ParameterVector> draws_;
  std::vector<double> weights_;
};

enum class SamplingMethod { lhs, iid };

struct SampleSpec {
  std::size_t n_draws = 1;
  std::uint64_t seed = 1;
  SamplingMethod method = SamplingMethod::lhs;
};

// Weighted parameter values used to approximate prior expectations.
struct ParameterSample {
  std::vector<ParameterVector> draws;
  std::vector<double> weights;

  std::size_t size() const { return draws.size(); }
  static ParameterSample single(ParameterVector theta) { return {{std::move(theta)}, {1.0}}; }
};

// Point priors return themselves and explicit samples are used as given (iid
// only). Boxes are sampled by Latin hypercube (one uniform draw inside each of
// n equal-probability strata, independent permutation per axis) or iid.
ParameterSample sample_prior(const Prior& prior, const SampleSpec& spec);

// -E log det M over the sample; +infinity if any draw is singular.
double bayes_objective(const ContinuousDesign& design, const ModelSpec& model,
                       const ParameterSample& sample);
double bayes_objective(const ContinuousDesign& design, const ModelSpec& model, const Prior& prior,
                       const SampleSpec& spec);

// Prior-averaged derivative psi(x) = p - E u f' M^-1 f. Each draw's M is
// factorised once.
class BayesSensitivity {
 public:
  BayesSensitivity(const ContinuousDesign& design, const ModelSpec& model, const ParameterSample& sample);

  double operator()(const Point& x) const;
  // E u f' M^-1 f at x.
  double variance_term(const Point& x) const;

 private:
  const ModelSpec* model_;
  const ParameterSample* sample_;
  std::vector<Matrix> inverses_;
};

double bayes_sensitivity(const Point& x, const ContinuousDesign& design, const ModelSpec& model,
                         const ParameterSample& sample);

}  // namespace optdes
