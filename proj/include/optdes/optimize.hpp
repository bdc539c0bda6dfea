#pragma once

#include "optdes/design.hpp"
#include "optdes/equivalence.hpp"
#include "optdes/prior.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace optdes {

struct ContinuousOptOptions {
  // Support-count range; 0 selects p (or the problem minimum) and the
  // Caratheodory bound respectively.
  std::size_t t_min = 0;
  std::size_t t_max = 0;
  std::size_t multistarts = 16;
  // Nelder-Mead evaluations per start and restart.
  std::size_t max_iters = 2000;
  double tol_obj = 1e-10;
  std::uint64_t seed = 1;
  // Prior sampling for uniform-box priors.
  SampleSpec sample;
  GridSpec grid;
  // One line per improvement on standard error.
  bool verbose = false;
};

// A weighted-support problem over a box. Support elements are single design
// points for GLMs and concatenated m-tuples for block designs.
struct SupportProblem {
  std::vector<Interval> box;
  std::size_t p = 0;
  std::size_t t_min = 0;
  // Criterion to minimise; +infinity when the design is singular.
  std::function<double(const std::vector<Point>&, const std::vector<double>&)> objective;
  // Derivative function psi of a (nonsingular) design.
  std::function<std::function<double(const Point&)>(const std::vector<Point>&, const std::vector<double>&)>
      sensitivity;
  // Representative of a support element's symmetry class (identity if empty).
  std::function<Point(const Point&)> canonical;
  // Grid points skipped during equivalence scans (symmetry).
  std::function<bool(const Point&)> skip;
};

struct SupportSolution {
  std::vector<Point> points;
  std::vector<double> weights;
  double objective = 0.0;
  EquivalenceReport report;
};

// Multistart Nelder-Mead over trigonometrically transformed coordinates and
// hyperspherical weights, polished by BFGS and multiplicative weight updates;
// t grows from t_min until the equivalence check passes.
SupportSolution optimize_support(const SupportProblem& problem, const ContinuousOptOptions& options);

struct ContinuousResult {
  ContinuousDesign design;
  double objective = 0.0;
  EquivalenceReport report;
};

ContinuousResult optimize_continuous(const ModelSpec& model, const ParameterSample& sample,
                                     const ContinuousOptOptions& options = {});
ContinuousResult optimize_continuous(const ModelSpec& model, const Prior& prior,
                                     const ContinuousOptOptions& options = {});

struct WynnOptions {
  std::size_t max_iters = 20000;
  GridSpec grid;
  std::uint64_t seed = 1;
};

struct WynnResult {
  ContinuousDesign design;
  double objective = 0.0;
  std::size_t iterations = 0;
  double min_psi = 0.0;
  // Objective of the incumbent after each iteration (non-increasing).
  std::vector<double> history;
};

// Sequential addition of the grid argmin of psi with step 1/(s+1+p). The
// default start is equal weight on p+1 low-discrepancy points.
WynnResult wynn_fedorov(const ModelSpec& model, const ParameterVector& theta, const WynnOptions& options = {},
                        const ContinuousDesign* start = nullptr);

}  // namespace optdes
