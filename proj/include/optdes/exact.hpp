#pragma once

#include "optdes/design.hpp"
#include "optdes/prior.hpp"

#include <cstddef>
#include <cstdint>

namespace optdes {

enum class ExactMethod { anneal, grid_exchange };

struct AnnealSchedule {
  // Initial temperature; 0 selects the standard deviation of the objective
  // over `probes` random designs.
  double t0 = 0.0;
  std::size_t probes = 64;
  // Temperature multiplier applied every 100 n proposals.
  double cooling = 0.95;
  std::size_t steps = 100000;
  // Proposal half-width as a fraction of the axis width, shrinking
  // geometrically from `radius_start` to `radius_end`.
  double radius_start = 0.5;
  double radius_end = 0.01;
};

struct ExactOptOptions {
  int n = 0;
  ExactMethod method = ExactMethod::anneal;
  double grid_step = 0.01;
  AnnealSchedule anneal;
  // Independent starts (exchange) or chains (annealing); best one kept.
  std::size_t multistarts = 4;
  std::uint64_t seed = 1;
  SampleSpec sample;
};

struct ExactResult {
  ExactDesign design;
  double objective = 0.0;
};

// -E log det M with M normalised by n; +infinity if any draw is singular.
double exact_objective(const ExactDesign& design, const ModelSpec& model, const ParameterSample& sample);

// Groups identical trial points into replications, sorted lexicographically.
ExactDesign collect_trials(const std::vector<Point>& trials);

ExactResult optimize_exact(const ModelSpec& model, const ParameterSample& sample, const ExactOptOptions& options);
ExactResult optimize_exact(const ModelSpec& model, const Prior& prior, const ExactOptOptions& options);

}  // namespace optdes
