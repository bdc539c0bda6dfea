#pragma once

#include "optdes/design.hpp"
#include "optdes/prior.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace optdes {

// Per-draw efficiencies plus nearest-rank summary statistics.
struct EfficiencyDistribution {
  std::vector<ParameterVector> draws;
  std::vector<double> efficiencies;
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
  // Draws rejected because the oracle's preconditions failed.
  std::size_t rejected = 0;
};

// Locally optimal design at theta; throws PreconditionError to reject a draw.
using LocalOracle = std::function<ContinuousDesign(const ParameterVector&)>;

// Smallest value with at least q of the mass at or below it.
double nearest_rank_quantile(const std::vector<double>& sorted, double q);

void summarize(EfficiencyDistribution& dist);

// Eff = (det M(a) / det M(b))^(1/p) at each of n iid prior draws.
EfficiencyDistribution efficiency_distribution(const ContinuousDesign& a, const ContinuousDesign& b,
                                               const ModelSpec& model, const Prior& prior, std::size_t n,
                                               std::uint64_t seed);

// As above with b replaced by the oracle's design at each draw.
EfficiencyDistribution efficiency_distribution(const ContinuousDesign& a, const LocalOracle& oracle,
                                               const ModelSpec& model, const Prior& prior, std::size_t n,
                                               std::uint64_t seed);

}  // namespace optdes
