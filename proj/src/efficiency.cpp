#include "optdes/efficiency.hpp"

#include "optdes/errors.hpp"
#include "optdes/parallel.hpp"
#include "optdes/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace optdes {

namespace {

constexpr std::size_t kMaxRejectFactor = 100;

ParameterVector draw(const Prior& prior, Rng& rng) {
  switch (prior.kind()) {
    case PriorKind::point:
      return prior.theta();
    case PriorKind::uniform_box: {
      const auto& b = prior.bounds();
      ParameterVector theta(b.size());
      for (std::size_t j = 0; j < b.size(); ++j) theta[j] = rng.uniform(b[j].lower, b[j].upper);
      return theta;
    }
    case PriorKind::sample: {
      const double u = rng.uniform();
      double acc = 0.0;
      const auto& w = prior.weights();
      for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (u < acc) return prior.draws()[i];
      }
      return prior.draws().back();
    }
  }
  return {};
}

void check_n(std::size_t n) {
  if (n < 1) throw ValidationError("efficiency distribution needs at least one draw");
}

}  // namespace

double nearest_rank_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

void summarize(EfficiencyDistribution& dist) {
  std::vector<double> s = dist.efficiencies;
  std::sort(s.begin(), s.end());
  dist.min = s.front();
  dist.max = s.back();
  dist.q25 = nearest_rank_quantile(s, 0.25);
  dist.median = nearest_rank_quantile(s, 0.5);
  dist.q75 = nearest_rank_quantile(s, 0.75);
}

EfficiencyDistribution efficiency_distribution(const ContinuousDesign& a, const ContinuousDesign& b,
                                               const ModelSpec& model, const Prior& prior, std::size_t n,
                                               std::uint64_t seed) {
  check_n(n);
  EfficiencyDistribution dist;
  Rng rng = Rng::substream(seed, "effdist.draws");
  for (std::size_t i = 0; i < n; ++i) dist.draws.push_back(draw(prior, rng));
  dist.efficiencies.resize(n);
  parallel_for(n, [&](std::size_t i) { dist.efficiencies[i] = d_efficiency(a, b, model, dist.draws[i]); });
  summarize(dist);
  return dist;
}

EfficiencyDistribution efficiency_distribution(const ContinuousDesign& a, const LocalOracle& oracle,
                                               const ModelSpec& model, const Prior& prior, std::size_t n,
                                               std::uint64_t seed) {
  check_n(n);
  EfficiencyDistribution dist;
  std::vector<ContinuousDesign> refs;
  Rng rng = Rng::substream(seed, "effdist.draws");
  while (dist.draws.size() < n) {
    ParameterVector theta = draw(prior, rng);
    try {
      refs.push_back(oracle(theta));
    } catch (const PreconditionError&) {
      if (++dist.rejected > kMaxRejectFactor * n)
        throw PreconditionError("oracle preconditions fail for almost every prior draw (" +
                                std::to_string(dist.rejected) + " rejections)");
      continue;
    }
    dist.draws.push_back(std::move(theta));
  }
  dist.efficiencies.resize(n);
  parallel_for(n, [&](std::size_t i) { dist.efficiencies[i] = d_efficiency(a, refs[i], model, dist.draws[i]); });
  summarize(dist);
  return dist;
}

}  // namespace optdes
