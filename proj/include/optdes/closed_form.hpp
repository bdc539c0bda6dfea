#pragma once

#include "optdes/design.hpp"
#include "optdes/prior.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace optdes {

struct CanonicalConstant {
  double c_star = 0.0;
  LinkKind link = LinkKind::logistic;
  // Residual of the stationarity condition at c_star.
  double residual = 0.0;
};

// A design produced by an analytic result, with the quantities used to build it.
struct TheoremDesign {
  ContinuousDesign design;
  std::string source;
  std::map<std::string, double> quantities;
  // |eta* - eta_l| / |theta_k| per factorial level l of the bounded factors.
  std::vector<double> a_star;
  // The analytic design left the region and a numerical search was used.
  bool fallback = false;
};

// Maximiser of eta^2 u(eta)^power over (0, upper] for a binomial link by
// golden-section search to 1e-10.
double maximize_eta_weight_power(const LinkFunction& link, double power, double upper = 50.0);

// c* maximising the determinant of the symmetric two-point design in the
// canonical variable eta, i.e. eta^2 u(eta)^2; 1/c = 2h(c) - 1 at the optimum.
CanonicalConstant canonical_logistic_constant();

// {(-c* - theta0)/theta1, (c* - theta0)/theta1} with weights 1/2. Falls back to
// a numerical search if a point leaves a bounded region.
TheoremDesign logistic_1d_design(double theta0, double theta1, const DesignRegion& region);

// Logistic first-order model on a box with one unbounded axis: 2^k equally
// weighted points where eta = +-eta* at every corner of the bounded factors,
// eta* maximising eta^2 u(eta)^(k+1).
TheoremDesign yang_zhang_design(const ParameterVector& theta, const DesignRegion& region);

struct GammaOfaatOutcome {
  std::optional<TheoremDesign> design;
  bool condition_holds = false;
  std::string report;
};

// One-factor-at-a-time design on [0,1]^k for gamma regression with a power or
// Box-Cox link, or a report when the optimality condition fails.
GammaOfaatOutcome gamma_ofaat_design(const ParameterVector& theta, const LinkFunction& link);

// Poisson log-linear first-order model: k+1 equally weighted points c and
// c - (2/theta_i) e_i, with c_i the upper bound when theta_i > 0.
TheoremDesign russell_poisson_design(const ParameterVector& theta, const DesignRegion& region);

// russell_poisson_design at the prior mean.
TheoremDesign bayes_minimal_poisson_design(const Prior& prior, const DesignRegion& region);

}  // namespace optdes
