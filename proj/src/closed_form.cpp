#include "optdes/closed_form.hpp"

#include "optdes/errors.hpp"
#include "optdes/optimize.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace optdes {

namespace {

const Family kBinomial{FamilyKind::binomial, 1.0};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

double maximize_eta_weight_power(const LinkFunction& link, double power, double upper) {
  const auto g = [&](double eta) {
    const double u = glm_weight_eta(kBinomial, link, eta);
    if (u <= 0.0) return -std::numeric_limits<double>::infinity();
    return 2.0 * std::log(eta) + power * std::log(u);
  };
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-9;
  double b = upper;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double gc = g(c);
  double gd = g(d);
  while (b - a > 1e-10) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - ratio * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + ratio * (b - a);
      gd = g(d);
    }
  }
  return 0.5 * (a + b);
}

CanonicalConstant canonical_logistic_constant() {
  CanonicalConstant out;
  out.link = LinkKind::logistic;
  out.c_star = maximize_eta_weight_power(LinkFunction::logistic(), 2.0, 10.0);
  const double h = inverse_link(LinkFunction::logistic(), out.c_star);
  out.residual = 1.0 / out.c_star - (2.0 * h - 1.0);
  return out;
}

TheoremDesign logistic_1d_design(double theta0, double theta1, const DesignRegion& region) {
  if (theta1 == 0.0) throw PreconditionError("theta1 = 0: the optimal design moves off to infinity");
  if (region.dimension() != 1) throw ValidationError("the one-variable design needs a one-dimensional region");
  const double c = canonical_logistic_constant().c_star;
  TheoremDesign out;
  out.source = "canonical logistic";
  out.quantities["c_star"] = c;
  Point lo(1);
  Point hi(1);
  lo[0] = (-c - theta0) / theta1;
  hi[0] = (c - theta0) / theta1;
  if (lo[0] > hi[0]) std::swap(lo, hi);
  if (region.contains(lo, 0.0) && region.contains(hi, 0.0)) {
    out.design = ContinuousDesign{{lo, hi}, {0.5, 0.5}};
    return out;
  }
  ParameterVector theta(2);
  theta << theta0, theta1;
  const ModelSpec model =
      make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(1), region);
  out.design = optimize_continuous(model, ParameterSample::single(theta)).design;
  out.fallback = true;
  return out;
}

TheoremDesign yang_zhang_design(const ParameterVector& theta, const DesignRegion& region) {
  const auto axis = region.unbounded_axis();
  if (!axis) throw PreconditionError("the construction needs one unbounded axis");
  const std::size_t k = region.dimension();
  if (static_cast<std::size_t>(theta.size()) != k + 1)
    throw ValidationError("theta must have k + 1 entries for a first-order model");
  const double slope = theta[static_cast<Eigen::Index>(*axis + 1)];
  if (slope == 0.0) throw PreconditionError("the parameter of the unbounded axis must be non-zero");

  const double eta_star = maximize_eta_weight_power(LinkFunction::logistic(), static_cast<double>(k + 1));
  TheoremDesign out;
  out.source = "logistic first-order, one unbounded axis";
  out.quantities["eta_star"] = eta_star;

  const std::size_t levels = std::size_t{1} << (k - 1);
  const double w = 1.0 / static_cast<double>(2 * levels);
  for (std::size_t l = 0; l < levels; ++l) {
    Point x(static_cast<Eigen::Index>(k));
    double eta_l = theta[0];
    std::size_t bit = 0;
    // Factorial level with the first bounded factor varying slowest.
    for (std::size_t j = 0; j < k; ++j) {
      if (j == *axis) continue;
      const std::size_t shift = k - 2 - bit++;
      const auto& b = region.bound(j);
      x[static_cast<Eigen::Index>(j)] = ((l >> shift) & 1U) ? b.upper : b.lower;
      eta_l += theta[static_cast<Eigen::Index>(j + 1)] * x[static_cast<Eigen::Index>(j)];
    }
    out.a_star.push_back(std::abs((eta_star - eta_l) / slope));
    for (double sign : {-1.0, 1.0}) {
      Point y = x;
      y[static_cast<Eigen::Index>(*axis)] = (sign * eta_star - eta_l) / slope;
      out.design.points.push_back(std::move(y));
      out.design.weights.push_back(w);
    }
  }
  return out;
}

GammaOfaatOutcome gamma_ofaat_design(const ParameterVector& theta, const LinkFunction& link) {
  if (theta.size() < 2) throw ValidationError("theta needs an intercept and at least one slope");
  const auto k = static_cast<std::size_t>(theta.size() - 1);
  bool positive = false;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (theta[j] < 0.0)
      throw PreconditionError("theta_" + std::to_string(j) + " is negative; the coded problem needs theta_j >= 0");
    positive = positive || theta[j] > 0.0;
  }
  if (!positive) throw PreconditionError("at least one theta_j must be positive");

  GammaOfaatOutcome out;
  double lhs = 0.0;
  double scale = 1.0;
  if (link.kind() == LinkKind::power) {
    lhs = theta[0] * theta[0];
  } else if (link.kind() == LinkKind::boxcox || link.kind() == LinkKind::log) {
    const double lambda = link.kind() == LinkKind::log ? 0.0 : link.shape();
    lhs = (1.0 + lambda * theta[0]) * (1.0 + lambda * theta[0]);
    scale = lambda * lambda;
  } else {
    throw UnsupportedError("the one-factor-at-a-time result covers power and Box-Cox links only");
  }

  out.condition_holds = true;
  double worst = 0.0;
  for (std::size_t i = 1; i <= k && out.condition_holds; ++i)
    for (std::size_t j = 1; j <= k; ++j) {
      const double rhs = scale * theta[static_cast<Eigen::Index>(i)] * theta[static_cast<Eigen::Index>(j)];
      if (lhs > rhs * (1.0 + 1e-12)) {
        out.condition_holds = false;
        worst = rhs;
        break;
      }
    }
  if (!out.condition_holds) {
    std::ostringstream os;
    os << "one-factor-at-a-time condition fails: " << fmt(lhs) << " > " << fmt(worst);
    if (scale == 0.0) os << "; as lambda -> 0 the weights tend to 1 and the design tends to the 2^k factorial";
    os << "; use a numerical search";
    out.report = os.str();
    return out;
  }

  TheoremDesign d;
  d.source = "one-factor-at-a-time";
  const double w = 1.0 / static_cast<double>(k + 1);
  d.design.points.push_back(Point::Zero(static_cast<Eigen::Index>(k)));
  for (std::size_t i = 0; i < k; ++i) {
    Point e = Point::Zero(static_cast<Eigen::Index>(k));
    e[static_cast<Eigen::Index>(i)] = 1.0;
    d.design.points.push_back(std::move(e));
  }
  d.design.weights.assign(k + 1, w);
  out.design = std::move(d);
  out.report = "one-factor-at-a-time condition holds";
  return out;
}

TheoremDesign russell_poisson_design(const ParameterVector& theta, const DesignRegion& region) {
  if (!region.is_bounded()) throw PreconditionError("the Poisson construction needs a bounded region");
  const std::size_t k = region.dimension();
  if (static_cast<std::size_t>(theta.size()) != k + 1)
    throw ValidationError("theta must have k + 1 entries for a first-order model");
  Point c(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    const double t = theta[static_cast<Eigen::Index>(i + 1)];
    const auto& b = region.bound(i);
    if (!(std::abs(t * b.width()) >= 2.0))
      throw PreconditionError("|theta_" + std::to_string(i + 1) + " (u_" + std::to_string(i + 1) + " - l_" +
                              std::to_string(i + 1) + ")| = " + fmt(std::abs(t * b.width())) + " < 2");
    c[static_cast<Eigen::Index>(i)] = t > 0.0 ? b.upper : b.lower;
  }
  TheoremDesign out;
  out.source = "Poisson minimal support";
  for (std::size_t i = 0; i < k; ++i) {
    Point x = c;
    x[static_cast<Eigen::Index>(i)] -= 2.0 / theta[static_cast<Eigen::Index>(i + 1)];
    out.design.points.push_back(std::move(x));
  }
  out.design.points.push_back(c);
  out.design.weights.assign(k + 1, 1.0 / static_cast<double>(k + 1));
  return out;
}

TheoremDesign bayes_minimal_poisson_design(const Prior& prior, const DesignRegion& region) {
  const ParameterVector mean = prior.mean();
  TheoremDesign out = russell_poisson_design(mean, region);
  out.source = "Bayesian Poisson minimal support";
  for (Eigen::Index i = 0; i < mean.size(); ++i) out.quantities["theta_star_" + std::to_string(i)] = mean[i];
  return out;
}

}  // namespace optdes
