#include "optdes/glm.hpp"

#include "optdes/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace optdes {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

std::string format_eta(double eta) {
  std::ostringstream os;
  os.precision(17);
  os << eta;
  return os.str();
}

// log(1 - exp(-t)) for t > 0, accurate when t is tiny or huge.
double log_one_minus_exp_neg(double t) {
  if (t < 1e-8) return std::log(t) - 0.5 * t;
  return std::log(-std::expm1(-t));
}

}  // namespace

double normal_pdf(double z) { return std::exp(-0.5 * z * z - 0.5 * kLogTwoPi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double log_normal_cdf(double z) {
  if (z > -20.0) return std::log(normal_cdf(z));
  // Mills-ratio asymptotic series for the far lower tail.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - 0.5 * kLogTwoPi - std::log(-z) + std::log(series);
}

double Family::variance(double mu) const {
  switch (kind) {
    case FamilyKind::normal: return 1.0;
    case FamilyKind::binomial: return mu * (1.0 - mu);
    case FamilyKind::poisson: return mu;
    case FamilyKind::gamma: return mu * mu;
  }
  return 1.0;
}

std::string Family::name() const {
  switch (kind) {
    case FamilyKind::normal: return "normal";
    case FamilyKind::binomial: return "binomial";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::gamma: return "gamma";
  }
  return "unknown";
}

LinkFunction LinkFunction::boxcox(double lambda) {
  if (!std::isfinite(lambda)) throw ValidationError("boxcox lambda must be finite");
  return LinkFunction(LinkKind::boxcox, lambda);
}

LinkFunction LinkFunction::power(double kappa) {
  if (!std::isfinite(kappa) || kappa == 0.0)
    throw ValidationError("power link requires a finite kappa != 0");
  return LinkFunction(LinkKind::power, kappa);
}

std::string LinkFunction::name() const {
  switch (kind_) {
    case LinkKind::identity: return "identity";
    case LinkKind::logistic: return "logistic";
    case LinkKind::probit: return "probit";
    case LinkKind::cloglog: return "cloglog";
    case LinkKind::loglog: return "loglog";
    case LinkKind::log: return "log";
    case LinkKind::boxcox: return "boxcox";
    case LinkKind::power: return "power";
  }
  return "unknown";
}

bool LinkFunction::admissible(double eta) const {
  if (!std::isfinite(eta)) return false;
  switch (kind_) {
    case LinkKind::boxcox:
      return shape_ == 0.0 || 1.0 + shape_ * eta >= kLinkMargin;
    case LinkKind::power:
      return eta >= kLinkMargin;
    default:
      return true;
  }
}

void LinkFunction::require_admissible(double eta) const {
  if (!admissible(eta))
    throw DomainError("linear predictor eta = " + format_eta(eta) +
                      " is outside the admissible range of the " + name() + " link");
}

double LinkFunction::link(double mu) const {
  switch (kind_) {
    case LinkKind::identity: return mu;
    case LinkKind::logistic: return std::log(mu / (1.0 - mu));
    case LinkKind::probit: {
      if (!(mu > 0.0 && mu < 1.0)) throw DomainError("probit link requires 0 < mu < 1");
      // Newton iterations on Phi(z) = mu, falling back to bisection outside the bracket.
      double lo = -40.0;
      double hi = 40.0;
      double z = std::clamp(std::log(mu / (1.0 - mu)) / 1.7, lo, hi);
      for (int it = 0; it < 200; ++it) {
        const double r = normal_cdf(z) - mu;
        if (r == 0.0) break;
        (r > 0.0 ? hi : lo) = z;
        const double next = z - r / normal_pdf(z);
        const double cand = next > lo && next < hi ? next : 0.5 * (lo + hi);
        if (std::abs(cand - z) < 1e-15 * std::max(1.0, std::abs(z))) break;
        z = cand;
      }
      return z;
    }
    case LinkKind::cloglog: return std::log(-std::log1p(-mu));
    case LinkKind::loglog: return std::log(-std::log(mu));
    case LinkKind::log: return std::log(mu);
    case LinkKind::boxcox:
      return shape_ == 0.0 ? std::log(mu) : (std::pow(mu, shape_) - 1.0) / shape_;
    case LinkKind::power: return std::pow(mu, shape_);
  }
  return mu;
}

double LinkFunction::inverse(double eta) const {
  require_admissible(eta);
  switch (kind_) {
    case LinkKind::identity: return eta;
    case LinkKind::logistic:
      if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
      else {
        const double e = std::exp(eta);
        return e / (1.0 + e);
      }
    case LinkKind::probit: return normal_cdf(eta);
    case LinkKind::cloglog: return -std::expm1(-std::exp(eta));
    case LinkKind::loglog: return std::exp(-std::exp(eta));
    case LinkKind::log: return std::exp(eta);
    case LinkKind::boxcox:
      if (shape_ == 0.0) return std::exp(eta);
      return std::pow(1.0 + shape_ * eta, 1.0 / shape_);
    case LinkKind::power: return std::pow(eta, 1.0 / shape_);
  }
  return eta;
}

double LinkFunction::mean_derivative(double eta) const {
  require_admissible(eta);
  switch (kind_) {
    case LinkKind::identity: return 1.0;
    case LinkKind::logistic: {
      const double e = std::exp(-std::abs(eta));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case LinkKind::probit: return normal_pdf(eta);
    case LinkKind::cloglog: return std::exp(eta - std::exp(eta));
    case LinkKind::loglog: return -std::exp(eta - std::exp(eta));
    case LinkKind::log: return std::exp(eta);
    case LinkKind::boxcox:
      if (shape_ == 0.0) return std::exp(eta);
      return std::pow(1.0 + shape_ * eta, 1.0 / shape_ - 1.0);
    case LinkKind::power: return std::pow(eta, 1.0 / shape_ - 1.0) / shape_;
  }
  return 1.0;
}

int Term::degree() const {
  int d = 0;
  for (int e : exponents) d += e;
  return d;
}

std::string Term::name() const {
  std::string out;
  for (std::size_t j = 0; j < exponents.size(); ++j) {
    if (exponents[j] == 0) continue;
    if (!out.empty()) out += "*";
    out += "x" + std::to_string(j + 1);
    if (exponents[j] > 1) out += "^" + std::to_string(exponents[j]);
  }
  return out.empty() ? "1" : out;
}

ModelBasis::ModelBasis(std::size_t k, std::vector<Term> terms) : k_(k), terms_(std::move(terms)) {
  if (k_ == 0) throw ValidationError("model basis needs at least one variable");
  if (terms_.empty()) throw ValidationError("model basis needs at least one term");
  for (const auto& t : terms_) {
    if (t.exponents.size() != k_)
      throw ValidationError("term exponent vector length differs from k");
    for (int e : t.exponents)
      if (e < 0 || e > 2) throw ValidationError("term exponents must lie in {0, 1, 2}");
    if (t.degree() > 2) throw ValidationError("term total degree must be <= 2");
  }
}

ModelBasis ModelBasis::first_order(std::size_t k) {
  std::vector<Term> terms;
  terms.push_back({std::vector<int>(k, 0)});
  for (std::size_t j = 0; j < k; ++j) {
    Term t{std::vector<int>(k, 0)};
    t.exponents[j] = 1;
    terms.push_back(t);
  }
  return ModelBasis(k, std::move(terms));
}

ModelBasis ModelBasis::second_order(std::size_t k) {
  ModelBasis basis = first_order(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      Term t{std::vector<int>(k, 0)};
      t.exponents[i] = 1;
      t.exponents[j] = 1;
      basis.terms_.push_back(t);
    }
  for (std::size_t j = 0; j < k; ++j) {
    Term t{std::vector<int>(k, 0)};
    t.exponents[j] = 2;
    basis.terms_.push_back(t);
  }
  return basis;
}

bool ModelBasis::has_intercept() const { return !terms_.empty() && terms_.front().degree() == 0; }

bool ModelBasis::is_first_order() const {
  if (terms_.size() != k_ + 1 || !has_intercept()) return false;
  for (std::size_t j = 0; j < k_; ++j) {
    const auto& e = terms_[j + 1].exponents;
    for (std::size_t i = 0; i < k_; ++i)
      if (e[i] != (i == j ? 1 : 0)) return false;
  }
  return true;
}

Vector ModelBasis::eval(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != k_)
    throw ValidationError("point has " + std::to_string(x.size()) + " coordinates, basis expects " +
                          std::to_string(k_));
  Vector f(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    double v = 1.0;
    for (std::size_t j = 0; j < k_; ++j)
      for (int e = 0; e < terms_[i].exponents[j]; ++e) v *= x[j];
    f[i] = v;
  }
  return f;
}

Matrix ModelBasis::jacobian(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != k_) throw ValidationError("point dimension mismatch");
  Matrix jac = Matrix::Zero(terms_.size(), k_);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& e = terms_[i].exponents;
    for (std::size_t d = 0; d < k_; ++d) {
      if (e[d] == 0) continue;
      double v = e[d] * (e[d] == 2 ? x[d] : 1.0);
      for (std::size_t j = 0; j < k_; ++j)
        if (j != d)
          for (int r = 0; r < e[j]; ++r) v *= x[j];
      jac(i, d) = v;
    }
  }
  return jac;
}

bool link_admissible_for(FamilyKind family, LinkKind link) {
  switch (family) {
    case FamilyKind::normal: return link == LinkKind::identity;
    case FamilyKind::binomial:
      return link == LinkKind::logistic || link == LinkKind::probit ||
             link == LinkKind::cloglog || link == LinkKind::loglog;
    case FamilyKind::poisson: return link == LinkKind::log;
    case FamilyKind::gamma:
      return link == LinkKind::boxcox || link == LinkKind::power || link == LinkKind::log;
  }
  return false;
}

void ModelSpec::validate() const {
  if (!link_admissible_for(family.kind, link.kind()))
    throw ValidationError("link '" + link.name() + "' is not admissible for the " +
                          family.name() + " family");
  if (!(family.dispersion > 0.0)) throw ValidationError("dispersion must be positive");
  if (basis.p() == 0) throw ValidationError("model basis is empty");
  if (region.dimension() != basis.k())
    throw ValidationError("design region dimension differs from the number of variables");
  if (region.unbounded_axis() && !basis.is_first_order())
    throw ValidationError("an unbounded axis is only supported with a first-order basis");
}

ModelSpec make_model(FamilyKind family, LinkFunction link, ModelBasis basis, DesignRegion region) {
  ModelSpec model{Family{family, 1.0}, link, std::move(basis), std::move(region)};
  model.validate();
  return model;
}

Vector eval_basis(const ModelBasis& basis, const Point& x) { return basis.eval(x); }

double inverse_link(const LinkFunction& link, double eta) { return link.inverse(eta); }

double glm_weight_eta(const Family& family, const LinkFunction& link, double eta) {
  link.require_admissible(eta);
  switch (link.kind()) {
    case LinkKind::identity: return 1.0;
    case LinkKind::logistic: {
      const double e = std::exp(-std::abs(eta));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case LinkKind::probit:
      return std::exp(-eta * eta - kLogTwoPi - log_normal_cdf(eta) - log_normal_cdf(-eta));
    case LinkKind::cloglog:
    case LinkKind::loglog: {
      // Both links give u = exp(2 eta - e^eta) / (1 - exp(-e^eta)).
      const double t = std::exp(eta);
      if (!std::isfinite(t)) return 0.0;
      return std::exp(2.0 * eta - t - log_one_minus_exp_neg(t));
    }
    case LinkKind::log:
      if (family.kind == FamilyKind::gamma) return 1.0;
      return std::exp(eta);
    case LinkKind::boxcox: {
      if (link.shape() == 0.0) return 1.0;
      const double s = 1.0 + link.shape() * eta;
      return 1.0 / (s * s);
    }
    case LinkKind::power: {
      const double k = link.shape();
      return 1.0 / (k * k * eta * eta);
    }
  }
  return 1.0;
}

double glm_weight(const ModelSpec& model, const ParameterVector& theta, const Point& x) {
  const Vector f = model.basis.eval(x);
  if (theta.size() != f.size())
    throw ValidationError("parameter vector has length " + std::to_string(theta.size()) +
                          ", basis has " + std::to_string(f.size()) + " terms");
  return glm_weight_eta(model.family, model.link, theta.dot(f));
}

Vector induced_point(const ModelSpec& model, const ParameterVector& theta, const Point& x) {
  if (!model.basis.is_first_order())
    throw UnsupportedError("induced design points are defined for first-order bases only");
  const double root_u = std::sqrt(glm_weight(model, theta, x));
  Vector z(x.size() + 1);
  z[0] = root_u;
  z.tail(x.size()) = root_u * x;
  return z;
}

}  // namespace optdes
