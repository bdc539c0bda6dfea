#pragma once

#include "optdes/region.hpp"
#include "optdes/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace optdes {

enum class FamilyKind { normal, binomial, poisson, gamma };

// Response distribution. The dispersion is carried along for completeness; it
// scales M by a constant and so never changes a D-optimal design.
struct Family {
  FamilyKind kind = FamilyKind::normal;
  double dispersion = 1.0;

  // V(mu) for var(y) = dispersion * V(mu).
  double variance(double mu) const;
  std::string name() const;
};

enum class LinkKind { identity, logistic, probit, cloglog, loglog, log, boxcox, power };

// Link g(mu) = eta together with its inverse h and dh/deta.
//
// The log-log link follows eta = log(-log mu), so h is decreasing. The
// Box-Cox link with lambda = 0 is the log link; power links need kappa != 0.
class LinkFunction {
 public:
  LinkFunction() = default;

  static LinkFunction identity() { return LinkFunction(LinkKind::identity, 0.0); }
  static LinkFunction logistic() { return LinkFunction(LinkKind::logistic, 0.0); }
  static LinkFunction probit() { return LinkFunction(LinkKind::probit, 0.0); }
  static LinkFunction cloglog() { return LinkFunction(LinkKind::cloglog, 0.0); }
  static LinkFunction loglog() { return LinkFunction(LinkKind::loglog, 0.0); }
  static LinkFunction log() { return LinkFunction(LinkKind::log, 0.0); }
  static LinkFunction boxcox(double lambda);
  static LinkFunction power(double kappa);

  LinkKind kind() const { return kind_; }
  // lambda for Box-Cox, kappa for power, 0 otherwise.
  double shape() const { return shape_; }
  std::string name() const;

  bool admissible(double eta) const;
  // Throws DomainError naming the link if eta is not admissible.
  void require_admissible(double eta) const;

  double link(double mu) const;
  double inverse(double eta) const;
  double mean_derivative(double eta) const;

  bool operator==(const LinkFunction&) const = default;

 private:
  LinkFunction(LinkKind kind, double shape) : kind_(kind), shape_(shape) {}

  LinkKind kind_ = LinkKind::identity;
  double shape_ = 0.0;
};

// Lower admissibility margin for 1 + lambda*eta (Box-Cox) and eta (power).
inline constexpr double kLinkMargin = 1e-12;

// A monomial prod_j x_j^e_j with every e_j <= 2 and total degree <= 2.
struct Term {
  std::vector<int> exponents;

  int degree() const;
  std::string name() const;
  bool operator==(const Term&) const = default;
};

// Ordered list of monomial terms f(x).
class ModelBasis {
 public:
  ModelBasis() = default;
  ModelBasis(std::size_t k, std::vector<Term> terms);

  // (1, x_1, ..., x_k)
  static ModelBasis first_order(std::size_t k);
  // (1, linears, interactions in lexicographic pair order, squares)
  static ModelBasis second_order(std::size_t k);

  std::size_t k() const { return k_; }
  std::size_t p() const { return terms_.size(); }
  const std::vector<Term>& terms() const { return terms_; }
  bool has_intercept() const;
  bool is_first_order() const;

  Vector eval(const Point& x) const;
  // d f / d x as a p x k matrix.
  Matrix jacobian(const Point& x) const;

  bool operator==(const ModelBasis&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<Term> terms_;
};

struct ModelSpec {
  Family family;
  LinkFunction link;
  ModelBasis basis;
  DesignRegion region;

  std::size_t k() const { return basis.k(); }
  std::size_t p() const { return basis.p(); }

  // Throws ValidationError for an inadmissible family/link pair or a region of
  // the wrong dimension.
  void validate() const;
};

bool link_admissible_for(FamilyKind family, LinkKind link);

Vector eval_basis(const ModelBasis& basis, const Point& x);
double inverse_link(const LinkFunction& link, double eta);

// u = V(mu)^-1 (dmu/deta)^2 as a function of the linear predictor.
double glm_weight_eta(const Family& family, const LinkFunction& link, double eta);
double glm_weight(const ModelSpec& model, const ParameterVector& theta, const Point& x);

// (sqrt u, sqrt u x_1, ..., sqrt u x_k); first-order bases only.
Vector induced_point(const ModelSpec& model, const ParameterVector& theta, const Point& x);

// Standard normal helpers shared with the probit link.
double normal_pdf(double z);
double normal_cdf(double z);
double log_normal_cdf(double z);

ModelSpec make_model(FamilyKind family, LinkFunction link, ModelBasis basis, DesignRegion region);

}  // namespace optdes
