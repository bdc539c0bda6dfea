#include "optdes/errors.hpp"
#include "optdes/glm.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace optdes;

namespace {

struct Case {
  FamilyKind family;
  LinkFunction link;
  std::vector<double> etas;
};

std::vector<Case> cases() {
  const std::vector<double> wide{-4.0, -1.5, -0.3, 0.0, 0.7, 2.0, 3.5};
  const std::vector<double> positive{0.2, 0.5, 1.0, 2.5, 6.0};
  return {
      {FamilyKind::normal, LinkFunction::identity(), wide},
      {FamilyKind::binomial, LinkFunction::logistic(), wide},
      {FamilyKind::binomial, LinkFunction::probit(), wide},
      {FamilyKind::binomial, LinkFunction::cloglog(), wide},
      {FamilyKind::binomial, LinkFunction::loglog(), wide},
      {FamilyKind::poisson, LinkFunction::log(), wide},
      {FamilyKind::gamma, LinkFunction::log(), wide},
      {FamilyKind::gamma, LinkFunction::power(0.5), positive},
      {FamilyKind::gamma, LinkFunction::power(1.0), positive},
      {FamilyKind::gamma, LinkFunction::power(-1.0), positive},
      {FamilyKind::gamma, LinkFunction::boxcox(0.5), positive},
      {FamilyKind::gamma, LinkFunction::boxcox(0.0), wide},
  };
}

}  // namespace

TEST_CASE("mean derivative matches central differences of the inverse link") {
  for (const auto& c : cases()) {
    for (double eta : c.etas) {
      const double h = 1e-5;
      const double fd = (c.link.inverse(eta + h) - c.link.inverse(eta - h)) / (2 * h);
      const double an = c.link.mean_derivative(eta);
      CAPTURE(c.link.name());
      CAPTURE(eta);
      CHECK(an == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("link and inverse link are mutual inverses") {
  for (const auto& c : cases()) {
    for (double eta : c.etas) {
      CAPTURE(c.link.name());
      const double mu = c.link.inverse(eta);
      // Rounding mu by one ulp moves eta by eps mu / |h'(eta)|.
      const double conditioning = 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(mu), 1.0 - mu) /
                                  std::abs(c.link.mean_derivative(eta));
      CHECK(std::abs(c.link.link(mu) - eta) <= 1e-9 * std::max(1.0, std::abs(eta)) + conditioning);
    }
  }
}

TEST_CASE("GLM weight equals (dmu/deta)^2 / V(mu) from finite differences") {
  for (const auto& c : cases()) {
    const Family fam{c.family, 1.0};
    for (double eta : c.etas) {
      const double h = 1e-5;
      const double mu = c.link.inverse(eta);
      const double d = (c.link.inverse(eta + h) - c.link.inverse(eta - h)) / (2 * h);
      double v = 1.0;
      if (c.family == FamilyKind::binomial) v = mu * (1 - mu);
      if (c.family == FamilyKind::poisson) v = mu;
      if (c.family == FamilyKind::gamma) v = mu * mu;
      CAPTURE(c.link.name());
      CAPTURE(eta);
      CHECK(glm_weight_eta(fam, c.link, eta) == doctest::Approx(d * d / v).epsilon(1e-6));
    }
  }
}

TEST_CASE("logistic weight is a quarter at zero and symmetric") {
  const Family fam{FamilyKind::binomial, 1.0};
  CHECK(glm_weight_eta(fam, LinkFunction::logistic(), 0.0) == doctest::Approx(0.25));
  for (double eta : {0.5, 1.0, 3.0, 20.0})
    CHECK(glm_weight_eta(fam, LinkFunction::logistic(), eta) ==
          doctest::Approx(glm_weight_eta(fam, LinkFunction::logistic(), -eta)));
}

TEST_CASE("binomial weights stay finite and non-negative far in the tails") {
  const Family fam{FamilyKind::binomial, 1.0};
  for (const auto& link : {LinkFunction::logistic(), LinkFunction::probit(), LinkFunction::cloglog(),
                           LinkFunction::loglog()}) {
    for (double eta : {-40.0, -15.0, 15.0, 40.0}) {
      const double u = glm_weight_eta(fam, link, eta);
      CAPTURE(link.name());
      CAPTURE(eta);
      CHECK(std::isfinite(u));
      CHECK(u >= 0.0);
      CHECK(u < 1e-3);
    }
  }
}

TEST_CASE("power and Box-Cox links reject inadmissible linear predictors") {
  const Family fam{FamilyKind::gamma, 1.0};
  CHECK_THROWS_AS(glm_weight_eta(fam, LinkFunction::power(0.5), -0.1), DomainError);
  CHECK_THROWS_AS(glm_weight_eta(fam, LinkFunction::boxcox(1.0), -2.0), DomainError);
  CHECK_THROWS_AS(LinkFunction::power(0.0), ValidationError);
}

TEST_CASE("gamma power-link weight does not depend on kappa up to scale") {
  const Family fam{FamilyKind::gamma, 1.0};
  for (double eta : {0.5, 1.0, 2.0}) {
    const double r = glm_weight_eta(fam, LinkFunction::power(0.5), eta) / glm_weight_eta(fam, LinkFunction::power(1.0), eta);
    CHECK(r == doctest::Approx(4.0));
  }
}

TEST_CASE("second-order basis orders intercept, linears, interactions, squares") {
  const ModelBasis b = ModelBasis::second_order(3);
  REQUIRE(b.p() == 10);
  Point x(3);
  x << 2.0, 3.0, 5.0;
  const Vector f = b.eval(x);
  const std::vector<double> expected{1, 2, 3, 5, 6, 10, 15, 4, 9, 25};
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(f[Eigen::Index(i)] == expected[i]);
}

TEST_CASE("basis Jacobian matches finite differences") {
  const ModelBasis b = ModelBasis::second_order(2);
  Point x(2);
  x << 0.3, -0.7;
  const Matrix j = b.jacobian(x);
  for (Eigen::Index c = 0; c < 2; ++c) {
    Point xp = x, xm = x;
    xp[c] += 1e-6;
    xm[c] -= 1e-6;
    const Vector fd = (b.eval(xp) - b.eval(xm)) / 2e-6;
    for (Eigen::Index r = 0; r < fd.size(); ++r) CHECK(j(r, c) == doctest::Approx(fd[r]).epsilon(1e-7));
  }
}

TEST_CASE("inadmissible family and link pairs are rejected") {
  CHECK_THROWS_AS(make_model(FamilyKind::poisson, LinkFunction::logistic(), ModelBasis::first_order(1),
                             DesignRegion::cube(1, -1, 1)),
                  ValidationError);
  CHECK_THROWS_AS(make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(2),
                             DesignRegion::cube(1, -1, 1)),
                  ValidationError);
  CHECK_THROWS_AS(make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::second_order(2),
                             DesignRegion({{-1, 1}, {}}, 1)),
                  ValidationError);
}

TEST_CASE("induced point scales the first-order vector by the root weight") {
  const ModelSpec m = make_model(FamilyKind::poisson, LinkFunction::log(), ModelBasis::first_order(2),
                                 DesignRegion::cube(2, -1, 1));
  ParameterVector th(3);
  th << 0.1, 0.5, -0.2;
  Point x(2);
  x << 0.4, 0.9;
  const Vector z = induced_point(m, th, x);
  const double ru = std::exp(0.5 * (0.1 + 0.5 * 0.4 - 0.2 * 0.9));
  CHECK(z[0] == doctest::Approx(ru));
  CHECK(z[1] == doctest::Approx(ru * 0.4));
  CHECK(z[2] == doctest::Approx(ru * 0.9));
}

TEST_CASE("regions reject empty intervals and clamp points") {
  CHECK_THROWS_AS(DesignRegion({{1.0, 1.0}}), ValidationError);
  const DesignRegion r = DesignRegion::cube(2, -1, 1);
  Point x(2);
  x << 1.5, -0.2;
  CHECK_FALSE(r.contains(x));
  CHECK(r.contains(r.clamp(x)));
}
