#include "optdes/closed_form.hpp"
#include "optdes/equivalence.hpp"
#include "optdes/errors.hpp"
#include "optdes/optimize.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace optdes;

namespace {

// Root of g on [a, b] by bisection; g(a) and g(b) must differ in sign.
template <class F>
double bisect(F g, double a, double b) {
  double ga = g(a);
  for (int i = 0; i < 200; ++i) {
    const double c = 0.5 * (a + b);
    const double gc = g(c);
    if ((gc < 0) == (ga < 0)) {
      a = c;
      ga = gc;
    } else {
      b = c;
    }
  }
  return 0.5 * (a + b);
}

double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Point pt(double a, double b) {
  Point x(2);
  x << a, b;
  return x;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("canonical logistic constant solves 1/c = 2 h(c) - 1") {
  const double oracle = bisect([](double c) { return 1.0 / c - (2.0 * expit(c) - 1.0); }, 0.5, 5.0);
  const CanonicalConstant c = canonical_logistic_constant();
  CHECK(c.c_star == doctest::Approx(oracle).epsilon(1e-8));
  CHECK(c.c_star == doctest::Approx(1.5434).epsilon(1e-4));
  CHECK(std::abs(c.residual) < 1e-8);
}

TEST_CASE("one-variable logistic design maps the canonical points through the linear predictor") {
  const double c = canonical_logistic_constant().c_star;
  const DesignRegion region = DesignRegion::cube(1, -5, 5);
  const TheoremDesign d = logistic_1d_design(1.0, -2.0, region);
  REQUIRE(d.design.size() == 2);
  CHECK_FALSE(d.fallback);
  CHECK(d.design.points[0][0] == doctest::Approx((1.0 - c) / 2.0));
  CHECK(d.design.points[1][0] == doctest::Approx((1.0 + c) / 2.0));
  CHECK(d.design.points[0][0] < d.design.points[1][0]);
  CHECK(d.design.weights[0] == 0.5);
  const ModelSpec m = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(1), region);
  ParameterVector th(2);
  th << 1.0, -2.0;
  CHECK(equivalence_check(d.design, m, ParameterSample::single(th)).is_optimal);
  CHECK_THROWS_AS(logistic_1d_design(0.0, 0.0, region), PreconditionError);
}

TEST_CASE("one-variable logistic design falls back to the numerical search when the points leave the region") {
  const TheoremDesign d = logistic_1d_design(0.0, 1.0, DesignRegion::cube(1, -0.5, 0.5));
  CHECK(d.fallback);
  REQUIRE(d.design.size() == 2);
  CHECK(d.design.points[0][0] == doctest::Approx(-0.5).epsilon(1e-4));
  CHECK(d.design.points[1][0] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("unbounded-axis logistic construction solves the stationarity condition and is optimal") {
  const DesignRegion region({{-1, 1}, {-kInf, kInf}}, 1);
  ParameterVector th(3);
  th << 0.5, 1.0, 2.0;
  const TheoremDesign d = yang_zhang_design(th, region);
  const double oracle = bisect([](double e) { return 2.0 / e - 3.0 * std::tanh(e / 2.0); }, 0.5, 5.0);
  CHECK(d.quantities.at("eta_star") == doctest::Approx(oracle).epsilon(1e-8));
  REQUIRE(d.design.size() == 4);
  REQUIRE(d.a_star.size() == 2);
  CHECK(d.a_star[0] == doctest::Approx(std::abs(oracle - (0.5 - 1.0)) / 2.0));
  CHECK(d.a_star[1] == doctest::Approx(std::abs(oracle - (0.5 + 1.0)) / 2.0));
  for (std::size_t i = 0; i < d.design.size(); ++i) {
    const double eta = 0.5 + d.design.points[i][0] + 2.0 * d.design.points[i][1];
    CHECK(std::abs(eta) == doctest::Approx(oracle));
    CHECK(d.design.weights[i] == 0.25);
  }
  const ModelSpec m = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(2), region);
  CHECK(equivalence_check(d.design, m, ParameterSample::single(th)).is_optimal);
  CHECK_THROWS_AS(yang_zhang_design(th, DesignRegion::cube(2, -1, 1)), PreconditionError);
  th[2] = 0.0;
  CHECK_THROWS_AS(yang_zhang_design(th, region), PreconditionError);
}

TEST_CASE("gamma one-factor-at-a-time design holds under its condition and is optimal") {
  ParameterVector th(3);
  th << 0.5, 1.0, 2.0;
  const GammaOfaatOutcome out = gamma_ofaat_design(th, LinkFunction::power(0.5));
  REQUIRE(out.condition_holds);
  REQUIRE(out.design);
  const ContinuousDesign& d = out.design->design;
  REQUIRE(d.size() == 3);
  CHECK(d.points[0] == pt(0, 0));
  for (double w : d.weights) CHECK(w == doctest::Approx(1.0 / 3.0));
  const ModelSpec m =
      make_model(FamilyKind::gamma, LinkFunction::power(0.5), ModelBasis::first_order(2), DesignRegion::cube(2, 0, 1));
  CHECK(equivalence_check(d, m, ParameterSample::single(th)).is_optimal);
}

TEST_CASE("gamma one-factor-at-a-time condition failures and preconditions") {
  ParameterVector th(3);
  th << 2.0, 1.0, 1.0;
  const GammaOfaatOutcome out = gamma_ofaat_design(th, LinkFunction::power(1.0));
  CHECK_FALSE(out.condition_holds);
  CHECK_FALSE(out.design);
  CHECK(out.report.find("numerical search") != std::string::npos);
  const GammaOfaatOutcome log_out = gamma_ofaat_design(th, LinkFunction::log());
  CHECK_FALSE(log_out.condition_holds);
  CHECK(log_out.report.find("2^k factorial") != std::string::npos);
  th[1] = -1.0;
  CHECK_THROWS_AS(gamma_ofaat_design(th, LinkFunction::power(1.0)), PreconditionError);
  CHECK_THROWS_AS(gamma_ofaat_design(ParameterVector::Zero(3), LinkFunction::power(1.0)), PreconditionError);
  CHECK_THROWS_AS(gamma_ofaat_design(ParameterVector::Ones(3), LinkFunction::probit()), UnsupportedError);
}

TEST_CASE("Poisson minimal-support design steps 2/theta_i in from the best corner and is optimal") {
  const DesignRegion region = DesignRegion::cube(2, 0, 1);
  ParameterVector th(3);
  th << 0.0, -3.0, 4.0;
  const TheoremDesign d = russell_poisson_design(th, region);
  REQUIRE(d.design.size() == 3);
  CHECK(d.design.points[0][0] == doctest::Approx(2.0 / 3.0));
  CHECK(d.design.points[0][1] == 1.0);
  CHECK(d.design.points[1][0] == 0.0);
  CHECK(d.design.points[1][1] == doctest::Approx(0.5));
  CHECK(d.design.points[2] == pt(0, 1));
  const ModelSpec m = make_model(FamilyKind::poisson, LinkFunction::log(), ModelBasis::first_order(2), region);
  CHECK(equivalence_check(d.design, m, ParameterSample::single(th)).is_optimal);
  th[1] = 1.5;
  CHECK_THROWS_AS(russell_poisson_design(th, region), PreconditionError);
}

TEST_CASE("Bayesian minimal-support Poisson design uses the prior mean") {
  const Prior p = Prior::uniform_box({{0, 0}, {2, 4}, {2, 6}});
  const TheoremDesign d = bayes_minimal_poisson_design(p, DesignRegion::cube(2, 0, 1));
  CHECK(d.quantities.at("theta_star_1") == 3.0);
  CHECK(d.quantities.at("theta_star_2") == 4.0);
  CHECK(d.design.points[0][0] == doctest::Approx(1.0 / 3.0));
  CHECK(d.design.points[1][1] == doctest::Approx(0.5));
}
