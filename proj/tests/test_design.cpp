#include "optdes/design.hpp"
#include "optdes/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace optdes;

namespace {

Point pt(double a, double b) {
  Point x(2);
  x << a, b;
  return x;
}

ModelSpec logistic2() {
  return make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(2),
                    DesignRegion::cube(2, -1, 1));
}

ParameterVector theta3(double a, double b, double c) {
  ParameterVector t(3);
  t << a, b, c;
  return t;
}

}  // namespace

TEST_CASE("information matrix equals the weighted sum of u f f'") {
  const ModelSpec m = logistic2();
  const ParameterVector th = theta3(0.5, 1.0, -2.0);
  const ContinuousDesign d{{pt(-1, -1), pt(1, 0.2), pt(0.3, 1)}, {0.2, 0.5, 0.3}};
  Matrix oracle = Matrix::Zero(3, 3);
  for (std::size_t i = 0; i < d.size(); ++i) {
    Vector f(3);
    f << 1.0, d.points[i][0], d.points[i][1];
    const double eta = th.dot(f);
    const double mu = 1.0 / (1.0 + std::exp(-eta));
    oracle += d.weights[i] * mu * (1 - mu) * f * f.transpose();
  }
  CHECK((information_matrix(d, m, th) - oracle).norm() < 1e-14);
}

TEST_CASE("trace identity: sum of w u f'M^-1 f equals p") {
  const ModelSpec m = logistic2();
  for (const auto& th : {theta3(0, 1, 1), theta3(2, 2, 2), theta3(-1, 0.3, 4)}) {
    const ContinuousDesign d{{pt(-1, -1), pt(1, -1), pt(-1, 1), pt(1, 1), pt(0.2, -0.4)},
                             {0.1, 0.3, 0.2, 0.25, 0.15}};
    const LocalSensitivity s(d, m, th);
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) total += d.weights[i] * s.variance_term(d.points[i]);
    CHECK(total == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("sensitivity of a normal-theory factorial is zero at the corners") {
  const ModelSpec m = make_model(FamilyKind::normal, LinkFunction::identity(), ModelBasis::first_order(2),
                                 DesignRegion::cube(2, -1, 1));
  const ContinuousDesign d = equal_weights({pt(-1, -1), pt(1, -1), pt(-1, 1), pt(1, 1)});
  const ParameterVector th = theta3(0, 0, 0);
  for (const auto& x : d.points) CHECK(sensitivity(x, d, m, th) == doctest::Approx(0.0).scale(1.0));
  CHECK(sensitivity(pt(0, 0), d, m, th) == doctest::Approx(2.0));
}

TEST_CASE("D-efficiency of a design against itself is one and is scale free") {
  const ModelSpec m = logistic2();
  const ParameterVector th = theta3(0, 1, 1);
  const ContinuousDesign a = equal_weights({pt(-1, -1), pt(1, -1), pt(-1, 1), pt(1, 1)});
  const ContinuousDesign b = equal_weights({pt(-1, -1), pt(1, -1), pt(-1, 1)});
  CHECK(d_efficiency(a, a, m, th) == doctest::Approx(1.0));
  const double e = d_efficiency(b, a, m, th);
  const double oracle = std::pow(information_matrix(b, m, th).determinant() /
                                     information_matrix(a, m, th).determinant(),
                                 1.0 / 3.0);
  CHECK(e == doctest::Approx(oracle));
  CHECK(d_efficiency_from_objectives(1.0, 1.0 - 3 * std::log(2.0), 3) == doctest::Approx(0.5));
}

TEST_CASE("singular designs have infinite objective and zero efficiency") {
  const ModelSpec m = logistic2();
  const ParameterVector th = theta3(0, 1, 1);
  const ContinuousDesign two = equal_weights({pt(-1, -1), pt(1, 1)});
  CHECK(std::isinf(d_objective(information_matrix(two, m, th))));
  const ContinuousDesign ok = equal_weights({pt(-1, -1), pt(1, -1), pt(-1, 1)});
  CHECK(d_efficiency(two, ok, m, th) == 0.0);
  CHECK_THROWS_AS(d_efficiency(ok, two, m, th), SingularMatrixError);
  CHECK_FALSE(log_determinant(Matrix::Zero(2, 2)).has_value());
}

TEST_CASE("design validation names the violated invariant") {
  const DesignRegion r = DesignRegion::cube(2, -1, 1);
  const ContinuousDesign bad_sum{{pt(0, 0), pt(1, 1)}, {0.5, 0.4}};
  CHECK_THROWS_WITH_AS(bad_sum.validate(r), doctest::Contains("sum to 1"), ValidationError);
  const ContinuousDesign outside{{pt(0, 0), pt(1.5, 1)}, {0.5, 0.5}};
  CHECK_THROWS_WITH_AS(outside.validate(r), doctest::Contains("outside"), ValidationError);
  const ContinuousDesign negative{{pt(0, 0), pt(1, 1)}, {1.5, -0.5}};
  CHECK_THROWS_AS(negative.validate(r), ValidationError);
  CHECK_THROWS_AS(ContinuousDesign{}.validate(r), ValidationError);
}

TEST_CASE("merge_support combines near-duplicate points and drops tiny weights") {
  const DesignRegion r = DesignRegion::cube(2, -1, 1);
  const ContinuousDesign d{{pt(0, 0), pt(0.0005, 0), pt(1, 1), pt(-1, 1)}, {0.3, 0.3, 0.39995, 0.00005}};
  const ContinuousDesign m = merge_support(d, r);
  REQUIRE(m.size() == 2);
  double total = 0.0;
  for (double w : m.weights) total += w;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("Caratheodory reduction preserves the information matrix") {
  const ModelSpec m = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(1),
                                 DesignRegion::cube(1, -3, 3));
  ParameterVector th(2);
  th << 0.2, 1.0;
  ContinuousDesign d;
  for (int i = 0; i < 9; ++i) {
    Point x(1);
    x << -3.0 + 0.75 * i;
    d.points.push_back(x);
    d.weights.push_back(1.0 / 9.0);
  }
  const ContinuousDesign red = caratheodory_reduce(d, m, th);
  CHECK(red.size() <= caratheodory_bound(2));
  CHECK((information_matrix(red, m, th) - information_matrix(d, m, th)).norm() < 1e-10);
}

TEST_CASE("exact designs normalise by the number of trials") {
  const ModelSpec m = logistic2();
  const ParameterVector th = theta3(0, 1, 1);
  const ExactDesign e{{pt(-1, -1), pt(1, -1), pt(-1, 1)}, {2, 1, 1}};
  const ContinuousDesign c{{pt(-1, -1), pt(1, -1), pt(-1, 1)}, {0.5, 0.25, 0.25}};
  CHECK(e.n() == 4);
  CHECK((information_matrix(e, m, th) - information_matrix(c, m, th)).norm() < 1e-14);
}
