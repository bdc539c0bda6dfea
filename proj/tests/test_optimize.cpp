#include "optdes/exact.hpp"
#include "optdes/nelder_mead.hpp"
#include "optdes/optimize.hpp"
#include "optdes/parallel.hpp"

#include <doctest.h>

#include <cmath>

using namespace optdes;

namespace {

Point pt(double a, double b) {
  Point x(2);
  x << a, b;
  return x;
}

Point p1(double a) {
  Point x(1);
  x << a;
  return x;
}

double weight_at(const ContinuousDesign& d, const Point& x, double tol = 1e-3) {
  double w = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if ((d.points[i] - x).lpNorm<Eigen::Infinity>() <= tol) w += d.weights[i];
  return w;
}

}  // namespace

TEST_CASE("Nelder-Mead and BFGS minimise the Rosenbrock function") {
  const auto f = [](const Vector& x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); };
  Vector x0(2);
  x0 << -1.2, 1.0;
  NelderMeadOptions o;
  o.max_evals = 5000;
  const MinimizeResult nm = nelder_mead(f, x0, o);
  CHECK(nm.value < 1e-8);
  const MinimizeResult q = bfgs(f, nm.x);
  CHECK(q.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(q.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("one-variable logistic optimum is symmetric at +-1.5434 with equal weights") {
  const ModelSpec m = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(1),
                                 DesignRegion::cube(1, -6, 6));
  ParameterVector th(2);
  th << 0, 1;
  const ContinuousResult r = optimize_continuous(m, ParameterSample::single(th));
  REQUIRE(r.design.size() == 2);
  CHECK(r.design.points[0][0] == doctest::Approx(-1.5434).epsilon(1e-3));
  CHECK(r.design.points[1][0] == doctest::Approx(1.5434).epsilon(1e-3));
  CHECK(r.design.weights[0] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(r.report.is_optimal);
}

TEST_CASE("normal-theory quadratic regression gives equal weight at -1, 0, 1") {
  const ModelSpec m = make_model(FamilyKind::normal, LinkFunction::identity(), ModelBasis::second_order(1),
                                 DesignRegion::cube(1, -1, 1));
  const ContinuousResult r = optimize_continuous(m, ParameterSample::single(ParameterVector::Zero(3)));
  for (double v : {-1.0, 0.0, 1.0}) CHECK(weight_at(r.design, p1(v)) == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("small effects: logistic designs approach the equally weighted factorial") {
  const ModelSpec m = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(2),
                                 DesignRegion::cube(2, -1, 1));
  double previous = 1.0;
  for (double eps : {0.5, 0.1, 0.01}) {
    ParameterVector th(3);
    th << 0, eps, eps;
    const ContinuousResult r = optimize_continuous(m, ParameterSample::single(th));
    double worst = 0.0;
    for (const auto& c : {pt(-1, -1), pt(1, -1), pt(-1, 1), pt(1, 1)})
      worst = std::max(worst, std::abs(weight_at(r.design, c) - 0.25));
    CHECK(worst <= previous + 1e-9);
    previous = worst;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("continuous optimisation is reproducible and independent of the thread count") {
  const ModelSpec m = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(2),
                                 DesignRegion::cube(2, -1, 1));
  ParameterVector th(3);
  th << 2, 2, 2;
  set_thread_count(1);
  const ContinuousResult a = optimize_continuous(m, ParameterSample::single(th));
  set_thread_count(4);
  const ContinuousResult b = optimize_continuous(m, ParameterSample::single(th));
  set_thread_count(0);
  REQUIRE(a.design.size() == b.design.size());
  CHECK(a.objective == b.objective);
  for (std::size_t i = 0; i < a.design.size(); ++i) {
    CHECK(a.design.points[i] == b.design.points[i]);
    CHECK(a.design.weights[i] == b.design.weights[i]);
  }
  CHECK(a.report.min_psi == b.report.min_psi);
}

TEST_CASE("multistart robustness: another seed reaches the same objective") {
  const ModelSpec m = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(2),
                                 DesignRegion::cube(2, -1, 1));
  ParameterVector th(3);
  th << 2, 2, 2;
  ContinuousOptOptions o;
  const double a = optimize_continuous(m, ParameterSample::single(th), o).objective;
  o.seed = 99;
  const double b = optimize_continuous(m, ParameterSample::single(th), o).objective;
  CHECK(std::abs(a - b) < 1e-3);
}

TEST_CASE("Wynn-Fedorov point addition never increases the objective") {
  const ModelSpec m = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(1),
                                 DesignRegion::cube(1, -5, 5));
  ParameterVector th(2);
  th << 0, 1;
  WynnOptions o;
  o.max_iters = 300;
  const WynnResult r = wynn_fedorov(m, th, o);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1] + 1e-12);
  CHECK(r.min_psi > -0.2);
}

TEST_CASE("grid exchange finds the 2^2 factorial for a first-order normal model") {
  const ModelSpec m = make_model(FamilyKind::normal, LinkFunction::identity(), ModelBasis::first_order(2),
                                 DesignRegion::cube(2, -1, 1));
  ExactOptOptions o;
  o.n = 4;
  o.method = ExactMethod::grid_exchange;
  o.grid_step = 0.1;
  const ExactResult r = optimize_exact(m, ParameterSample::single(ParameterVector::Zero(3)), o);
  REQUIRE(r.design.size() == 4);
  for (const auto& x : r.design.points) CHECK(x.cwiseAbs().minCoeff() == doctest::Approx(1.0));
  CHECK(r.objective == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("annealing is deterministic per seed and respects the region") {
  const ModelSpec m = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(2),
                                 DesignRegion::cube(2, -1, 1));
  const Prior p = Prior::uniform_box({{-0.5, 0.5}, {1, 3}, {1, 3}});
  ExactOptOptions o;
  o.n = 6;
  o.multistarts = 2;
  o.anneal.steps = 3000;
  o.sample.n_draws = 5;
  const ExactResult a = optimize_exact(m, p, o);
  const ExactResult b = optimize_exact(m, p, o);
  CHECK(a.objective == b.objective);
  CHECK(a.design.n() == 6);
  CHECK(a.design.points == b.design.points);
  for (const auto& x : a.design.points) CHECK(m.region.contains(x));
}

TEST_CASE("collect_trials groups replicates in lexicographic order") {
  const ExactDesign d = collect_trials({pt(1, 0), pt(-1, 0), pt(1, 0), pt(-1, -1)});
  REQUIRE(d.size() == 3);
  CHECK(d.points[0] == pt(-1, -1));
  CHECK(d.reps == std::vector<int>{1, 1, 2});
}
