#include "optdes/errors.hpp"
#include "optdes/glmm.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace optdes;

namespace {

Point p1(double a) {
  Point x(1);
  x << a;
  return x;
}

ModelSpec poisson_1d() {
  return make_model(FamilyKind::poisson, LinkFunction::log(), ModelBasis::first_order(1), DesignRegion::cube(1, 0, 1));
}

ModelSpec logistic_1d() {
  return make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(1),
                    DesignRegion::cube(1, -1, 1));
}

Matrix glm_block_info(const Block& b, const ModelSpec& m, const ParameterVector& th) {
  Matrix info = Matrix::Zero(static_cast<Eigen::Index>(m.p()), static_cast<Eigen::Index>(m.p()));
  for (const auto& x : b) {
    const Vector f = m.basis.eval(x);
    info += glm_weight(m, th, x) * f * f.transpose();
  }
  return info;
}

double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Marginal success probability and its eta derivative by composite Simpson integration.
std::pair<double, double> marginal_probability(double eta, double sigma) {
  const int n = 4000;
  const double a = -12.0, b = 12.0, h = (b - a) / n;
  double pi = 0.0, dpi = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = a + i * h;
    const double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    const double mu = expit(eta + sigma * z);
    pi += c * mu * phi;
    dpi += c * mu * (1.0 - mu) * phi;
  }
  return {pi * h / 3.0, dpi * h / 3.0};
}

}  // namespace

TEST_CASE("Gauss-Hermite rule integrates standard normal moments") {
  const GaussHermite gh = gauss_hermite(20);
  double m0 = 0, m1 = 0, m2 = 0, m4 = 0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    const double z = gh.nodes[i];
    m0 += gh.weights[i];
    m1 += gh.weights[i] * z;
    m2 += gh.weights[i] * z * z;
    m4 += gh.weights[i] * std::pow(z, 4);
  }
  CHECK(m0 == doctest::Approx(1.0));
  CHECK(std::abs(m1) < 1e-12);
  CHECK(m2 == doctest::Approx(1.0));
  CHECK(m4 == doctest::Approx(3.0));
  CHECK_THROWS_AS(gauss_hermite(0), ValidationError);
}

TEST_CASE("all approximations reduce to the GLM information as sigma2 -> 0") {
  ParameterVector th(2);
  th << 0.3, 1.2;
  const Block b{p1(-0.4), p1(0.9)};
  for (const ModelSpec& base : {poisson_1d(), logistic_1d()}) {
    const Block blk = base.family.kind == FamilyKind::poisson ? Block{p1(0.1), p1(0.8)} : b;
    const Matrix oracle = glm_block_info(blk, base, th);
    const RandomInterceptModel m{base, 1e-10, 2};
    for (const auto& method : {ApproximationMethod::ql(), ApproximationMethod::mql(),
                               ApproximationMethod::gee(Matrix::Identity(2, 2))}) {
      const Matrix info = block_info_matrix(blk, m, th, method);
      CHECK((info - oracle).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("Poisson QL block information uses the closed-form marginal moments") {
  ParameterVector th(2);
  th << 0.2, 1.0;
  const RandomInterceptModel m{poisson_1d(), 0.5, 2};
  const Block b{p1(0.1), p1(0.8)};
  Matrix x(2, 2);
  x << 1, 0.1, 1, 0.8;
  const Vector mu = ((x * th).array() + 0.25).exp().matrix();
  Matrix v = std::expm1(0.5) * mu * mu.transpose();
  v.diagonal() += mu;
  const Matrix dx = mu.asDiagonal() * x;
  const Matrix oracle = dx.transpose() * v.inverse() * dx;
  CHECK((block_info_matrix(b, m, th, ApproximationMethod::ql()) - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("binary block information at m = 1 matches the marginal Bernoulli information") {
  ParameterVector th(2);
  th << -0.4, 1.5;
  const RandomInterceptModel m{logistic_1d(), 1.3, 1};
  for (double x : {-1.0, 0.2, 0.7}) {
    const auto [pi, dpi] = marginal_probability(th[0] + th[1] * x, std::sqrt(1.3));
    Vector f(2);
    f << 1, x;
    const Matrix oracle = dpi * dpi / (pi * (1.0 - pi)) * f * f.transpose();
    const Matrix direct = direct_binary_block_info({p1(x)}, m, th);
    const Matrix ql = block_info_matrix({p1(x)}, m, th, ApproximationMethod::ql());
    CHECK((direct - oracle).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((ql - oracle).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("block sensitivity averages to zero over the design's own blocks") {
  ParameterVector th(2);
  th << 0.0, 2.0;
  const RandomInterceptModel m{poisson_1d(), 0.5, 2};
  const BlockDesign d{{{p1(0.1), p1(0.9)}, {p1(0.5), p1(1.0)}, {p1(0.0), p1(0.3)}}, {0.5, 0.3, 0.2}};
  for (const auto& method : {ApproximationMethod::ql(), ApproximationMethod::mql(),
                             ApproximationMethod::gee_exchangeable(2, 0.3)}) {
    const BlockSensitivity psi(d, m, th, method);
    double avg = 0.0;
    for (std::size_t l = 0; l < d.size(); ++l) avg += d.weights[l] * psi(d.blocks[l]);
    CHECK(std::abs(avg) < 1e-10);
  }
}

TEST_CASE("block helpers and validation") {
  const Block b{p1(0.7), p1(0.2)};
  const Block c = canonical_block(b);
  CHECK(c[0][0] == 0.2);
  const Point flat = flatten_block(c);
  CHECK(flat.size() == 2);
  CHECK(split_block(flat, 2, 1)[1][0] == 0.7);
  CHECK_THROWS_AS(split_block(flat, 3, 1), ValidationError);
  const RandomInterceptModel m{poisson_1d(), 0.5, 2};
  CHECK_THROWS_AS((BlockDesign{{{p1(0.1)}}, {1.0}}.validate(m)), ValidationError);
  CHECK_THROWS_AS((BlockDesign{{{p1(0.1), p1(1.5)}}, {1.0}}.validate(m)), ValidationError);
  CHECK_THROWS_AS((RandomInterceptModel{poisson_1d(), -1.0, 2}.validate()), ValidationError);
  const RandomInterceptModel gamma{
      make_model(FamilyKind::gamma, LinkFunction::log(), ModelBasis::first_order(1), DesignRegion::cube(1, 0, 1)), 0.5,
      2};
  CHECK_THROWS_AS(block_info_matrix(b, gamma, ParameterVector::Ones(2), ApproximationMethod::ql()), UnsupportedError);
}

TEST_CASE("optimised Poisson block design passes its block equivalence check") {
  ParameterVector th(2);
  th << 0.0, 3.0;
  const RandomInterceptModel m{poisson_1d(), 0.5, 2};
  ContinuousOptOptions o;
  o.multistarts = 4;
  const BlockResult r = optimize_block_design(m, th, ApproximationMethod::ql(), o);
  CHECK(r.report.is_optimal);
  const EquivalenceReport again = block_equivalence_check(r.design, m, th, ApproximationMethod::ql(), block_grid());
  CHECK(again.min_psi > -again.tolerance);
}
