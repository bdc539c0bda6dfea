#include "optdes/closed_form.hpp"
#include "optdes/efficiency.hpp"
#include "optdes/errors.hpp"
#include "optdes/exact.hpp"
#include "optdes/glmm.hpp"
#include "optdes/optimize.hpp"
#include "optdes/parallel.hpp"
#include "reproduce.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace optdes;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void note(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + what;
  }
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Outcome from_reproductions(const std::vector<std::string>& ids) {
  Outcome o;
  std::size_t cells = 0;
  for (const auto& id : ids) {
    const Reproduction r = reproduce(id);
    for (const auto& c : r.cells) {
      ++cells;
      note(o, c.pass(), id + ": " + c.label + " = " + num(c.computed) + " vs " + num(c.golden));
    }
  }
  if (o.pass) o.detail = std::to_string(cells) + " cells within tolerance";
  return o;
}

Point p1(double a) {
  Point x(1);
  x << a;
  return x;
}

Outcome canonical_logistic() {
  Outcome o;
  const double c = canonical_logistic_constant().c_star;
  note(o, std::abs(c - 1.5434) <= 1e-3, "c* = " + num(c));
  const ModelSpec m = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(1),
                                 DesignRegion::cube(1, -6, 6));
  ParameterVector th(2);
  th << 0, 1;
  const ContinuousResult r = optimize_continuous(m, ParameterSample::single(th));
  note(o, r.design.size() == 2, "support size " + std::to_string(r.design.size()));
  if (r.design.size() == 2) {
    for (std::size_t i = 0; i < 2; ++i) {
      const double target = i == 0 ? -1.5434 : 1.5434;
      note(o, std::abs(r.design.points[i][0] - target) <= 1e-3, "point " + num(r.design.points[i][0]));
      note(o, std::abs(r.design.weights[i] - 0.5) <= 1e-4, "weight " + num(r.design.weights[i]));
    }
  }
  note(o, r.report.min_psi >= -3e-3, "min psi " + num(r.report.min_psi));
  if (o.pass)
    o.detail = "c* = " + num(c) + ", optimiser support +-" + num(r.design.points.back()[0]) + ", min psi " +
               num(r.report.min_psi);
  return o;
}

double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Outcome properties() {
  Outcome o;

  // Link derivatives against central differences.
  const std::vector<std::pair<FamilyKind, LinkFunction>> links{
      {FamilyKind::binomial, LinkFunction::logistic()}, {FamilyKind::binomial, LinkFunction::probit()},
      {FamilyKind::binomial, LinkFunction::cloglog()},  {FamilyKind::binomial, LinkFunction::loglog()},
      {FamilyKind::poisson, LinkFunction::log()},       {FamilyKind::gamma, LinkFunction::power(0.5)},
      {FamilyKind::gamma, LinkFunction::boxcox(0.5)}};
  double worst_fd = 0.0;
  for (const auto& [fam, link] : links)
    for (double eta : {0.3, 0.8, 1.7}) {
      const double h = 1e-6;
      const double fd = (link.inverse(eta + h) - link.inverse(eta - h)) / (2 * h);
      worst_fd = std::max(worst_fd, std::abs(fd - link.mean_derivative(eta)) / std::max(1.0, std::abs(fd)));
    }
  note(o, worst_fd < 1e-6, "link derivative error " + num(worst_fd));

  // Trace identity over the support of an arbitrary design.
  const ModelSpec lg = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::second_order(2),
                                  DesignRegion::cube(2, -1, 1));
  ContinuousDesign d;
  for (double a : {-1.0, 0.0, 1.0})
    for (double b : {-1.0, 0.3, 1.0}) {
      Point x(2);
      x << a, b;
      d.points.push_back(x);
      d.weights.push_back(1.0 / 9.0);
    }
  ParameterVector th(6);
  th << 0.5, 1, -1, 0.5, 0.3, -0.2;
  const LocalSensitivity ls(d, lg, th);
  double trace = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) trace += d.weights[i] * ls.variance_term(d.points[i]);
  note(o, std::abs(trace - 6.0) < 1e-9, "trace identity " + num(trace));

  // GLM reduction of every block approximation.
  const ModelSpec ps = make_model(FamilyKind::poisson, LinkFunction::log(), ModelBasis::first_order(1),
                                  DesignRegion::cube(1, 0, 1));
  ParameterVector t2(2);
  t2 << 0.2, 1.5;
  const Block blk{p1(0.1), p1(0.7)};
  Matrix glm = Matrix::Zero(2, 2);
  for (const auto& x : blk) glm += glm_weight(ps, t2, x) * ps.basis.eval(x) * ps.basis.eval(x).transpose();
  const RandomInterceptModel tiny{ps, 1e-10, 2};
  for (const auto& method : {ApproximationMethod::ql(), ApproximationMethod::mql(),
                             ApproximationMethod::gee(Matrix::Identity(2, 2))}) {
    const double err = (block_info_matrix(blk, tiny, t2, method) - glm).cwiseAbs().maxCoeff();
    note(o, err < 1e-8, std::string(approximation_name(method.kind)) + " reduction error " + num(err));
  }

  // Small-effects limit.
  const ModelSpec l1 = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(2),
                                  DesignRegion::cube(2, -1, 1));
  ParameterVector small(3);
  small << 0, 0.01, 0.01;
  const ContinuousResult sr = optimize_continuous(l1, ParameterSample::single(small));
  double worst_w = sr.design.size() == 4 ? 0.0 : 1.0;
  for (std::size_t i = 0; i < sr.design.size(); ++i) {
    worst_w = std::max(worst_w, std::abs(sr.design.weights[i] - 0.25));
    worst_w = std::max(worst_w, 1.0 - sr.design.points[i].cwiseAbs().minCoeff());
  }
  note(o, worst_w < 1e-3, "small-effects deviation " + num(worst_w));

  // Seed determinism of the stochastic paths.
  const Prior box = Prior::uniform_box({{-0.5, 0.5}, {1, 3}, {1, 3}});
  SampleSpec spec;
  spec.n_draws = 25;
  spec.seed = 4;
  note(o, sample_prior(box, spec).draws == sample_prior(box, spec).draws, "LHS not deterministic");
  spec.method = SamplingMethod::iid;
  note(o, sample_prior(box, spec).draws == sample_prior(box, spec).draws, "iid sampling not deterministic");
  ParameterVector t3(3);
  t3 << 1, 2, 2;
  set_thread_count(1);
  const ContinuousResult c1 = optimize_continuous(l1, ParameterSample::single(t3));
  set_thread_count(4);
  const ContinuousResult c4 = optimize_continuous(l1, ParameterSample::single(t3));
  set_thread_count(0);
  note(o, c1.objective == c4.objective && c1.design.points == c4.design.points, "multistart not deterministic");
  ExactOptOptions eo;
  eo.n = 5;
  eo.multistarts = 2;
  eo.anneal.steps = 2000;
  eo.sample.n_draws = 4;
  note(o, optimize_exact(l1, box, eo).design.points == optimize_exact(l1, box, eo).design.points,
       "annealing not deterministic");
  note(o,
       efficiency_distribution(sr.design, c1.design, l1, box, 30, 2).efficiencies ==
           efficiency_distribution(sr.design, c1.design, l1, box, 30, 2).efficiencies,
       "efficiency distribution not deterministic");

  // Direct binary block information at m = 1 against Simpson integration.
  const ModelSpec bl = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(1),
                                  DesignRegion::cube(1, -1, 1));
  const RandomInterceptModel rim{bl, 1.0, 1};
  ParameterVector t4(2);
  t4 << -0.3, 1.2;
  double worst_direct = 0.0;
  for (double x : {-1.0, 0.4}) {
    const int n = 4000;
    const double a = -12.0, b = 12.0, h = (b - a) / n;
    double pi = 0.0, dpi = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double z = a + i * h;
      const double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
      const double mu = expit(t4[0] + t4[1] * x + z);
      pi += c * mu * phi * h / 3.0;
      dpi += c * mu * (1.0 - mu) * phi * h / 3.0;
    }
    const Vector f = bl.basis.eval(p1(x));
    const Matrix oracle = dpi * dpi / (pi * (1.0 - pi)) * f * f.transpose();
    worst_direct = std::max(worst_direct, (direct_binary_block_info({p1(x)}, rim, t4) - oracle).cwiseAbs().maxCoeff());
  }
  note(o, worst_direct < 1e-6, "direct block information error " + num(worst_direct));

  if (o.pass) o.detail = "all property checks hold";
  return o;
}

Outcome ecdf_with_spread() {
  Outcome o = from_reproductions({"poisson-ecdf"});
  if (!o.pass) {
    std::string spread = "minima over seeds 1-6:";
    std::vector<std::vector<double>> minima;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const Reproduction r = reproduce("poisson-ecdf", seed);
      std::vector<double> row;
      for (const auto& c : r.cells)
        if (c.label.find("min") != std::string::npos) row.push_back(c.computed);
      minima.push_back(row);
    }
    const char* alphas[] = {"2", "5", "10", "20"};
    for (std::size_t a = 0; a < minima.front().size(); ++a) {
      spread += std::string(" alpha=") + alphas[a] + " [";
      for (std::size_t s = 0; s < minima.size(); ++s) spread += (s ? " " : "") + num(minima[s][a]);
      spread += "]";
    }
    o.detail += "; " + spread;
  }
  return o;
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "canonical logistic design", canonical_logistic},
      {2, "one-variable efficiency matrix", [] { return from_reproductions({"logistic-1d-efficiency"}); }},
      {3, "first-order logistic designs B1-B4", [] { return from_reproductions({"logistic-b-designs"}); }},
      {4, "unbounded-axis a* table", [] { return from_reproductions({"logistic-unbounded-axis"}); }},
      {5, "gamma first-order weights", [] { return from_reproductions({"gamma-first-order"}); }},
      {6, "gamma second-order and logistic gamma sweep",
       [] { return from_reproductions({"gamma-second-order", "logistic-gamma-sweep"}); }},
      {7, "Poisson minimal-support designs", [] { return from_reproductions({"poisson-minimal-support"}); }},
      {8, "Bayesian Poisson objective identity", [] { return from_reproductions({"poisson-beta"}); }},
      {9, "Poisson efficiency ECDFs", ecdf_with_spread},
      {10, "Bayesian logistic exact design", [] { return from_reproductions({"logistic-bayes"}); }},
      {11, "GLMM block designs", [] { return from_reproductions({"block-poisson"}); }},
      {12, "property suites", properties},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << c.id << " [" << (o.pass ? "PASS" : "FAIL") << "] " << c.name << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria pass" << std::endl;
  return failures == 0 ? 0 : 1;
}
