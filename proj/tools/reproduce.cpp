#include "reproduce.hpp"

#include "optdes/closed_form.hpp"
#include "optdes/efficiency.hpp"
#include "optdes/errors.hpp"
#include "optdes/exact.hpp"
#include "optdes/glmm.hpp"
#include "optdes/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace optdes {

namespace {

Point pt(std::initializer_list<double> v) {
  Point x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double c : v) x[i++] = c;
  return x;
}

ParameterVector par(std::initializer_list<double> v) { return pt(v); }

std::string point_label(const Point& x) {
  std::ostringstream s;
  s << "(";
  for (Eigen::Index j = 0; j < x.size(); ++j) s << (j ? "," : "") << x[j];
  s << ")";
  return s.str();
}

Json design_json(const ContinuousDesign& d) {
  Json j;
  Json pts = Json::array();
  for (const auto& x : d.points) pts.push_back(vector_to_json(x));
  j["points"] = pts;
  j["weights"] = d.weights;
  return j;
}

std::size_t nearest(const std::vector<Point>& points, const Point& x, double& distance) {
  std::size_t best = 0;
  distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - x).lpNorm<Eigen::Infinity>();
    if (d < distance) {
      distance = d;
      best = i;
    }
  }
  return best;
}

// Position and weight cells for every tabulated support point.
void match_support(Reproduction& r, const std::string& name, const ContinuousDesign& computed,
                   const std::vector<Point>& points, const std::vector<double>& weights, double tol) {
  r.cells.push_back({name + " support size", static_cast<double>(computed.size()),
                     static_cast<double>(points.size()), 0.0, Comparison::within});
  for (std::size_t i = 0; i < points.size(); ++i) {
    double dist = 0.0;
    const std::size_t j = nearest(computed.points, points[i], dist);
    r.cells.push_back({name + " " + point_label(points[i]) + " distance", dist, 0.0, tol, Comparison::within});
    r.cells.push_back({name + " " + point_label(points[i]) + " weight", computed.weights[j], weights[i], tol,
                       Comparison::within});
  }
}

// Weight of the computed design at x, 0 if no support point is within tol.
double weight_at(const ContinuousDesign& d, const Point& x, double tol) {
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if ((d.points[i] - x).lpNorm<Eigen::Infinity>() <= tol) total += d.weights[i];
  return total;
}

Reproduction logistic_1d_efficiency(std::uint64_t) {
  Reproduction r{"logistic-1d-efficiency", "D-efficiencies (%) of one-variable logistic designs, theta0 = 0", {}, {}};
  const ModelSpec model = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(1),
                                     DesignRegion::cube(1, -10.0, 10.0));
  const std::vector<double> slopes{0.5, 1.0, 2.0};
  const double golden[3][3] = {{100.0, 74.52, 41.52}, {57.56, 100.0, 74.52}, {5.72, 57.56, 100.0}};
  std::vector<ContinuousDesign> designs;
  Json support = Json::array();
  for (double s : slopes) {
    designs.push_back(logistic_1d_design(0.0, s, model.region).design);
    support.push_back(designs.back().points.back()[0]);
  }
  r.details["upper_support_points"] = support;
  for (std::size_t row = 0; row < 3; ++row) {
    const ParameterVector theta = par({0.0, slopes[row]});
    for (std::size_t col = 0; col < 3; ++col) {
      const double eff = 100.0 * d_efficiency(designs[col], designs[row], model, theta);
      std::ostringstream label;
      label << "theta1=" << slopes[row] << " design x*=" << std::setprecision(5) << support[col].get<double>();
      r.cells.push_back({label.str(), eff, golden[row][col], 0.1, Comparison::within});
    }
  }
  return r;
}

Reproduction logistic_b_designs(std::uint64_t seed) {
  Reproduction r{"logistic-b-designs", "First-order logistic designs on [-1,1]^2 for B1-B4", {}, {}};
  const ModelSpec model = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(2),
                                     DesignRegion::cube(2, -1.0, 1.0));
  ContinuousOptOptions opts;
  opts.seed = seed;
  const std::map<std::string, ParameterVector> sets{{"B1", par({0, 1, 1})},
                                                    {"B2", par({0, 2, 2})},
                                                    {"B3", par({2, 2, 2})},
                                                    {"B4", par({2.5, 2, 2})}};
  for (const auto& [name, theta] : sets) {
    const ContinuousResult res = optimize_continuous(model, ParameterSample::single(theta), opts);
    Json d = design_json(res.design);
    d["objective"] = res.objective;
    d["min_psi"] = res.report.min_psi;
    r.details[name] = d;
    r.cells.push_back({name + " min psi", res.report.min_psi, 0.0, res.report.tolerance, Comparison::at_least});
    if (name == "B1") {
      match_support(r, name, res.design, {pt({-1, -1}), pt({1, -1}), pt({-1, 1}), pt({1, 1})},
                    {0.204, 0.296, 0.296, 0.204}, 5e-3);
    } else if (name == "B2") {
      const ContinuousDesign w1{{pt({1, -1}), pt({-1, 1}), pt({-1, 0.1178}), pt({-0.1178, 1})},
                                {0.327, 0.193, 0.240, 0.240}};
      const double tab = d_objective(information_matrix(w1, model, theta));
      r.cells.push_back({name + " objective", res.objective, tab, 1e-4, Comparison::within});
    } else if (name == "B3") {
      match_support(r, name, res.design, {pt({-1, -0.7370}), pt({-1, 0.7370}), pt({-0.7370, -1}), pt({0.7370, -1})},
                    {0.169, 0.331, 0.169, 0.331}, 5e-3);
    } else {
      match_support(r, name, res.design, {pt({-1, 0.5309}), pt({-1, -1}), pt({0.5309, -1})},
                    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 5e-3);
    }
  }
  return r;
}

Reproduction logistic_unbounded_axis(std::uint64_t) {
  Reproduction r{"logistic-unbounded-axis", "Logistic designs on [-1,1] x R: |a*| per factorial level", {}, {}};
  const DesignRegion region({{-1.0, 1.0}, {}}, 1);
  const ModelSpec model =
      make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(2), region);
  const std::vector<std::pair<std::string, ParameterVector>> sets{
      {"B1", par({0, 1, 1})}, {"B2", par({0, 2, 2})}, {"B3", par({2, 2, 2})}, {"B4", par({2.5, 2, 2})}};
  const std::map<std::string, std::vector<double>> golden{{"B1", {2.2229, 0.2229}},
                                                          {"B2", {1.6115, 0.3886}},
                                                          {"B3", {0.6115, 1.3886}},
                                                          {"B4", {0.3615, 1.6386}}};
  for (const auto& [name, theta] : sets) {
    const TheoremDesign td = yang_zhang_design(theta, region);
    const EquivalenceReport rep = equivalence_check(td.design, model, ParameterSample::single(theta));
    Json d = design_json(td.design);
    d["a_star"] = td.a_star;
    d["min_psi"] = rep.min_psi;
    r.details[name] = d;
    const auto& g = golden.at(name);
    for (std::size_t l = 0; l < g.size(); ++l)
      r.cells.push_back({name + " x1=" + (l == 0 ? "-1" : "+1") + " |a*|", td.a_star[l], g[l], 1e-3,
                         Comparison::within});
    r.cells.push_back({name + " min psi", rep.min_psi, 0.0, rep.tolerance, Comparison::at_least});
  }
  return r;
}

Reproduction gamma_first_order(std::uint64_t seed) {
  Reproduction r{"gamma-first-order", "Gamma power-link first-order weights, theta = (1, chi, chi)", {}, {}};
  const ModelSpec model = make_model(FamilyKind::gamma, LinkFunction::power(1.0), ModelBasis::first_order(2),
                                     DesignRegion::cube(2, 0.0, 1.0));
  ContinuousOptOptions opts;
  opts.seed = seed;
  const std::vector<Point> corners{pt({0, 0}), pt({0, 1}), pt({1, 0}), pt({1, 1})};
  const std::vector<std::pair<double, std::vector<double>>> golden{
      {0.1, {0.271, 0.252, 0.252, 0.225}},
      {0.5, {5.0 / 16.0, 9.0 / 32.0, 9.0 / 32.0, 1.0 / 8.0}},
      {1.0, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0}}};
  for (const auto& [chi, w] : golden) {
    const ParameterVector theta = par({1.0, chi, chi});
    const ContinuousResult res = optimize_continuous(model, ParameterSample::single(theta), opts);
    std::ostringstream name;
    name << "chi=" << chi;
    Json d = design_json(res.design);
    d["min_psi"] = res.report.min_psi;
    r.details[name.str()] = d;
    double matched = 0.0;
    for (std::size_t i = 0; i < corners.size(); ++i) {
      const double wi = weight_at(res.design, corners[i], 1e-3);
      matched += wi;
      r.cells.push_back({name.str() + " weight " + point_label(corners[i]), wi, w[i], 1e-3, Comparison::within});
    }
    r.cells.push_back({name.str() + " weight off the 2^2 factorial", 1.0 - matched, 0.0, 1e-3, Comparison::within});
    r.cells.push_back({name.str() + " min psi", res.report.min_psi, 0.0, res.report.tolerance, Comparison::at_least});
  }
  return r;
}

std::vector<Point> factorial_3x3() {
  std::vector<Point> f;
  for (double a : {-1.0, 0.0, 1.0})
    for (double b : {-1.0, 0.0, 1.0}) f.push_back(pt({a, b}));
  return f;
}

Reproduction gamma_second_order(std::uint64_t seed) {
  Reproduction r{"gamma-second-order", "Gamma power-link (kappa = 0.5) second-order 9-trial designs", {}, {}};
  const ModelSpec model = make_model(FamilyKind::gamma, LinkFunction::power(0.5), ModelBasis::second_order(2),
                                     DesignRegion::cube(2, -1.0, 1.0));
  // Terms: 1, x1, x2, x1 x2, x1^2, x2^2.
  const ParameterVector g1 = par({3.7, -0.46, -0.65, -0.57, -0.19, -0.45});
  const ParameterVector g2 = par({3.7, -0.23, -0.325, -0.285, -0.095, -0.225});
  const ExactDesign tab_g1{{pt({-1, -1}), pt({-1, 1}), pt({1, -1}), pt({1, 1}), pt({0.11, 0.15}), pt({0.26, 1}),
                            pt({1, 0.29})},
                           {1, 2, 2, 1, 1, 1, 1}};
  const ExactDesign tab_g2{{pt({-1, -1}), pt({-1, 1}), pt({1, -1}), pt({1, 1}), pt({-1, 0}), pt({-0.01, -1}),
                            pt({0.07, 0.09}), pt({0.08, 1}), pt({1, 0.09})},
                           std::vector<int>(9, 1)};
  const ExactDesign factorial{factorial_3x3(), std::vector<int>(9, 1)};
  ExactOptOptions eo;
  eo.n = 9;
  eo.method = ExactMethod::grid_exchange;
  eo.seed = seed;
  const auto s1 = ParameterSample::single(g1);
  const auto s2 = ParameterSample::single(g2);
  const ExactResult opt1 = optimize_exact(model, s1, eo);
  const ExactResult opt2 = optimize_exact(model, s2, eo);
  const double tab1 = exact_objective(tab_g1, model, s1);
  const double tab2 = exact_objective(tab_g2, model, s2);
  r.cells.push_back({"G1 exchange objective vs tabulated", opt1.objective, tab1, 1e-9, Comparison::at_most});
  r.cells.push_back({"G2 exchange objective vs tabulated", opt2.objective, tab2, 1e-9, Comparison::at_most});
  const auto eff = [&](const ExactDesign& d) {
    return 100.0 * d_efficiency_from_objectives(exact_objective(d, model, s1), opt1.objective, model.p());
  };
  r.cells.push_back({"G2 design efficiency under G1 (%)", eff(tab_g2), 97.32, 0.1, Comparison::within});
  r.cells.push_back({"3^2 factorial efficiency under G1 (%)", eff(factorial), 96.35, 0.1, Comparison::within});
  for (const auto& [name, res] : {std::pair{"G1", &opt1}, std::pair{"G2", &opt2}}) {
    Json d;
    Json pts = Json::array();
    for (const auto& x : res->design.points) pts.push_back(vector_to_json(x));
    d["points"] = pts;
    d["reps"] = res->design.reps;
    d["objective"] = res->objective;
    r.details[name] = d;
  }
  return r;
}

Reproduction logistic_gamma_sweep(std::uint64_t seed) {
  Reproduction r{"logistic-gamma-sweep", "Second-order logistic designs: 3^2 factorial efficiency as gamma varies", {},
                 {}};
  const ModelSpec model = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::second_order(2),
                                     DesignRegion::cube(2, -1.0, 1.0));
  ContinuousOptOptions opts;
  opts.seed = seed;
  const ContinuousDesign factorial{factorial_3x3(), std::vector<double>(9, 1.0 / 9.0)};
  const std::vector<std::pair<double, double>> golden{{0.0, 97.4}, {1.0, 74.2}, {2.0, 38.0}};
  for (const auto& [g, pct] : golden) {
    const ParameterVector theta = par({1.0, 2 * g, 2 * g, -g, -1.5 * g, 1.5 * g});
    const ContinuousResult res = optimize_continuous(model, ParameterSample::single(theta), opts);
    const double fo = d_objective(information_matrix(factorial, model, theta));
    std::ostringstream name;
    name << "gamma=" << g;
    Json d = design_json(res.design);
    d["objective"] = res.objective;
    d["min_psi"] = res.report.min_psi;
    r.details[name.str()] = d;
    r.cells.push_back({name.str() + " factorial efficiency (%)",
                       100.0 * d_efficiency_from_objectives(fo, res.objective, model.p()), pct, 0.2,
                       Comparison::within});
    r.cells.push_back({name.str() + " min psi", res.report.min_psi, 0.0, res.report.tolerance, Comparison::at_least});
  }
  return r;
}

Reproduction poisson_minimal_support(std::uint64_t) {
  Reproduction r{"poisson-minimal-support", "Poisson first-order designs for theta = (0, chi, chi)", {}, {}};
  const ModelSpec model = make_model(FamilyKind::poisson, LinkFunction::log(), ModelBasis::first_order(2),
                                     DesignRegion::cube(2, -1.0, 1.0));
  for (int chi = 1; chi <= 5; ++chi) {
    const ParameterVector theta = par({0.0, double(chi), double(chi)});
    const TheoremDesign td = russell_poisson_design(theta, model.region);
    const EquivalenceReport rep = equivalence_check(td.design, model, ParameterSample::single(theta));
    const std::string name = "chi=" + std::to_string(chi);
    Json d = design_json(td.design);
    d["min_psi"] = rep.min_psi;
    r.details[name] = d;
    r.cells.push_back({name + " min psi", rep.min_psi, 0.0, rep.tolerance, Comparison::at_least});
    r.cells.push_back({name + " includes (1,1)", weight_at(td.design, pt({1, 1}), 1e-12) > 0.0 ? 1.0 : 0.0, 1.0, 0.0,
                       Comparison::within});
  }
  return r;
}

Prior alpha_prior(double alpha) {
  std::vector<Interval> b{{0.0, 0.0}};
  for (int i = 1; i <= 5; ++i) b.push_back(i % 2 ? Interval{1.0, 1.0 + alpha} : Interval{-1.0 - alpha, -1.0});
  return Prior::uniform_box(std::move(b));
}

ModelSpec poisson5() {
  return make_model(FamilyKind::poisson, LinkFunction::log(), ModelBasis::first_order(5),
                    DesignRegion::cube(5, -1.0, 1.0));
}

Reproduction poisson_beta(std::uint64_t seed) {
  Reproduction r{"poisson-beta", "Bayesian minimally supported Poisson designs, beta = (alpha-2)/(alpha+2)", {}, {}};
  const ModelSpec model = poisson5();
  for (double alpha : {2.0, 5.0, 10.0, 20.0}) {
    const Prior prior = alpha_prior(alpha);
    const TheoremDesign td = bayes_minimal_poisson_design(prior, model.region);
    const double beta = (alpha - 2.0) / (alpha + 2.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      Point row = pt({1, -1, 1, -1, 1});
      if (i < 5) row[Eigen::Index(i)] = (i % 2 ? -beta : beta);
      worst = std::max(worst, (td.design.points[i] - row).lpNorm<Eigen::Infinity>());
    }
    SampleSpec spec;
    spec.n_draws = 1000;
    spec.seed = seed;
    spec.method = SamplingMethod::iid;
    const ParameterSample sample = sample_prior(prior, spec);
    ParameterVector mean = ParameterVector::Zero(6);
    for (std::size_t d = 0; d < sample.size(); ++d) mean += sample.weights[d] * sample.draws[d];
    const double bayes = bayes_objective(td.design, model, sample);
    const double local = d_objective(information_matrix(td.design, model, mean));
    std::ostringstream name;
    name << "alpha=" << alpha;
    Json d = design_json(td.design);
    d["theta_star"] = vector_to_json(prior.mean());
    d["bayes_objective"] = bayes;
    d["local_objective_at_sample_mean"] = local;
    r.details[name.str()] = d;
    r.cells.push_back({name.str() + " max deviation from beta table", worst, 0.0, 1e-12, Comparison::within});
    r.cells.push_back({name.str() + " |bayes - local at sample mean|", std::abs(bayes - local), 0.0, 1e-8,
                       Comparison::within});
  }
  return r;
}

Reproduction poisson_ecdf(std::uint64_t seed) {
  Reproduction r{"poisson-ecdf", "Efficiency of the beta designs over 10000 prior draws", {}, {}};
  const ModelSpec model = poisson5();
  const std::vector<std::tuple<double, double, double>> golden{
      {2.0, 0.79, 0.93}, {5.0, 0.53, 0.85}, {10.0, 0.34, 0.80}, {20.0, 0.21, 0.75}};
  const LocalOracle oracle = [&](const ParameterVector& t) { return russell_poisson_design(t, model.region).design; };
  for (const auto& [alpha, mn, med] : golden) {
    const Prior prior = alpha_prior(alpha);
    const ContinuousDesign design = bayes_minimal_poisson_design(prior, model.region).design;
    const EfficiencyDistribution dist = efficiency_distribution(design, oracle, model, prior, 10000, seed);
    std::ostringstream name;
    name << "alpha=" << alpha;
    r.details[name.str()] = ecdf_summary_to_json(dist);
    r.cells.push_back({name.str() + " min efficiency", dist.min, mn, 0.02, Comparison::within});
    r.cells.push_back({name.str() + " median efficiency", dist.median, med, 0.02, Comparison::within});
  }
  return r;
}

Reproduction logistic_bayes(std::uint64_t seed) {
  Reproduction r{"logistic-bayes", "Bayesian 16-run design for a 3-factor second-order logistic model vs the CCD", {},
                 {}};
  const double a = 1.2782;
  const ModelSpec model = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::second_order(3),
                                     DesignRegion::cube(3, -a, a));
  std::vector<Interval> b(10, Interval{-2.0, 2.0});
  b[1] = {2.0, 6.0};
  b[2] = {2.0, 6.0};
  const Prior prior = Prior::uniform_box(b);
  SampleSpec spec;
  spec.n_draws = 20;
  spec.seed = seed;
  const ParameterSample sample = sample_prior(prior, spec);
  std::vector<Point> ccd;
  for (int i = 0; i < 8; ++i) ccd.push_back(pt({(i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0}));
  for (Eigen::Index j = 0; j < 3; ++j)
    for (double s : {-a, a}) {
      Point x = Point::Zero(3);
      x[j] = s;
      ccd.push_back(x);
    }
  ccd.push_back(Point::Zero(3));
  ccd.push_back(Point::Zero(3));
  const ExactDesign dccd = collect_trials(ccd);
  ExactOptOptions eo;
  eo.n = 16;
  eo.seed = seed;
  eo.multistarts = 1;
  const ExactResult res = optimize_exact(model, sample, eo);
  const double ccd_obj = exact_objective(dccd, model, sample);
  const EfficiencyDistribution dist =
      efficiency_distribution(res.design.as_continuous(), dccd.as_continuous(), model, prior, 1000, seed + 1);
  std::size_t above = 0;
  for (double e : dist.efficiencies) above += e > 1.0;
  const double frac = double(above) / double(dist.efficiencies.size());
  r.cells.push_back({"annealed objective vs CCD", res.objective, ccd_obj, 0.0, Comparison::at_most});
  r.cells.push_back({"ECDF mass above 1", frac, 0.80, 0.0, Comparison::at_least});
  Json d;
  Json pts = Json::array();
  for (const auto& x : res.design.points) pts.push_back(vector_to_json(x));
  d["points"] = pts;
  d["reps"] = res.design.reps;
  r.details["annealed"] = d;
  r.details["ecdf"] = ecdf_summary_to_json(dist);
  return r;
}

Reproduction block_poisson(std::uint64_t seed) {
  Reproduction r{"block-poisson", "Poisson blocks of size 2: QL, MQL and GEE designs and cross-efficiencies", {}, {}};
  const RandomInterceptModel rim{make_model(FamilyKind::poisson, LinkFunction::log(), ModelBasis::second_order(1),
                                            DesignRegion::cube(1, -1.0, 1.0)),
                                 0.5, 2};
  const ParameterVector theta = par({0.0, 5.0, 1.0});
  const std::vector<ApproximationMethod> methods{ApproximationMethod::ql(), ApproximationMethod::mql(),
                                                 ApproximationMethod::gee_exchangeable(2, 0.5)};
  std::vector<BlockDesign> designs;
  ContinuousOptOptions opts;
  opts.seed = seed;
  opts.grid = block_grid();
  for (const auto& m : methods) {
    const BlockResult res = optimize_block_design(rim, theta, m, opts);
    designs.push_back(res.design);
    const std::string name = approximation_name(m.kind);
    Json d = block_design_to_json(res.design, rim.base);
    d.erase("region");
    d.erase("model");
    d["min_psi"] = res.report.min_psi;
    r.details[name] = d;
    r.cells.push_back({name + " min psi", res.report.min_psi, 0.0, res.report.tolerance, Comparison::at_least});
  }
  const auto flat = [](const BlockDesign& d) {
    ContinuousDesign c;
    for (const auto& b : d.blocks) c.points.push_back(flatten_block(canonical_block(b)));
    c.weights = d.weights;
    return c;
  };
  const std::vector<Point> ql_blocks{pt({0.10, 0.88}), pt({0.75, 1.0})};
  match_support(r, "QL", flat(designs[0]), ql_blocks, {0.5, 0.5}, 0.02);
  match_support(r, "MQL", flat(designs[1]), ql_blocks, {0.5, 0.5}, 0.02);
  match_support(r, "GEE", flat(designs[2]), {pt({0.02, 0.84}), pt({0.72, 1.0}), pt({0.26, 1.0})}, {0.38, 0.35, 0.27},
                0.02);
  // The tabulated efficiencies are determinant ratios; the p-th roots are
  // reported alongside.
  const std::size_t p = rim.base.p();
  Json rooted = Json::object();
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      const double oa = d_objective(block_design_info(designs[a], rim, theta, methods[b]));
      const double ob = d_objective(block_design_info(designs[b], rim, theta, methods[b]));
      const double ratio = std::exp(ob - oa);
      const std::string label =
          std::string(approximation_name(methods[a].kind)) + " design under " + approximation_name(methods[b].kind);
      rooted[label] = std::pow(ratio, 1.0 / double(p));
      const bool gee_a = methods[a].kind == ApproximationKind::gee;
      const bool gee_b = methods[b].kind == ApproximationKind::gee;
      if (gee_a == gee_b) continue;
      r.cells.push_back({label + " determinant ratio", ratio, gee_a ? 0.87 : 0.90, 0.02, Comparison::within});
    }
  }
  r.details["d_efficiency_root_p"] = rooted;
  return r;
}

using Builder = std::function<Reproduction(std::uint64_t)>;

const std::vector<std::pair<std::string, Builder>>& registry() {
  static const std::vector<std::pair<std::string, Builder>> r{
      {"logistic-1d-efficiency", logistic_1d_efficiency},
      {"logistic-b-designs", logistic_b_designs},
      {"logistic-unbounded-axis", logistic_unbounded_axis},
      {"logistic-gamma-sweep", logistic_gamma_sweep},
      {"logistic-bayes", logistic_bayes},
      {"gamma-first-order", gamma_first_order},
      {"gamma-second-order", gamma_second_order},
      {"poisson-minimal-support", poisson_minimal_support},
      {"poisson-beta", poisson_beta},
      {"poisson-ecdf", poisson_ecdf},
      {"block-poisson", block_poisson},
  };
  return r;
}

const char* comparison_name(Comparison c) {
  switch (c) {
    case Comparison::within: return "within";
    case Comparison::at_most: return "at_most";
    case Comparison::at_least: return "at_least";
  }
  return "";
}

}  // namespace

bool Cell::pass() const {
  if (!std::isfinite(computed)) return false;
  switch (comparison) {
    case Comparison::within: return std::abs(computed - golden) <= tolerance;
    case Comparison::at_most: return computed <= golden + tolerance;
    case Comparison::at_least: return computed >= golden - tolerance;
  }
  return false;
}

bool Reproduction::pass() const {
  return std::all_of(cells.begin(), cells.end(), [](const Cell& c) { return c.pass(); });
}

std::vector<std::string> reproduction_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, fn] : registry()) ids.push_back(id);
  return ids;
}

Reproduction reproduce(const std::string& id, std::uint64_t seed) {
  for (const auto& [name, fn] : registry())
    if (name == id) return fn(seed);
  std::string known;
  for (const auto& n : reproduction_ids()) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("unknown table id '" + id + "' (known: " + known + ")");
}

void write_cells_csv(std::ostream& out, const Reproduction& r) {
  out << "label,computed,golden,tolerance,comparison,pass\n";
  for (const auto& c : r.cells)
    out << '"' << c.label << "\"," << format_number(c.computed) << ',' << format_number(c.golden) << ','
        << format_number(c.tolerance) << ',' << comparison_name(c.comparison) << ',' << (c.pass() ? "true" : "false")
        << '\n';
}

Json reproduction_to_json(const Reproduction& r) {
  Json j;
  j["id"] = r.id;
  j["title"] = r.title;
  j["pass"] = r.pass();
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    Json cj;
    cj["label"] = c.label;
    cj["computed"] = c.computed;
    cj["golden"] = c.golden;
    cj["tolerance"] = c.tolerance;
    cj["comparison"] = comparison_name(c.comparison);
    cj["pass"] = c.pass();
    cells.push_back(cj);
  }
  j["cells"] = cells;
  j["details"] = r.details;
  return j;
}

void print_reproduction(std::ostream& out, const Reproduction& r) {
  std::size_t width = 5;
  for (const auto& c : r.cells) width = std::max(width, c.label.size());
  out << r.id << ": " << r.title << "\n";
  out << std::left << std::setw(int(width)) << "cell" << "  " << std::right << std::setw(14) << "computed"
      << std::setw(14) << "golden" << std::setw(11) << "tolerance" << std::setw(10) << "check" << "  result\n";
  for (const auto& c : r.cells) {
    out << std::left << std::setw(int(width)) << c.label << "  " << std::right << std::setprecision(6)
        << std::setw(14) << c.computed << std::setw(14) << c.golden << std::setw(11) << c.tolerance << std::setw(10)
        << comparison_name(c.comparison) << "  " << (c.pass() ? "ok" : "FAIL") << "\n";
  }
  out << (r.pass() ? "all cells within tolerance" : "some cells outside tolerance") << "\n";
}

}  // namespace optdes
