#include "run.hpp"

#include "optdes/closed_form.hpp"
#include "optdes/efficiency.hpp"
#include "optdes/errors.hpp"
#include "optdes/exact.hpp"
#include "optdes/glmm.hpp"
#include "optdes/optimize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace optdes {

namespace fs = std::filesystem;

namespace {

const char* kSchemaText = R"schema({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "optdes run configuration",
  "type": "object",
  "additionalProperties": false,
  "required": ["task", "model"],
  "properties": {
    "task": {"enum": ["optimize", "optimize-exact", "check", "closed-form", "efficiency", "effdist",
                      "block-optimize", "block-check"]},
    "seed": {"type": "integer", "minimum": 0, "default": 1},
    "model": {
      "type": "object",
      "additionalProperties": false,
      "required": ["family", "link", "basis", "region"],
      "properties": {
        "family": {"enum": ["normal", "binomial", "poisson", "gamma"]},
        "dispersion": {"type": "number", "exclusiveMinimum": 0, "default": 1},
        "link": {"enum": ["identity", "logistic", "probit", "cloglog", "loglog", "log", "boxcox", "power"]},
        "link_shape": {"type": "number", "description": "lambda (boxcox) or kappa (power)"},
        "basis": {"oneOf": [{"enum": ["first_order", "second_order"]},
                            {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}]},
        "region": {
          "type": "object",
          "additionalProperties": false,
          "required": ["bounds"],
          "properties": {
            "bounds": {"type": "array", "minItems": 1,
                       "items": {"oneOf": [{"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                                           {"type": "null"}]}},
            "unbounded_axis": {"type": ["integer", "null"], "minimum": 1}
          }
        }
      }
    },
    "prior": {
      "type": "object",
      "additionalProperties": false,
      "required": ["type"],
      "properties": {
        "type": {"enum": ["point", "uniform_box", "sample"]},
        "theta": {"type": "array", "items": {"type": "number"}},
        "lower": {"type": "array", "items": {"type": "number"}},
        "upper": {"type": "array", "items": {"type": "number"}},
        "draws": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "weights": {"type": "array", "items": {"type": "number"}}
      }
    },
    "sampling": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "n_draws": {"type": "integer", "minimum": 1, "default": 1},
        "method": {"enum": ["lhs", "iid"], "default": "lhs"}
      }
    },
    "design": {"$ref": "#/$defs/design"},
    "reference": {"$ref": "#/$defs/design"},
    "block": {
      "type": "object",
      "additionalProperties": false,
      "required": ["sigma2", "m"],
      "properties": {
        "sigma2": {"type": "number", "minimum": 0},
        "m": {"type": "integer", "minimum": 1},
        "approximation": {"enum": ["ql", "mql", "gee"], "default": "ql"},
        "alpha": {"type": "number", "description": "exchangeable working correlation for gee"},
        "working_correlation": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
      }
    },
    "block_design": {
      "oneOf": [
        {"type": "object", "additionalProperties": false, "required": ["blocks", "weights"],
         "properties": {"blocks": {"type": "array"}, "weights": {"type": "array", "items": {"type": "number"}}}},
        {"type": "object", "additionalProperties": false, "required": ["csv"], "properties": {"csv": {"type": "string"}}}
      ]
    },
    "options": {
      "type": "object",
      "description": "task-specific settings",
      "additionalProperties": false,
      "properties": {
        "t_min": {"type": "integer", "minimum": 0},
        "t_max": {"type": "integer", "minimum": 0},
        "multistarts": {"type": "integer", "minimum": 1},
        "max_iters": {"type": "integer", "minimum": 1},
        "tol_obj": {"type": "number", "minimum": 0},
        "n": {"type": "integer", "minimum": 1, "description": "optimize-exact: number of trials"},
        "method": {"enum": ["anneal", "grid_exchange"]},
        "grid_step": {"type": "number", "exclusiveMinimum": 0},
        "anneal": {
          "type": "object",
          "additionalProperties": false,
          "properties": {
            "t0": {"type": "number", "minimum": 0},
            "probes": {"type": "integer", "minimum": 2},
            "cooling": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "steps": {"type": "integer", "minimum": 1},
            "radius_start": {"type": "number", "exclusiveMinimum": 0},
            "radius_end": {"type": "number", "exclusiveMinimum": 0}
          }
        },
        "construction": {"enum": ["canonical-logistic", "logistic-1d", "yang-zhang", "gamma-ofaat",
                                  "russell-poisson", "bayes-minimal-poisson"]},
        "oracle": {"enum": ["russell-poisson", "logistic-1d", "optimize"]},
        "n_draws": {"type": "integer", "minimum": 1},
        "grid": {
          "type": "object",
          "additionalProperties": false,
          "properties": {
            "step": {"type": "number", "exclusiveMinimum": 0},
            "lds_points": {"type": "integer", "minimum": 1},
            "refine_starts": {"type": "integer", "minimum": 0},
            "tolerance": {"type": "number", "minimum": 0}
          }
        }
      }
    },
    "output": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "directory": {"type": "string", "default": "."},
        "prefix": {"type": "string", "default": "optdes"},
        "sensitivity": {"type": "boolean", "default": false}
      }
    }
  },
  "$defs": {
    "design": {
      "oneOf": [
        {"type": "object", "additionalProperties": false, "required": ["points", "weights"],
         "properties": {"points": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                        "weights": {"type": "array", "items": {"type": "number"}}}},
        {"type": "object", "additionalProperties": false, "required": ["csv"], "properties": {"csv": {"type": "string"}}}
      ]
    }
  }
})schema";

bool is_one_of(const std::string& s, std::initializer_list<const char*> values) {
  for (const char* v : values)
    if (s == v) return true;
  return false;
}

std::string get_string(const Json& j, const std::string& key, const std::string& where, const std::string& fallback,
                       std::initializer_list<const char*> allowed) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ValidationError(where + "." + key + " must be a string");
  const std::string s = j[key].get<std::string>();
  if (allowed.size() && !is_one_of(s, allowed)) throw ValidationError(where + "." + key + " has unknown value '" + s + "'");
  return s;
}

std::uint64_t get_count(const Json& j, const std::string& key, const std::string& where, std::uint64_t fallback,
                        std::uint64_t minimum) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<long long>() < static_cast<long long>(minimum))
    throw ValidationError(where + "." + key + " must be an integer >= " + std::to_string(minimum));
  return j[key].get<std::uint64_t>();
}

double get_real(const Json& j, const std::string& key, const std::string& where, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number() || !std::isfinite(j[key].get<double>()))
    throw ValidationError(where + "." + key + " must be a finite number");
  return j[key].get<double>();
}

bool get_flag(const Json& j, const std::string& key, const std::string& where, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ValidationError(where + "." + key + " must be true or false");
  return j[key].get<bool>();
}

Prior parse_prior(const Json& j, std::size_t p) {
  require_keys(j, {"type", "theta", "lower", "upper", "draws", "weights"}, "prior");
  const std::string type = get_string(j, "type", "prior", "", {"point", "uniform_box", "sample"});
  const auto check_len = [&](const Vector& v, const char* what) {
    if (static_cast<std::size_t>(v.size()) != p)
      throw ValidationError(std::string("prior.") + what + " has " + std::to_string(v.size()) +
                            " entries; the model has p = " + std::to_string(p));
  };
  if (type == "point") {
    require_keys(j, {"type", "theta"}, "prior (point)");
    if (!j.contains("theta")) throw ValidationError("prior.theta is required for a point prior");
    const Vector theta = vector_from_json(j["theta"], "prior.theta");
    check_len(theta, "theta");
    return Prior::point(theta);
  }
  if (type == "uniform_box") {
    require_keys(j, {"type", "lower", "upper"}, "prior (uniform_box)");
    if (!j.contains("lower") || !j.contains("upper"))
      throw ValidationError("prior.lower and prior.upper are required for a uniform_box prior");
    const Vector lo = vector_from_json(j["lower"], "prior.lower");
    const Vector hi = vector_from_json(j["upper"], "prior.upper");
    check_len(lo, "lower");
    check_len(hi, "upper");
    std::vector<Interval> b;
    for (Eigen::Index i = 0; i < lo.size(); ++i) b.push_back({lo[i], hi[i]});
    return Prior::uniform_box(std::move(b));
  }
  require_keys(j, {"type", "draws", "weights"}, "prior (sample)");
  if (!j.contains("draws") || !j["draws"].is_array()) throw ValidationError("prior.draws must be an array");
  std::vector<ParameterVector> draws;
  for (const auto& d : j["draws"]) {
    draws.push_back(vector_from_json(d, "prior.draws"));
    check_len(draws.back(), "draws entry");
  }
  std::vector<double> w;
  if (j.contains("weights")) {
    const Vector v = vector_from_json(j["weights"], "prior.weights");
    w.assign(v.data(), v.data() + v.size());
  }
  return Prior::sample(std::move(draws), std::move(w));
}

ContinuousDesign parse_design(const Json& j, const std::string& where) {
  if (j.is_object() && j.contains("csv")) {
    require_keys(j, {"csv"}, where);
    if (!j["csv"].is_string()) throw ValidationError(where + ".csv must be a path");
    std::ifstream in(j["csv"].get<std::string>());
    if (!in) throw ValidationError("cannot read " + j["csv"].get<std::string>());
    return read_design_csv(in);
  }
  require_keys(j, {"points", "weights"}, where);
  return design_from_json(j);
}

BlockDesign parse_block_design(const Json& j) {
  if (j.is_object() && j.contains("csv")) {
    require_keys(j, {"csv"}, "block_design");
    if (!j["csv"].is_string()) throw ValidationError("block_design.csv must be a path");
    std::ifstream in(j["csv"].get<std::string>());
    if (!in) throw ValidationError("cannot read " + j["csv"].get<std::string>());
    return read_block_design_csv(in);
  }
  require_keys(j, {"blocks", "weights"}, "block_design");
  return block_design_from_json(j);
}

GridSpec parse_grid(const Json& options, GridSpec g) {
  if (!options.contains("grid")) return g;
  const Json& j = options["grid"];
  require_keys(j, {"step", "lds_points", "refine_starts", "tolerance"}, "options.grid");
  g.step = get_real(j, "step", "options.grid", g.step);
  if (!(g.step > 0.0)) throw ValidationError("options.grid.step must be positive");
  g.lds_points = get_count(j, "lds_points", "options.grid", g.lds_points, 1);
  g.refine_starts = get_count(j, "refine_starts", "options.grid", g.refine_starts, 0);
  g.tolerance = get_real(j, "tolerance", "options.grid", g.tolerance);
  if (g.tolerance < 0.0) throw ValidationError("options.grid.tolerance must be non-negative");
  return g;
}

ContinuousOptOptions parse_continuous(const Json& o, std::uint64_t seed, const SampleSpec& sample, GridSpec grid) {
  ContinuousOptOptions c;
  c.seed = seed;
  c.sample = sample;
  c.t_min = get_count(o, "t_min", "options", 0, 0);
  c.t_max = get_count(o, "t_max", "options", 0, 0);
  c.multistarts = get_count(o, "multistarts", "options", c.multistarts, 1);
  c.max_iters = get_count(o, "max_iters", "options", c.max_iters, 1);
  c.tol_obj = get_real(o, "tol_obj", "options", c.tol_obj);
  c.grid = parse_grid(o, grid);
  if (c.t_max && c.t_min > c.t_max) throw ValidationError("options.t_min exceeds options.t_max");
  return c;
}

// Keys of `options` each task understands.
void check_option_keys(const std::string& task, const Json& o) {
  if (task == "optimize" || task == "block-optimize")
    require_keys(o, {"t_min", "t_max", "multistarts", "max_iters", "tol_obj", "grid"}, "options (" + task + ")");
  else if (task == "optimize-exact")
    require_keys(o, {"n", "method", "grid_step", "multistarts", "anneal"}, "options (optimize-exact)");
  else if (task == "check" || task == "block-check")
    require_keys(o, {"grid"}, "options (" + task + ")");
  else if (task == "closed-form")
    require_keys(o, {"construction", "grid"}, "options (closed-form)");
  else if (task == "efficiency")
    require_keys(o, {}, "options (efficiency)");
  else if (task == "effdist")
    require_keys(o, {"oracle", "n_draws", "multistarts", "grid"}, "options (effdist)");
}

void write_file(const fs::path& path, const std::string& text, RunOutcome& out) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << text;
  if (!f) throw ValidationError("cannot write " + path.string());
  out.files.push_back(path);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

struct Context {
  std::string task;
  std::uint64_t seed = 1;
  ModelSpec model;
  Json options = Json::object();
  fs::path directory = ".";
  std::string prefix = "optdes";
  bool sensitivity = false;
  RunOutcome out;

  fs::path file(const std::string& suffix) const { return directory / (prefix + "_" + suffix); }

  Json report_header() const {
    Json j;
    j["task"] = task;
    j["seed"] = seed;
    j["model"] = model_fingerprint(model);
    return j;
  }

  void write_report(const Json& j) { write_file(file("report.json"), dump(j), out); }

  void write_sensitivity(const EquivalenceReport& r) {
    if (!sensitivity) return;
    std::ostringstream s;
    write_sensitivity_csv(s, r);
    write_file(file("sensitivity.csv"), s.str(), out);
  }

  void write_design(const ContinuousDesign& d) {
    std::ostringstream s;
    write_design_csv(s, d);
    write_file(file("design.csv"), s.str(), out);
    write_file(file("design.json"), dump(design_to_json(d, model)), out);
  }
};

std::string verdict(const EquivalenceReport& r) {
  std::ostringstream s;
  s << "min psi " << format_number(r.min_psi) << " (tolerance " << format_number(r.tolerance) << "), "
    << (r.is_optimal ? "equivalence check passed" : "equivalence check failed");
  return s.str();
}

std::string model_line(const ModelSpec& m) {
  return m.family.name() + " model with " + m.link.name() + " link, k = " + std::to_string(m.k()) +
         ", p = " + std::to_string(m.p());
}

ParameterVector point_theta(const Prior& prior, const std::string& task) {
  if (prior.kind() != PriorKind::point) throw ValidationError(task + " needs a point prior");
  return prior.theta();
}

SampleSpec parse_sampling(const Json& cfg, std::uint64_t seed) {
  SampleSpec s;
  s.seed = seed;
  if (!cfg.contains("sampling")) return s;
  const Json& j = cfg["sampling"];
  require_keys(j, {"n_draws", "method"}, "sampling");
  s.n_draws = get_count(j, "n_draws", "sampling", 1, 1);
  s.method = get_string(j, "method", "sampling", "lhs", {"lhs", "iid"}) == "iid" ? SamplingMethod::iid
                                                                                 : SamplingMethod::lhs;
  return s;
}

Prior require_prior(const Json& cfg, const ModelSpec& model, const std::string& task) {
  if (!cfg.contains("prior")) throw ValidationError("task " + task + " needs a prior");
  return parse_prior(cfg["prior"], model.p());
}

ApproximationMethod parse_approximation(const Json& j, std::size_t m) {
  const std::string kind = get_string(j, "approximation", "block", "ql", {"ql", "mql", "gee"});
  if (kind != "gee" && (j.contains("alpha") || j.contains("working_correlation")))
    throw ValidationError("block.alpha and block.working_correlation apply to gee only");
  if (kind == "ql") return ApproximationMethod::ql();
  if (kind == "mql") return ApproximationMethod::mql();
  if (j.contains("alpha") && j.contains("working_correlation"))
    throw ValidationError("give either block.alpha or block.working_correlation");
  if (j.contains("alpha")) return ApproximationMethod::gee_exchangeable(m, get_real(j, "alpha", "block", 0.0));
  if (j.contains("working_correlation")) {
    const Json& r = j["working_correlation"];
    if (!r.is_array() || r.size() != m) throw ValidationError("block.working_correlation must be m x m");
    Matrix R(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < m; ++a) {
      const Vector row = vector_from_json(r[a], "block.working_correlation");
      if (static_cast<std::size_t>(row.size()) != m) throw ValidationError("block.working_correlation must be m x m");
      R.row(static_cast<Eigen::Index>(a)) = row.transpose();
    }
    return ApproximationMethod::gee(R);
  }
  return ApproximationMethod::gee(Matrix());
}

RandomInterceptModel parse_block_model(const Json& cfg, const ModelSpec& model, ApproximationMethod& method) {
  if (!cfg.contains("block")) throw ValidationError("block tasks need a block section");
  const Json& j = cfg["block"];
  require_keys(j, {"sigma2", "m", "approximation", "alpha", "working_correlation"}, "block");
  if (!j.contains("sigma2") || !j.contains("m")) throw ValidationError("block.sigma2 and block.m are required");
  RandomInterceptModel rim{model, get_real(j, "sigma2", "block", 0.0), get_count(j, "m", "block", 1, 1)};
  rim.validate();
  method = parse_approximation(j, rim.m);
  return rim;
}

void task_optimize(const Json& cfg, Context& c) {
  const Prior prior = require_prior(cfg, c.model, c.task);
  const SampleSpec sample = parse_sampling(cfg, c.seed);
  const ContinuousOptOptions opts = parse_continuous(c.options, c.seed, sample, GridSpec{});
  const ContinuousResult res = optimize_continuous(c.model, prior, opts);
  c.write_design(res.design);
  Json rep = c.report_header();
  rep["objective"] = res.objective;
  rep["support_points"] = res.design.size();
  rep["equivalence"] = report_to_json(res.report);
  c.write_report(rep);
  c.write_sensitivity(res.report);
  c.out.summary = "optimize: " + model_line(c.model) + ". Found a " + std::to_string(res.design.size()) +
                  "-point design with objective " + format_number(res.objective) + "; " + verdict(res.report) + ".";
}

void task_optimize_exact(const Json& cfg, Context& c) {
  const Prior prior = require_prior(cfg, c.model, c.task);
  const SampleSpec sample = parse_sampling(cfg, c.seed);
  const Json& o = c.options;
  if (!o.contains("n")) throw ValidationError("options.n is required for optimize-exact");
  ExactOptOptions eo;
  eo.n = static_cast<int>(get_count(o, "n", "options", 0, 1));
  eo.method = get_string(o, "method", "options", "anneal", {"anneal", "grid_exchange"}) == "grid_exchange"
                  ? ExactMethod::grid_exchange
                  : ExactMethod::anneal;
  eo.grid_step = get_real(o, "grid_step", "options", eo.grid_step);
  if (!(eo.grid_step > 0.0)) throw ValidationError("options.grid_step must be positive");
  eo.multistarts = get_count(o, "multistarts", "options", eo.multistarts, 1);
  eo.seed = c.seed;
  eo.sample = sample;
  if (o.contains("anneal")) {
    const Json& a = o["anneal"];
    require_keys(a, {"t0", "probes", "cooling", "steps", "radius_start", "radius_end"}, "options.anneal");
    eo.anneal.t0 = get_real(a, "t0", "options.anneal", eo.anneal.t0);
    eo.anneal.probes = get_count(a, "probes", "options.anneal", eo.anneal.probes, 2);
    eo.anneal.cooling = get_real(a, "cooling", "options.anneal", eo.anneal.cooling);
    eo.anneal.steps = get_count(a, "steps", "options.anneal", eo.anneal.steps, 1);
    eo.anneal.radius_start = get_real(a, "radius_start", "options.anneal", eo.anneal.radius_start);
    eo.anneal.radius_end = get_real(a, "radius_end", "options.anneal", eo.anneal.radius_end);
    if (!(eo.anneal.cooling > 0.0 && eo.anneal.cooling < 1.0))
      throw ValidationError("options.anneal.cooling must lie in (0, 1)");
    if (!(eo.anneal.radius_start > 0.0 && eo.anneal.radius_end > 0.0))
      throw ValidationError("options.anneal radii must be positive");
  }
  const ExactResult res = optimize_exact(c.model, prior, eo);
  std::ostringstream s;
  write_exact_design_csv(s, res.design);
  write_file(c.file("design.csv"), s.str(), c.out);
  write_file(c.file("design.json"), dump(exact_design_to_json(res.design, c.model)), c.out);
  Json rep = c.report_header();
  rep["objective"] = res.objective;
  rep["n"] = res.design.n();
  rep["support_points"] = res.design.size();
  c.write_report(rep);
  c.out.summary = "optimize-exact: " + model_line(c.model) + ". Found a " + std::to_string(res.design.n()) +
                  "-trial design on " + std::to_string(res.design.size()) + " distinct points with objective " +
                  format_number(res.objective) + ".";
}

void task_check(const Json& cfg, Context& c) {
  const Prior prior = require_prior(cfg, c.model, c.task);
  if (!cfg.contains("design")) throw ValidationError("check needs a design");
  const ContinuousDesign d = parse_design(cfg["design"], "design");
  d.validate(c.model.region);
  const GridSpec grid = parse_grid(c.options, GridSpec{});
  const EquivalenceReport r = equivalence_check(d, c.model, prior, parse_sampling(cfg, c.seed), grid);
  Json rep = c.report_header();
  rep["equivalence"] = report_to_json(r);
  c.write_report(rep);
  c.write_sensitivity(r);
  c.out.summary = "check: " + model_line(c.model) + ". The " + std::to_string(d.size()) + "-point design has " +
                  verdict(r) + ".";
}

void task_closed_form(const Json& cfg, Context& c) {
  const Json& o = c.options;
  if (!o.contains("construction")) throw ValidationError("options.construction is required for closed-form");
  const std::string name = get_string(o, "construction", "options", "",
                                      {"canonical-logistic", "logistic-1d", "yang-zhang", "gamma-ofaat",
                                       "russell-poisson", "bayes-minimal-poisson"});
  const Prior prior = require_prior(cfg, c.model, c.task);
  const auto need = [&](FamilyKind fam, bool first_order, const char* what) {
    if (c.model.family.kind != fam || (first_order && !c.model.basis.is_first_order()))
      throw ValidationError("construction " + name + " needs " + what);
  };
  TheoremDesign td;
  ParameterVector theta;
  if (name == "canonical-logistic" || name == "logistic-1d") {
    need(FamilyKind::binomial, true, "a one-variable first-order logistic model");
    if (c.model.link.kind() != LinkKind::logistic || c.model.k() != 1)
      throw ValidationError("construction " + name + " needs a one-variable first-order logistic model");
    theta = name == "canonical-logistic" ? ParameterVector(Vector::Unit(2, 1)) : point_theta(prior, name);
    td = logistic_1d_design(theta[0], theta[1], c.model.region);
    td.quantities["c_star"] = canonical_logistic_constant().c_star;
  } else if (name == "yang-zhang") {
    need(FamilyKind::binomial, true, "a first-order logistic model");
    if (c.model.link.kind() != LinkKind::logistic)
      throw ValidationError("construction yang-zhang needs a first-order logistic model");
    theta = point_theta(prior, name);
    td = yang_zhang_design(theta, c.model.region);
  } else if (name == "gamma-ofaat") {
    need(FamilyKind::gamma, true, "a first-order gamma model");
    theta = point_theta(prior, name);
    GammaOfaatOutcome g = gamma_ofaat_design(theta, c.model.link);
    if (!g.design) throw PreconditionError(g.report);
    td = *g.design;
  } else if (name == "russell-poisson") {
    need(FamilyKind::poisson, true, "a first-order Poisson model");
    theta = point_theta(prior, name);
    td = russell_poisson_design(theta, c.model.region);
  } else {
    need(FamilyKind::poisson, true, "a first-order Poisson model");
    td = bayes_minimal_poisson_design(prior, c.model.region);
    theta = prior.mean();
  }
  const GridSpec grid = parse_grid(o, GridSpec{});
  const EquivalenceReport r = equivalence_check(td.design, c.model, ParameterSample::single(theta), grid);
  c.write_design(td.design);
  Json rep = c.report_header();
  rep["construction"] = name;
  rep["source"] = td.source;
  rep["fallback"] = td.fallback;
  Json q = Json::object();
  for (const auto& [k, v] : td.quantities) q[k] = v;
  rep["quantities"] = q;
  if (!td.a_star.empty()) rep["a_star"] = td.a_star;
  rep["theta"] = vector_to_json(theta);
  rep["equivalence"] = report_to_json(r);
  c.write_report(rep);
  c.write_sensitivity(r);
  c.out.summary = "closed-form (" + name + "): " + model_line(c.model) + ". Constructed a " +
                  std::to_string(td.design.size()) + "-point design" + (td.fallback ? " (numerical fallback)" : "") +
                  "; " + verdict(r) + ".";
}

void task_efficiency(const Json& cfg, Context& c) {
  const Prior prior = require_prior(cfg, c.model, c.task);
  if (!cfg.contains("design") || !cfg.contains("reference"))
    throw ValidationError("efficiency needs a design and a reference");
  const ContinuousDesign d = parse_design(cfg["design"], "design");
  const ContinuousDesign ref = parse_design(cfg["reference"], "reference");
  d.validate(c.model.region);
  ref.validate(c.model.region);
  const ParameterSample s = sample_prior(prior, parse_sampling(cfg, c.seed));
  const double od = bayes_objective(d, c.model, s);
  const double orf = bayes_objective(ref, c.model, s);
  if (!std::isfinite(orf)) throw SingularMatrixError("the reference design has a singular information matrix");
  const double eff = d_efficiency_from_objectives(od, orf, c.model.p());
  Json rep = c.report_header();
  rep["objective"] = od;
  rep["reference_objective"] = orf;
  rep["efficiency"] = eff;
  c.write_report(rep);
  c.out.summary = "efficiency: " + model_line(c.model) + ". D-efficiency relative to the reference is " +
                  format_number(eff) + ".";
}

void task_effdist(const Json& cfg, Context& c) {
  const Prior prior = require_prior(cfg, c.model, c.task);
  if (!cfg.contains("design")) throw ValidationError("effdist needs a design");
  const ContinuousDesign d = parse_design(cfg["design"], "design");
  d.validate(c.model.region);
  const Json& o = c.options;
  const std::size_t n = get_count(o, "n_draws", "options", 1000, 1);
  EfficiencyDistribution dist;
  if (cfg.contains("reference")) {
    if (o.contains("oracle")) throw ValidationError("give either a reference design or options.oracle");
    const ContinuousDesign ref = parse_design(cfg["reference"], "reference");
    ref.validate(c.model.region);
    dist = efficiency_distribution(d, ref, c.model, prior, n, c.seed);
  } else {
    if (!o.contains("oracle")) throw ValidationError("effdist needs a reference design or options.oracle");
    const std::string oracle = get_string(o, "oracle", "options", "", {"russell-poisson", "logistic-1d", "optimize"});
    ContinuousOptOptions opt = parse_continuous(Json{{"multistarts", get_count(o, "multistarts", "options", 4, 1)}},
                                                c.seed, SampleSpec{}, parse_grid(o, GridSpec{}));
    const ModelSpec& model = c.model;
    LocalOracle fn;
    if (oracle == "russell-poisson") {
      if (model.family.kind != FamilyKind::poisson || !model.basis.is_first_order())
        throw ValidationError("oracle russell-poisson needs a first-order Poisson model");
      fn = [&](const ParameterVector& t) { return russell_poisson_design(t, model.region).design; };
    } else if (oracle == "logistic-1d") {
      if (model.link.kind() != LinkKind::logistic || model.k() != 1 || !model.basis.is_first_order())
        throw ValidationError("oracle logistic-1d needs a one-variable first-order logistic model");
      fn = [&](const ParameterVector& t) { return logistic_1d_design(t[0], t[1], model.region).design; };
    } else {
      fn = [&](const ParameterVector& t) {
        return optimize_continuous(model, ParameterSample::single(t), opt).design;
      };
    }
    dist = efficiency_distribution(d, fn, model, prior, n, c.seed);
  }
  std::ostringstream s;
  write_ecdf_csv(s, dist);
  write_file(c.file("ecdf.csv"), s.str(), c.out);
  Json rep = c.report_header();
  rep["ecdf"] = ecdf_summary_to_json(dist);
  c.write_report(rep);
  c.out.summary = "effdist: " + model_line(c.model) + ". Over " + std::to_string(dist.efficiencies.size()) +
                  " prior draws the efficiency ranges from " + format_number(dist.min) + " to " +
                  format_number(dist.max) + " with median " + format_number(dist.median) + ".";
}

void task_block(const Json& cfg, Context& c, bool optimize) {
  const Prior prior = require_prior(cfg, c.model, c.task);
  const ParameterVector theta = point_theta(prior, c.task);
  ApproximationMethod method;
  const RandomInterceptModel rim = parse_block_model(cfg, c.model, method);
  const std::string approx = approximation_name(method.kind);
  Json rep = c.report_header();
  rep["approximation"] = approx;
  EquivalenceReport r;
  std::size_t blocks = 0;
  if (optimize) {
    const ContinuousOptOptions opts = parse_continuous(c.options, c.seed, SampleSpec{}, block_grid());
    const BlockResult res = optimize_block_design(rim, theta, method, opts);
    std::ostringstream s;
    write_block_design_csv(s, res.design);
    write_file(c.file("design.csv"), s.str(), c.out);
    write_file(c.file("design.json"), dump(block_design_to_json(res.design, c.model)), c.out);
    rep["objective"] = res.objective;
    r = res.report;
    blocks = res.design.size();
  } else {
    if (!cfg.contains("block_design")) throw ValidationError("block-check needs a block_design");
    const BlockDesign d = parse_block_design(cfg["block_design"]);
    d.validate(rim);
    r = block_equivalence_check(d, rim, theta, method, parse_grid(c.options, block_grid()));
    rep["objective"] = d_objective(block_design_info(d, rim, theta, method));
    blocks = d.size();
  }
  rep["equivalence"] = report_to_json(r);
  c.write_report(rep);
  c.write_sensitivity(r);
  c.out.summary = c.task + " (" + approx + "): " + model_line(c.model) + " with blocks of size " +
                  std::to_string(rim.m) + ". The " + std::to_string(blocks) + "-block design has " + verdict(r) + ".";
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : path) {
    if (ch == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  for (const auto& p : parts)
    if (p.empty()) throw ValidationError("override path '" + path + "' has an empty component");
  return parts;
}

}  // namespace

const Json& config_schema() {
  static const Json schema = Json::parse(kSchemaText);
  return schema;
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ValidationError("override '" + assignment + "' must look like path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json* node = &config;
  for (const auto& part : split_path(path)) {
    if (node->is_array()) {
      std::size_t idx = 0;
      const auto res = std::from_chars(part.data(), part.data() + part.size(), idx);
      if (res.ec != std::errc() || res.ptr != part.data() + part.size() || idx >= node->size())
        throw ValidationError("override path '" + path + "' has a bad array index '" + part + "'");
      node = &(*node)[idx];
    } else {
      if (!node->is_null() && !node->is_object())
        throw ValidationError("override path '" + path + "' descends into a non-object");
      node = &(*node)[part];
    }
  }
  *node = std::move(value);
}

RunOutcome run_config(const Json& cfg) {
  require_keys(cfg, {"task", "seed", "model", "prior", "sampling", "design", "reference", "block", "block_design",
                     "options", "output"},
               "configuration");
  Context c;
  c.task = get_string(cfg, "task", "configuration", "",
                      {"optimize", "optimize-exact", "check", "closed-form", "efficiency", "effdist",
                       "block-optimize", "block-check"});
  if (c.task.empty()) throw ValidationError("configuration.task is required");
  c.seed = get_count(cfg, "seed", "configuration", 1, 0);
  if (!cfg.contains("model")) throw ValidationError("configuration.model is required");
  c.model = model_from_json(cfg["model"]);
  if (cfg.contains("options")) c.options = cfg["options"];
  check_option_keys(c.task, c.options);
  if (cfg.contains("output")) {
    const Json& o = cfg["output"];
    require_keys(o, {"directory", "prefix", "sensitivity"}, "output");
    c.directory = get_string(o, "directory", "output", ".", {});
    c.prefix = get_string(o, "prefix", "output", "optdes", {});
    c.sensitivity = get_flag(o, "sensitivity", "output", false);
  }
  std::error_code ec;
  fs::create_directories(c.directory, ec);
  if (ec) throw ValidationError("cannot create output directory " + c.directory.string());

  if (c.task == "optimize") task_optimize(cfg, c);
  else if (c.task == "optimize-exact") task_optimize_exact(cfg, c);
  else if (c.task == "check") task_check(cfg, c);
  else if (c.task == "closed-form") task_closed_form(cfg, c);
  else if (c.task == "efficiency") task_efficiency(cfg, c);
  else if (c.task == "effdist") task_effdist(cfg, c);
  else if (c.task == "block-optimize") task_block(cfg, c, true);
  else task_block(cfg, c, false);
  return c.out;
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Json::exception& e) {
    err << "invalid JSON: " << e.what() << "\n";
    return kExitValidation;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const SingularMatrixError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace optdes
