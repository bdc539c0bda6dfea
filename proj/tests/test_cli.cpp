#include "optdes/errors.hpp"
#include "optdes/parallel.hpp"
#include "reproduce.hpp"
#include "run.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace optdes;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("optdes_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json logistic_config(const fs::path& dir) {
  Json c = Json::parse(R"({
    "task": "optimize",
    "model": {"family": "binomial", "link": "logistic", "basis": "first_order",
              "region": {"bounds": [[-1, 1], [-1, 1]]}},
    "prior": {"type": "point", "theta": [1, 2, 2]},
    "output": {"prefix": "t", "sensitivity": true}
  })");
  c["output"]["directory"] = dir.string();
  return c;
}

int code_of(const Json& config) {
  try {
    run_config(config);
    return kExitOk;
  } catch (...) {
    std::ostringstream err;
    return exit_code_for_current_exception(err);
  }
}

}  // namespace

TEST_CASE("dotted overrides set nested values and array entries") {
  Json c = Json::parse(R"({"prior": {"theta": [0, 1]}, "options": {}})");
  apply_override(c, "options.multistarts=4");
  apply_override(c, "prior.theta.1=0.5");
  apply_override(c, "output.prefix=run1");
  CHECK(c["options"]["multistarts"] == 4);
  CHECK(c["prior"]["theta"][1] == 0.5);
  CHECK(c["output"]["prefix"] == "run1");
  CHECK_THROWS_AS(apply_override(c, "prior.theta.7=1"), ValidationError);
  CHECK_THROWS_AS(apply_override(c, "no_equals_sign"), ValidationError);
}

TEST_CASE("the configuration schema is valid JSON describing every task") {
  const Json& s = config_schema();
  CHECK(s.is_object());
  const std::string text = s.dump();
  for (const char* task : {"optimize", "optimize-exact", "check", "closed-form", "efficiency", "effdist",
                           "block-optimize", "block-check"})
    CHECK(text.find(task) != std::string::npos);
}

TEST_CASE("optimize run writes its artifacts") {
  const fs::path dir = scratch("optimize");
  const RunOutcome out = run_config(logistic_config(dir));
  for (const char* f : {"t_design.csv", "t_design.json", "t_report.json", "t_sensitivity.csv"})
    CHECK(fs::exists(dir / f));
  const Json report = Json::parse(slurp(dir / "t_report.json"));
  CHECK(report.dump().find("min_psi") != std::string::npos);
  CHECK_FALSE(out.summary.empty());
}

TEST_CASE("outputs are byte identical across thread counts") {
  const fs::path a = scratch("threads1");
  const fs::path b = scratch("threads4");
  set_thread_count(1);
  run_config(logistic_config(a));
  set_thread_count(4);
  run_config(logistic_config(b));
  set_thread_count(0);
  for (const char* f : {"t_design.csv", "t_design.json", "t_report.json", "t_sensitivity.csv"})
    CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("configuration errors map to their exit codes") {
  const fs::path dir = scratch("errors");
  Json bad_weights = Json::parse(R"({
    "task": "check",
    "model": {"family": "binomial", "link": "logistic", "basis": "first_order",
              "region": {"bounds": [[-1, 1]]}},
    "prior": {"type": "point", "theta": [0, 1]},
    "design": {"points": [[-1], [1]], "weights": [0.5, 0.4]}
  })");
  bad_weights["output"]["directory"] = dir.string();
  CHECK(code_of(bad_weights) == kExitValidation);

  Json unknown = logistic_config(dir);
  unknown["colour"] = "red";
  CHECK(code_of(unknown) == kExitValidation);

  Json poisson = Json::parse(R"({
    "task": "closed-form",
    "model": {"family": "poisson", "link": "log", "basis": "first_order",
              "region": {"bounds": [[0, 1], [0, 1]]}},
    "prior": {"type": "point", "theta": [0, 3, 3]},
    "options": {"construction": "russell-poisson"}
  })");
  poisson["output"]["directory"] = dir.string();
  CHECK(code_of(poisson) == kExitOk);
  apply_override(poisson, "prior.theta.1=0.5");
  CHECK(code_of(poisson) == kExitPrecondition);
}

TEST_CASE("reproduction registry") {
  CHECK_FALSE(reproduction_ids().empty());
  CHECK_THROWS_AS(reproduce("no-such-table"), ValidationError);
  const Reproduction r = reproduce("poisson-beta");
  CHECK(r.pass());
  std::ostringstream csv;
  write_cells_csv(csv, r);
  CHECK(csv.str().rfind("label,computed,golden,tolerance,comparison,pass\n", 0) == 0);
}
