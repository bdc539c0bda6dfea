#include "optdes/errors.hpp"
#include "optdes/io.hpp"

#include <doctest.h>

#include <sstream>

using namespace optdes;

namespace {

Point pt(double a, double b) {
  Point x(2);
  x << a, b;
  return x;
}

}  // namespace

TEST_CASE("numbers are written shortest-unambiguous and parse back exactly") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(0.5) == "0.5");
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 123456.789}) CHECK(parse_number(format_number(v)) == v);
  CHECK(parse_number(" +1.5 ") == 1.5);
  CHECK_THROWS_AS(parse_number("1.5x"), ValidationError);
  CHECK_THROWS_AS(parse_number(""), ValidationError);
}

TEST_CASE("continuous design CSV round trip is byte identical") {
  const ContinuousDesign d{{pt(-1, 0.1), pt(1.0 / 3.0, 1)}, {0.3, 0.7}};
  std::ostringstream a;
  write_design_csv(a, d);
  CHECK(a.str().rfind("x_1,x_2,weight\n", 0) == 0);
  std::istringstream in(a.str());
  const ContinuousDesign e = read_design_csv(in);
  CHECK(e.points == d.points);
  CHECK(e.weights == d.weights);
  std::ostringstream b;
  write_design_csv(b, e);
  CHECK(a.str() == b.str());
}

TEST_CASE("exact and block design CSV round trips") {
  const ExactDesign x{{pt(0, 0), pt(1, 0.25)}, {2, 3}};
  std::ostringstream a;
  write_exact_design_csv(a, x);
  std::istringstream ina(a.str());
  const ExactDesign y = read_exact_design_csv(ina);
  CHECK(y.points == x.points);
  CHECK(y.reps == x.reps);

  const BlockDesign b{{{pt(0, 0), pt(0.5, 1)}, {pt(1, 1), pt(0.2, 0.3)}}, {0.4, 0.6}};
  std::ostringstream c;
  write_block_design_csv(c, b);
  CHECK(c.str().rfind("block_id,point_index,x_1,x_2,block_weight\n", 0) == 0);
  std::istringstream inc(c.str());
  const BlockDesign e = read_block_design_csv(inc);
  REQUIRE(e.size() == 2);
  CHECK(e.blocks[1][1] == pt(0.2, 0.3));
  CHECK(e.weights == b.weights);
  std::ostringstream f;
  write_block_design_csv(f, e);
  CHECK(c.str() == f.str());
}

TEST_CASE("malformed CSV input is rejected") {
  std::istringstream no_weight("x1,x2\n0,1\n");
  CHECK_THROWS_AS(read_design_csv(no_weight), ValidationError);
  std::istringstream bad_number("x1,weight\nabc,1\n");
  CHECK_THROWS_AS(read_design_csv(bad_number), ValidationError);
  std::istringstream gap("block_id,point_index,x1,block_weight\n2,1,0,1\n");
  CHECK_THROWS_AS(read_block_design_csv(gap), ValidationError);
}

TEST_CASE("unknown configuration keys are named in the error") {
  const Json j = Json::parse(R"({"points": [], "colour": 1})");
  try {
    require_keys(j, {"points", "weights"}, "design");
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
  }
  CHECK_THROWS_AS(require_keys(Json::array(), {"a"}, "x"), ValidationError);
}

TEST_CASE("model JSON round trip preserves the model and its fingerprint") {
  const ModelSpec m =
      make_model(FamilyKind::gamma, LinkFunction::power(0.5), ModelBasis::second_order(2), DesignRegion::cube(2, 0, 1));
  const ModelSpec n = model_from_json(model_to_json(m));
  CHECK(n.family.kind == m.family.kind);
  CHECK(n.link == m.link);
  CHECK(n.basis == m.basis);
  CHECK(n.region == m.region);
  CHECK(model_fingerprint(n) == model_fingerprint(m));
  const ModelSpec other =
      make_model(FamilyKind::gamma, LinkFunction::power(1.0), ModelBasis::second_order(2), DesignRegion::cube(2, 0, 1));
  CHECK(model_fingerprint(other) != model_fingerprint(m));
}

TEST_CASE("design JSON round trip") {
  const ModelSpec m = make_model(FamilyKind::binomial, LinkFunction::logistic(), ModelBasis::first_order(2),
                                 DesignRegion::cube(2, -1, 1));
  const ContinuousDesign d{{pt(-1, 1), pt(0.25, -1)}, {0.5, 0.5}};
  const ContinuousDesign e = design_from_json(design_to_json(d, m));
  CHECK(e.points == d.points);
  CHECK(e.weights == d.weights);
  CHECK_THROWS_AS(vector_from_json(Json::parse(R"([1, "a"])"), "theta"), ValidationError);
}
