#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shellcond/errors.h"
#include "shellcond/profile.h"

#include "test_support.h"

#include <cmath>

using namespace shellcond;

namespace {
void checkClose(double got, double want, double tol) {
  CHECK(std::abs(got - want) <= tol * std::max(1.0, std::abs(want)));
}
}  // namespace

TEST_CASE("symbolic derivatives match high-precision numeric samples") {
  const auto golden = testsupport::loadGolden("profile_samples.json");
  for (const auto& [expr, rows] : golden.items()) {
    CAPTURE(expr);
    const RevolutionProfile p = RevolutionProfile::fromExpression(expr);
    CHECK(p.expression() == expr);
    for (const auto& row : rows) {
      const double x = row.at("x").get<double>();
      CAPTURE(x);
      checkClose(p.R(x), row.at("R").get<double>(), 1e-12);
      checkClose(p.dR(x), row.at("dR").get<double>(), 1e-12);
      checkClose(p.ddR(x), row.at("ddR").get<double>(), 1e-11);
    }
  }
}

TEST_CASE("constant profile") {
  const RevolutionProfile p = RevolutionProfile::constant(0.3);
  CHECK(p.R(0.37) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(p.dR(-0.8) == 0.0);
  CHECK(p.ddR(0.1) == 0.0);
}

TEST_CASE("expression evaluation basics") {
  CHECK(parse_expression("2*3+4")->eval(0) == doctest::Approx(10));
  CHECK(parse_expression("2+3*4")->eval(0) == doctest::Approx(14));
  CHECK(parse_expression("(2+3)*4")->eval(0) == doctest::Approx(20));
  CHECK(parse_expression("-x^2")->eval(3) == doctest::Approx(-9));
  CHECK(parse_expression("2/4/2")->eval(0) == doctest::Approx(0.25));
  CHECK(parse_expression("cos(pi)")->eval(0) == doctest::Approx(-1));
  CHECK(parse_expression("x^3")->derivative()->eval(2) == doctest::Approx(12));
}

TEST_CASE("grammar errors raise ParseError") {
  CHECK_THROWS_AS(parse_expression(""), ParseError);
  CHECK_THROWS_AS(parse_expression("2+"), ParseError);
  CHECK_THROWS_AS(parse_expression("(2"), ParseError);
  CHECK_THROWS_AS(parse_expression("cos()"), ParseError);
  CHECK_THROWS_AS(parse_expression("x^2.5"), ParseError);
  CHECK_THROWS_AS(parse_expression("foo(x)"), ParseError);
  CHECK_THROWS_AS(parse_expression("2 3"), ParseError);
  CHECK_THROWS_AS(parse_expression("x y"), ParseError);
}

TEST_CASE("invalid radius profiles raise InputError") {
  CHECK_THROWS_AS(RevolutionProfile::fromExpression("0"), InputError);
  CHECK_THROWS_AS(RevolutionProfile::fromExpression("-0.3"), InputError);
  CHECK_THROWS_AS(RevolutionProfile::fromExpression("cos(pi*x)"), InputError);
  // zero at x = 0
  CHECK_THROWS_AS(RevolutionProfile::fromExpression("0.5-0.5*cos(pi*x)"), InputError);
  // value mismatch across the period
  CHECK_THROWS_AS(RevolutionProfile::fromExpression("2+x"), InputError);
  // slope mismatch across the period
  CHECK_THROWS_AS(RevolutionProfile::fromExpression("2+cos(pi*x/2)"), InputError);
}
