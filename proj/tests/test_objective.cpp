#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shellcond/errors.h"
#include "shellcond/objective.h"

#include <Eigen/Dense>

#include <cstdio>
#include <fstream>
#include <string>

using namespace shellcond;

namespace {
Eigen::Matrix3d diag(double a, double b, double c) {
  return Eigen::Vector3d(a, b, c).asDiagonal();
}

std::string writeTemp(const std::string& name, const std::string& text) {
  const std::string path = std::string("/tmp/") + name;
  std::ofstream out(path);
  out << text;
  return path;
}
}  // namespace

TEST_CASE("single tokens") {
  const Eigen::Matrix3d kA = diag(0.6, 0.5, 0.4);

  CHECK(evaluate_objective(parse_objective("aac"), kA).value == doctest::Approx(0.5));
  CHECK(evaluate_objective(parse_objective("k11"), kA).value == doctest::Approx(0.6));
  CHECK(evaluate_objective(parse_objective("k33"), kA).value == doctest::Approx(0.4));
  CHECK(evaluate_objective(parse_objective("isogap"), kA).value ==
        doctest::Approx(0.2).epsilon(1e-12));

  Eigen::Matrix3d withOff = kA;
  withOff(0, 1) = withOff(1, 0) = 0.07;
  CHECK(evaluate_objective(parse_objective("k12"), withOff).value == doctest::Approx(0.07));
}

TEST_CASE("weighted sums and signs") {
  const Eigen::Matrix3d kA = diag(0.6, 0.5, 0.4);
  CHECK(evaluate_objective(parse_objective("k11 - k22"), kA).value == doctest::Approx(0.1));
  CHECK(evaluate_objective(parse_objective("-k11+2*k33"), kA).value == doctest::Approx(0.2));
  CHECK(evaluate_objective(parse_objective(" 0.5*k11 +  aac "), kA).value ==
        doctest::Approx(0.8));
  CHECK(evaluate_objective(parse_objective("k33 + aac - 4*isogap"), kA).value ==
        doctest::Approx(0.4 + 0.5 - 0.8));
}

TEST_CASE("derivative matrix matches the value definition") {
  const ObjectiveSpec spec = parse_objective("k11 + 2*k12 - 0.5*aac");
  const Eigen::Matrix3d kA = diag(0.6, 0.5, 0.4);
  const ObjectiveEval ev = evaluate_objective(spec, kA);
  // f is linear here, so f(kA + dK) - f(kA) = <dfdk, dK> exactly.
  Eigen::Matrix3d dK = Eigen::Matrix3d::Zero();
  dK(0, 0) = 0.01;
  dK(0, 1) = dK(1, 0) = -0.02;
  dK(2, 2) = 0.005;
  const double moved = evaluate_objective(spec, kA + dK).value;
  CHECK(moved - ev.value == doctest::Approx(ev.dfdk.cwiseProduct(dK).sum()).epsilon(1e-12));
}

TEST_CASE("isotropy gap degeneracy is flagged") {
  const ObjectiveSpec spec = parse_objective("isogap");
  CHECK_FALSE(evaluate_objective(spec, diag(0.6, 0.5, 0.4)).degenerateIsoGap);
  CHECK(evaluate_objective(spec, diag(0.5, 0.5, 0.5)).degenerateIsoGap);
  CHECK(evaluate_objective(spec, diag(0.6, 0.6, 0.4)).degenerateIsoGap);
}

TEST_CASE("minimize negates value and derivative") {
  ObjectiveSpec spec = parse_objective("k11");
  spec.sense = ObjectiveSpec::Sense::Minimize;
  const ObjectiveEval ev = evaluate_objective(spec, diag(0.6, 0.5, 0.4));
  CHECK(ev.value == doctest::Approx(-0.6));
  CHECK(ev.dfdk(0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("grammar errors carry a position diagnostic") {
  for (const char* bad : {"", "k14", "2*", "aac aac", "k11 +", "*k11", "2k11", "k11 & k22",
                          "target", "target(", "target()", "magic"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_objective(bad), ParseError);
  }
  try {
    parse_objective("k11 + blob");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("blob") != std::string::npos);
    CHECK(msg.find("position") != std::string::npos);
  }
}

TEST_CASE("target files: bare, wrapped, infeasible") {
  const std::string bare =
      writeTemp("sc_target_bare.json", "[[0.5,0,0],[0,0.5,0],[0,0,0.5]]");
  const std::string wrapped =
      writeTemp("sc_target_wrapped.json", "{\"target\": [[0.6,0,0],[0,0.6,0],[0,0,0.2]]}");

  const ObjectiveSpec a = parse_objective("target(" + bare + ")");
  REQUIRE(a.target.has_value());
  CHECK((*a.target)(1, 1) == doctest::Approx(0.5));

  const ObjectiveSpec b = parse_objective("2*target(" + wrapped + ")");
  REQUIRE(b.target.has_value());
  CHECK(b.targetWeight == doctest::Approx(2.0));

  // Distance objective: value -w*|kA - T|_F, flag at the exact minimum.
  const ObjectiveEval at = evaluate_objective(a, diag(0.5, 0.5, 0.5));
  CHECK(at.value == doctest::Approx(0.0));
  CHECK(at.targetAtMinimum);
  const ObjectiveEval off = evaluate_objective(a, diag(0.6, 0.5, 0.5));
  CHECK(off.value == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK_FALSE(off.targetAtMinimum);

  CHECK_THROWS_AS(parse_objective("target(" + bare + ")+target(" + wrapped + ")"), ParseError);
  CHECK_THROWS_AS(parse_objective("target(/tmp/sc_no_such_file.json)"), InputError);

  const std::string tooBig =
      writeTemp("sc_target_big.json", "[[1.5,0,0],[0,0.1,0],[0,0,0.1]]");
  CHECK_THROWS_AS(parse_objective("target(" + tooBig + ")"), InputError);
  const std::string asym =
      writeTemp("sc_target_asym.json", "[[0.5,0.2,0],[0,0.5,0],[0,0,0.5]]");
  CHECK_THROWS_AS(parse_objective("target(" + asym + ")"), InputError);
  const std::string trace =
      writeTemp("sc_target_trace.json", "[[0.8,0,0],[0,0.8,0],[0,0,0.7]]");
  CHECK_THROWS_AS(parse_objective("target(" + trace + ")"), InputError);
  std::remove(bare.c_str());
  std::remove(wrapped.c_str());
  std::remove(tooBig.c_str());
  std::remove(asym.c_str());
  std::remove(trace.c_str());
}

TEST_CASE("validate_target accepts the feasible region boundary") {
  CHECK_NOTHROW(validate_target(diag(1.0, 1.0, 0.0)));
  CHECK_NOTHROW(validate_target(diag(2.0 / 3, 2.0 / 3, 2.0 / 3)));
  CHECK_THROWS_AS(validate_target(diag(1.0 + 1e-6, 0.0, 0.0)), InputError);
  CHECK_THROWS_AS(validate_target(diag(-0.1, 0.5, 0.5)), InputError);
}

TEST_CASE("target grid enumeration") {
  CHECK_THROWS_AS(sample_targets(0.0), InputError);
  CHECK_THROWS_AS(sample_targets(-0.5), InputError);

  const auto one = sample_targets(1.0);
  CHECK(one.size() == 6);  // permutations of diag(1,0,0) and diag(1,1,0)

  const auto half = sample_targets(0.5);
  CHECK(half.size() == 22);

  const auto fifth = sample_targets(0.2);
  bool found = false;
  for (const auto& t : half) CHECK_NOTHROW(validate_target(t));
  for (const auto& t : fifth) {
    CHECK_NOTHROW(validate_target(t));
    if ((t - diag(0.2, 0.4, 0.6)).cwiseAbs().maxCoeff() < 1e-12) found = true;
  }
  CHECK(found);
}
