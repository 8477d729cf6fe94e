#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shellcond/adc.h"
#include "shellcond/errors.h"
#include "shellcond/geometry.h"
#include "shellcond/profile.h"
#include "shellcond/revolve.h"

#include "test_support.h"

#include <cmath>

using namespace shellcond;

TEST_CASE("axial ADC and area match high-precision quadrature") {
  const auto golden = testsupport::loadGolden("revolve_analytic.json");
  for (const auto& [expr, vals] : golden.items()) {
    CAPTURE(expr);
    const RevolutionProfile p = RevolutionProfile::fromExpression(expr);
    const double ka = adc_axial_analytic(p, 1e-12);
    const double area = revolution_area(p, 1e-12);
    CHECK(std::abs(ka - vals.at("kaAxial").get<double>()) < 1e-11);
    CHECK(std::abs(area - vals.at("area").get<double>()) < 1e-10);
    CHECK(ka > 0);
    CHECK(ka <= 1.0);
  }
}

TEST_CASE("cylinder attains the axial optimum") {
  const RevolutionProfile p = RevolutionProfile::constant(0.4);
  CHECK(adc_axial_analytic(p, 1e-12) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(revolution_area(p, 1e-12) == doctest::Approx(2 * M_PI * 0.4 * 2).epsilon(1e-13));
}

TEST_CASE("revolved mesh structure and convergence") {
  const RevolutionProfile p = RevolutionProfile::fromExpression("(2+cos(pi*x))/4");
  const double areaRef = revolution_area(p, 1e-12);
  const double kaRef = adc_axial_analytic(p, 1e-12);

  double prevAreaErr = 0, prevKaErr = 0;
  for (const int nx : {32, 64}) {
    const PeriodicSurfaceMesh mesh = revolve_mesh(p, nx, 2 * nx);
    CHECK_NOTHROW(mesh.validateOrThrow());
    CHECK(mesh.vertexCount() == nx * 2 * nx);
    CHECK(euler_characteristic(mesh) == 0);

    const GeometryCache cache = build_geometry(mesh);
    const AdcResult adc = adc_matrix(mesh, cache, 1.0);
    const double areaErr = std::abs(cache.totalArea - areaRef) / areaRef;
    const double kaErr = std::abs(adc.kA(0, 0) - kaRef) / kaRef;
    CHECK(areaErr < 0.01);
    CHECK(kaErr < 0.01);
    if (prevAreaErr > 0) {
      // Halving h divides both errors by about four.
      CHECK(prevAreaErr / areaErr > 3.0);
      CHECK(prevAreaErr / areaErr < 5.5);
      CHECK(prevKaErr / kaErr > 3.0);
      CHECK(prevKaErr / kaErr < 5.5);
    }
    prevAreaErr = areaErr;
    prevKaErr = kaErr;
  }

  CHECK_THROWS_AS(revolve_mesh(p, 4, 64), InputError);
  CHECK_THROWS_AS(revolve_mesh(RevolutionProfile::constant(0.3), 8, 4), InputError);
}

TEST_CASE("shell conductivity of a straight tube is the exact annulus value") {
  const double r = 0.3, eps = 0.05;
  const ShellConductivity sc =
      effective_conductivity_shell(RevolutionProfile::constant(r), eps, 64, 4);
  CHECK(sc.kappaEps == doctest::Approx(M_PI * r * eps).epsilon(1e-12));
  CHECK(sc.rhoEps == doctest::Approx(2 * eps * 2 * M_PI * r * 2 / 8).epsilon(1e-12));
  CHECK(sc.grid.N == 64);
  CHECK(sc.grid.M == 4);
  CHECK(sc.grid.s.size() == 64 * 5);
}

TEST_CASE("shell residual shrinks at third order") {
  const RevolutionProfile p = RevolutionProfile::fromExpression("(2+cos(pi*x))/4");
  const double ka = adc_axial_analytic(p, 1e-12);
  double logs[3][2];
  int i = 0;
  for (const double eps : {0.1, 0.05, 0.025}) {
    const ShellConductivity sc = effective_conductivity_shell(p, eps, 1024, 8);
    const double resid = std::abs(sc.kappaEps - sc.rhoEps * ka);
    logs[i][0] = std::log(eps);
    logs[i][1] = std::log(resid);
    ++i;
  }
  const double slope01 = (logs[1][1] - logs[0][1]) / (logs[1][0] - logs[0][0]);
  const double slope12 = (logs[2][1] - logs[1][1]) / (logs[2][0] - logs[1][0]);
  CHECK(slope01 > 2.5);
  CHECK(slope12 > 2.5);
}

TEST_CASE("shell parameter guards") {
  const RevolutionProfile p = RevolutionProfile::fromExpression("(2+cos(pi*x))/4");
  CHECK_THROWS_AS(effective_conductivity_shell(p, 0.0, 64, 8), InputError);
  CHECK_THROWS_AS(effective_conductivity_shell(p, 0.05, 8, 8), InputError);
  CHECK_THROWS_AS(effective_conductivity_shell(p, 0.05, 64, 2), InputError);
  // Curvature radius at the waist is 1/4; a shell thicker than that folds over.
  CHECK_THROWS_AS(effective_conductivity_shell(p, 0.3, 64, 8), InputError);
}
