#include "shellcond/adc.h"
#include "shellcond/geometry.h"
#include "shellcond/gradient.h"
#include "shellcond/implicit.h"
#include "shellcond/objective.h"
#include "shellcond/remesh.h"
#include "shellcond/revolve.h"

#include <benchmark/benchmark.h>

namespace {

using namespace shellcond;

const PeriodicSurfaceMesh& gyroidMesh(int res) {
  static std::map<int, PeriodicSurfaceMesh> cache;
  auto it = cache.find(res);
  if (it == cache.end()) {
    ImplicitSpec spec;
    spec.kind = ImplicitSpec::Kind::Gyroid;
    spec.resolution = res;
    it = cache.emplace(res, generate_implicit(spec)).first;
  }
  return it->second;
}

void BM_GenerateImplicit(benchmark::State& state) {
  ImplicitSpec spec;
  spec.kind = ImplicitSpec::Kind::Gyroid;
  spec.resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_implicit(spec).faceCount());
  state.SetLabel("vertices=" + std::to_string(generate_implicit(spec).vertexCount()));
}
BENCHMARK(BM_GenerateImplicit)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BuildGeometry(benchmark::State& state) {
  const PeriodicSurfaceMesh& mesh = gyroidMesh(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_geometry(mesh).totalArea);
}
BENCHMARK(BM_BuildGeometry)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_AdcMatrix(benchmark::State& state) {
  const PeriodicSurfaceMesh& mesh = gyroidMesh(static_cast<int>(state.range(0)));
  const GeometryCache cache = build_geometry(mesh);
  for (auto _ : state) benchmark::DoNotOptimize(adc_matrix(mesh, cache, 1.0).kA(0, 0));
}
BENCHMARK(BM_AdcMatrix)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ObjectiveGradient(benchmark::State& state) {
  const PeriodicSurfaceMesh& mesh = gyroidMesh(static_cast<int>(state.range(0)));
  const GeometryCache cache = build_geometry(mesh);
  const AdcResult adc = adc_matrix(mesh, cache, 1.0);
  ObjectiveSpec spec;
  spec.aacWeight = 1.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(objective_gradient(mesh, cache, adc, spec).g.norm());
}
BENCHMARK(BM_ObjectiveGradient)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Remesh(benchmark::State& state) {
  const PeriodicSurfaceMesh& mesh = gyroidMesh(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(remesh(mesh, 0.08).faceCount());
}
BENCHMARK(BM_Remesh)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ShellConductivity(benchmark::State& state) {
  const RevolutionProfile profile =
      RevolutionProfile::fromExpression(("(2+cos(pi*x))/4"));
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(effective_conductivity_shell(profile, 0.05, n, 16).kappaEps);
}
BENCHMARK(BM_ShellConductivity)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
