#include "shellcond/implicit.h"

#include "shellcond/errors.h"
#include "shellcond/geometry.h"

#include <cmath>
#include <random>
#include <vector>

namespace shellcond {

PeriodicSurfaceMesh perturb(const PeriodicSurfaceMesh& mesh, const PerturbSpec& spec) {
  if (spec.strength < 0) throw InputError("perturbation strength must be >= 0");
  if (spec.frequencyCutoff < 1) throw InputError("frequency cutoff must be >= 1");
  if (spec.strength == 0) return mesh;

  struct Mode {
    Vec3 k;
    double amplitude, phase;
  };
  std::vector<Mode> modes;
  std::mt19937 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * M_PI);
  const int c = spec.frequencyCutoff;
  double norm = 0;
  for (int kx = -c; kx <= c; ++kx)
    for (int ky = -c; ky <= c; ++ky)
      for (int kz = -c; kz <= c; ++kz) {
        const double k2 = double(kx * kx + ky * ky + kz * kz);
        if (k2 == 0 || k2 > double(c * c)) continue;
        const double g = normal(rng);
        const double phase = uniform(rng);
        modes.push_back({Vec3(kx, ky, kz), g / k2, phase});
        norm += std::abs(g) / k2;
      }
  if (norm == 0) return mesh;  // vanishing draw; nothing to apply
  const double gain = spec.strength / norm;

  auto field = [&](const Vec3& x) {
    double psi = 0;
    for (const Mode& m : modes) psi += m.amplitude * std::cos(M_PI * m.k.dot(x) + m.phase);
    return gain * psi;
  };

  const GeometryCache cache = build_geometry(mesh);
  PeriodicSurfaceMesh out = mesh;
  for (std::size_t v = 0; v < out.vertices.size(); ++v)
    out.vertices[v] += field(out.vertices[v]) * cache.vertexNormal[v];
  rewrap(out);
  out.validateOrThrow();
  return out;
}

}  // namespace shellcond
