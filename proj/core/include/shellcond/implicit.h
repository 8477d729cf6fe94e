#pragma once

#include "shellcond/mesh.h"

#include <cstdint>
#include <functional>
#include <string>

namespace shellcond {

// Level-set surface extraction over a periodic grid on [-1,1)^3.
struct ImplicitSpec {
  enum class Kind { SchwarzP, Gyroid, Diamond, Iwp, Plane, Custom };
  Kind kind = Kind::SchwarzP;
  double level = 0;
  int resolution = 64;  // grid divisions per axis, >= 32 (plane: in-plane divisions)
  std::function<double(const Vec3&)> custom;  // period-2 in all axes
};

ImplicitSpec::Kind implicit_kind_from_name(const std::string& name);  // throws InputError

// Period-2 trigonometric approximants of the classic minimal surfaces.
double implicit_value(const ImplicitSpec& spec, const Vec3& x);

// Extracts the level set by marching tetrahedra (Kuhn 6-tet split per cell,
// consistent main diagonal so the induced face diagonals agree across cells
// and across the periodic wrap). Marching vertices are welded by grid-edge
// key, triangles oriented toward increasing field value. The plane kind
// returns the exact triangulated z=0 cross-section (area exactly 4).
// Output passes every mesh invariant; throws InputError on an empty level
// set or resolution < 32.
PeriodicSurfaceMesh generate_implicit(const ImplicitSpec& spec);

// Smooth random normal displacement: a seeded trigonometric field
//   psi(x) = sbar * sum_{0<|k|<=cutoff} (g_k/|k|^2) cos(pi k.x + phi_k) / Z,
// g_k ~ N(0,1), phi_k ~ U[0,2pi), normalized by Z = sum |g_k|/|k|^2 so that
// |psi| <= sbar everywhere. Deterministic for a fixed seed; the field is a
// fixed function of position, so the same seed displaces any tessellation of
// the same surface compatibly.
struct PerturbSpec {
  double strength = 0;  // sbar >= 0
  int frequencyCutoff = 3;
  std::uint32_t seed = 0;
};

// Displaces vertices along their angle-weighted normals by psi, re-wraps and
// validates. strength 0 returns the input unchanged. Self-intersection is
// not checked.
PeriodicSurfaceMesh perturb(const PeriodicSurfaceMesh& mesh, const PerturbSpec& spec);

}  // namespace shellcond
