#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace shellcond {

using Vec3 = Eigen::Vector3d;
using Shift = Eigen::Vector3i;

// Closed triangle mesh embedded in the flat 3-torus [-1,1)^3 (period 2).
// Canonical vertex positions live in [-1,1)^3; each face carries per-corner
// integer lattice shifts so that the world position of corner k of face f is
//   vertices[faces[f][k]] + period * shifts[f][k].
// By convention shifts[f][0] == 0, so every face is anchored at its first
// corner and no face spans more than one period in any axis.
struct PeriodicSurfaceMesh {
  double period = 2.0;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<std::array<Shift, 3>> shifts;

  int vertexCount() const { return static_cast<int>(vertices.size()); }
  int faceCount() const { return static_cast<int>(faces.size()); }

  // World position of corner k (0..2) of face f.
  Vec3 corner(int f, int k) const {
    return vertices[faces[f][k]] + period * shifts[f][k].cast<double>();
  }

  // Checks every structural invariant (manifoldness, wrap consistency,
  // positive areas, shift conventions, even Euler characteristic); throws
  // InputError naming the offending element on the first violation.
  void validateOrThrow() const;
};

// Undirected edge of the torus-identified complex. Face f0 traverses the edge
// as (v0,v1) at corner c0 (i.e. v0 = faces[f0][c0], v1 = faces[f0][c0+1]);
// face f1 traverses it in the opposite direction at corner c1.
struct EdgeInfo {
  int v0 = -1, v1 = -1;
  int f0 = -1, c0 = -1;
  int f1 = -1, c1 = -1;
};

// Builds the undirected edge table; throws InputError if any edge is not
// shared by exactly two faces with opposite orientation.
std::vector<EdgeInfo> buildEdges(const PeriodicSurfaceMesh& mesh);

// V − E + F on the torus-identified complex (always even for a closed
// orientable surface).
int euler_characteristic(const PeriodicSurfaceMesh& mesh);

struct ShellVolume {
  double volume = 0;    // |shell| = 2*eps*area + (4*pi/3)*eps^3*chi
  double fraction = 0;  // rho_eps = volume / 8
};

// Solid volume of the shell obtained by thickening the surface by +-epsilon
// along its normal, to third order in epsilon, and the RVE volume fraction.
ShellVolume shell_volume(const PeriodicSurfaceMesh& mesh, double epsilon);

// Wraps canonical vertex positions back into [-1,1)^3 after vertices have
// moved, updating face shifts so world-space geometry is unchanged and
// re-anchoring every face at its first corner.
void rewrap(PeriodicSurfaceMesh& mesh);

// Faces incident to each vertex.
std::vector<std::vector<int>> vertexFaceAdjacency(const PeriodicSurfaceMesh& mesh);

}  // namespace shellcond
