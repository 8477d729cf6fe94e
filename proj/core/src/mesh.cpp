#include "shellcond/mesh.h"

#include "shellcond/errors.h"

#include <cmath>
#include <string>
#include <unordered_map>

namespace shellcond {

namespace {

inline std::string elem(const char* kind, int idx) {
  return std::string(kind) + " " + std::to_string(idx);
}

// Key for a directed edge (a -> b).
inline std::uint64_t edgeKey(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

std::vector<EdgeInfo> buildEdges(const PeriodicSurfaceMesh& mesh) {
  const int nv = mesh.vertexCount();
  std::unordered_map<std::uint64_t, std::pair<int, int>> directed;  // key -> (face, corner)
  directed.reserve(mesh.faces.size() * 3);
  for (int f = 0; f < mesh.faceCount(); ++f) {
    const auto& tri = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      if (a < 0 || a >= nv || b < 0 || b >= nv)
        throw InputError("vertex index out of range in " + elem("face", f));
      if (a == b) throw InputError("repeated vertex in " + elem("face", f));
      auto [it, inserted] = directed.emplace(edgeKey(a, b), std::make_pair(f, k));
      if (!inserted)
        throw InputError("directed edge used twice (non-manifold or inconsistent orientation) at " +
                         elem("face", f));
    }
  }

  // Emit edges in face-scan order (deterministic assembly downstream).
  std::vector<EdgeInfo> edges;
  edges.reserve(directed.size() / 2);
  for (int f = 0; f < mesh.faceCount(); ++f) {
    const auto& tri = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      if (a > b) continue;  // emit each undirected edge once, from its a<b copy
      auto twin = directed.find(edgeKey(b, a));
      if (twin == directed.end())
        throw InputError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                         ") has no opposite-orientation twin (surface not closed) at " +
                         elem("face", f));
      EdgeInfo e;
      e.v0 = a;
      e.v1 = b;
      e.f0 = f;
      e.c0 = k;
      e.f1 = twin->second.first;
      e.c1 = twin->second.second;
      edges.push_back(e);
    }
  }
  return edges;
}

void PeriodicSurfaceMesh::validateOrThrow() const {
  if (period != 2.0) throw InputError("period must be 2.0");
  if (faces.size() != shifts.size())
    throw InputError("faces and shifts arrays differ in length");
  const double half = period / 2;
  for (int v = 0; v < vertexCount(); ++v) {
    for (int k = 0; k < 3; ++k) {
      double x = vertices[v][k];
      if (!(x >= -half && x < half) || !std::isfinite(x))
        throw InputError("vertex position outside [-1,1) at " + elem("vertex", v));
    }
  }
  for (int f = 0; f < faceCount(); ++f) {
    if (shifts[f][0] != Shift::Zero())
      throw InputError("first-corner shift is not zero at " + elem("face", f));
    for (int k = 0; k < 3; ++k)
      for (int d = 0; d < 3; ++d)
        if (shifts[f][k][d] < -1 || shifts[f][k][d] > 1)
          throw InputError("shift component outside {-1,0,1} at " + elem("face", f));
  }

  auto edges = buildEdges(*this);  // manifoldness + closedness

  // Wrap consistency: the two traversals of each edge must describe the same
  // world segment up to a single lattice translation.
  for (const auto& e : edges) {
    Vec3 a0 = corner(e.f0, e.c0), b0 = corner(e.f0, (e.c0 + 1) % 3);
    Vec3 b1 = corner(e.f1, e.c1), a1 = corner(e.f1, (e.c1 + 1) % 3);
    Vec3 t = a0 - a1;
    if (((b0 - b1) - t).lpNorm<Eigen::Infinity>() > 1e-12)
      throw InputError("wrap-inconsistent edge between " + elem("face", e.f0) + " and " +
                       elem("face", e.f1));
    for (int d = 0; d < 3; ++d) {
      double cells = t[d] / period;
      if (std::abs(cells - std::round(cells)) > 1e-12)
        throw InputError("edge translation is not a lattice vector between " + elem("face", e.f0) +
                         " and " + elem("face", e.f1));
    }
  }

  for (int f = 0; f < faceCount(); ++f) {
    Vec3 n = (corner(f, 1) - corner(f, 0)).cross(corner(f, 2) - corner(f, 0));
    if (!(n.norm() > 0) || !n.allFinite())
      throw InputError("degenerate (zero-area) " + elem("face", f));
  }

  std::vector<char> referenced(vertexCount(), 0);
  for (const auto& tri : faces)
    for (int k = 0; k < 3; ++k) referenced[tri[k]] = 1;
  for (int v = 0; v < vertexCount(); ++v)
    if (!referenced[v]) throw InputError("isolated " + elem("vertex", v));

  int chi = vertexCount() - static_cast<int>(edges.size()) + faceCount();
  if (chi % 2 != 0)
    throw InputError("Euler characteristic " + std::to_string(chi) + " is odd");
}

int euler_characteristic(const PeriodicSurfaceMesh& mesh) {
  auto edges = buildEdges(mesh);
  return mesh.vertexCount() - static_cast<int>(edges.size()) + mesh.faceCount();
}

ShellVolume shell_volume(const PeriodicSurfaceMesh& mesh, double epsilon) {
  if (!(epsilon > 0)) throw InputError("epsilon must be positive");
  double area = 0;
  for (int f = 0; f < mesh.faceCount(); ++f)
    area += 0.5 * (mesh.corner(f, 1) - mesh.corner(f, 0))
                      .cross(mesh.corner(f, 2) - mesh.corner(f, 0))
                      .norm();
  int chi = euler_characteristic(mesh);
  ShellVolume out;
  out.volume = 2 * epsilon * area + (4.0 * M_PI / 3.0) * epsilon * epsilon * epsilon * chi;
  out.fraction = out.volume / 8.0;
  return out;
}

void rewrap(PeriodicSurfaceMesh& mesh) {
  const double half = mesh.period / 2;
  std::vector<Shift> corr(mesh.vertexCount(), Shift::Zero());
  for (int v = 0; v < mesh.vertexCount(); ++v) {
    for (int d = 0; d < 3; ++d) {
      double cells = std::floor((mesh.vertices[v][d] + half) / mesh.period);
      corr[v][d] = static_cast<int>(cells);
      mesh.vertices[v][d] -= mesh.period * cells;
    }
  }
  for (int f = 0; f < mesh.faceCount(); ++f) {
    for (int k = 0; k < 3; ++k) mesh.shifts[f][k] += corr[mesh.faces[f][k]];
    Shift anchor = mesh.shifts[f][0];
    for (int k = 0; k < 3; ++k) mesh.shifts[f][k] -= anchor;
  }
}

std::vector<std::vector<int>> vertexFaceAdjacency(const PeriodicSurfaceMesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.vertexCount());
  for (int f = 0; f < mesh.faceCount(); ++f)
    for (int k = 0; k < 3; ++k) adj[mesh.faces[f][k]].push_back(f);
  return adj;
}

}  // namespace shellcond
