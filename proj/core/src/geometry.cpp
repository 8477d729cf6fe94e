#include "shellcond/geometry.h"

#include "shellcond/errors.h"

#include <cmath>
#include <string>

namespace shellcond {

GeometryCache build_geometry(const PeriodicSurfaceMesh& mesh, const GeometryOptions& opts) {
  const int nv = mesh.vertexCount();
  const int nf = mesh.faceCount();
  GeometryCache g;
  g.faceArea.resize(nf);
  g.faceNormal.resize(nf);
  g.faceBasis.resize(nf);
  g.faceSFF.resize(nf);
  g.vertexNormal.assign(nv, Vec3::Zero());
  g.vertexArea = Eigen::VectorXd::Zero(nv);
  g.edges = buildEdges(mesh);
  g.vertexFaces = vertexFaceAdjacency(mesh);

  for (int f = 0; f < nf; ++f) {
    Vec3 p[3] = {mesh.corner(f, 0), mesh.corner(f, 1), mesh.corner(f, 2)};
    Vec3 cr = (p[1] - p[0]).cross(p[2] - p[0]);
    double a2 = cr.norm();
    if (!(a2 > 0) || !std::isfinite(a2))
      throw InputError("zero-area face " + std::to_string(f));
    g.faceArea[f] = 0.5 * a2;
    g.faceNormal[f] = cr / a2;
    Vec3 t0 = (p[1] - p[0]).normalized();
    Vec3 t1 = g.faceNormal[f].cross(t0);
    g.faceBasis[f].row(0) = t0;
    g.faceBasis[f].row(1) = t1;
    g.totalArea += g.faceArea[f];

    for (int k = 0; k < 3; ++k) {
      Vec3 u = p[(k + 1) % 3] - p[k];
      Vec3 v = p[(k + 2) % 3] - p[k];
      double ang = std::atan2(u.cross(v).norm(), u.dot(v));
      g.vertexNormal[mesh.faces[f][k]] += ang * g.faceNormal[f];
      g.vertexArea[mesh.faces[f][k]] += g.faceArea[f] / 3.0;
    }
  }
  for (int v = 0; v < nv; ++v) {
    double n = g.vertexNormal[v].norm();
    if (!(n > 0) || !std::isfinite(n))
      throw InputError("degenerate vertex normal at vertex " + std::to_string(v));
    g.vertexNormal[v] /= n;
  }

  // Cotangent weights: w_ij = (cot alpha + cot beta)/2 from the two corners
  // opposite the edge, each evaluated inside its own face's world frame.
  g.cotWeight.resize(static_cast<int>(g.edges.size()));
  auto cotAtOpposite = [&](int f, int c) {
    Vec3 o = mesh.corner(f, (c + 2) % 3);
    Vec3 u = mesh.corner(f, c) - o;
    Vec3 v = mesh.corner(f, (c + 1) % 3) - o;
    double cross = u.cross(v).norm();
    double cot = u.dot(v) / cross;
    if (!std::isfinite(cot))
      throw InputError("non-finite cotangent in face " + std::to_string(f));
    return cot;
  };
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const auto& ed = g.edges[e];
    double w = 0.5 * (cotAtOpposite(ed.f0, ed.c0) + cotAtOpposite(ed.f1, ed.c1));
    if (opts.clampCotangents && w < 0) w = 0;
    g.cotWeight[static_cast<int>(e)] = w;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(g.edges.size() * 4);
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const auto& ed = g.edges[e];
    double w = g.cotWeight[static_cast<int>(e)];
    trips.emplace_back(ed.v0, ed.v0, w);
    trips.emplace_back(ed.v1, ed.v1, w);
    trips.emplace_back(ed.v0, ed.v1, -w);
    trips.emplace_back(ed.v1, ed.v0, -w);
  }
  g.stiffness.resize(nv, nv);
  g.stiffness.setFromTriplets(trips.begin(), trips.end());

  std::vector<Eigen::Triplet<double>> mt;
  mt.reserve(nv);
  for (int v = 0; v < nv; ++v) mt.emplace_back(v, v, g.vertexArea[v]);
  g.massMatrix.resize(nv, nv);
  g.massMatrix.setFromTriplets(mt.begin(), mt.end());

  // Second fundamental form per face: least-squares fit of the symmetric
  // 2x2 form b to the finite differences of vertex normals along the three
  // edges, b * (P e_k) = -P (n_{k+1} - n_k).
  for (int f = 0; f < nf; ++f) {
    Eigen::Matrix<double, 6, 3> A;
    Eigen::Matrix<double, 6, 1> rhs;
    for (int k = 0; k < 3; ++k) {
      Vec3 e3 = mesh.corner(f, (k + 1) % 3) - mesh.corner(f, k);
      Vec3 dn3 = g.vertexNormal[mesh.faces[f][(k + 1) % 3]] - g.vertexNormal[mesh.faces[f][k]];
      Eigen::Vector2d u = g.faceBasis[f] * e3;
      Eigen::Vector2d r = -(g.faceBasis[f] * dn3);
      A.row(2 * k) << u[0], u[1], 0;
      A.row(2 * k + 1) << 0, u[0], u[1];
      rhs[2 * k] = r[0];
      rhs[2 * k + 1] = r[1];
    }
    Eigen::Vector3d b = (A.transpose() * A).ldlt().solve(A.transpose() * rhs);
    g.faceSFF[f] << b[0], b[1], b[1], b[2];
  }

  return g;
}

Eigen::Matrix<double, Eigen::Dynamic, 3> laplacianPositions(const PeriodicSurfaceMesh& mesh,
                                                            const GeometryCache& cache) {
  Eigen::Matrix<double, Eigen::Dynamic, 3> L =
      Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(mesh.vertexCount(), 3);
  for (size_t e = 0; e < cache.edges.size(); ++e) {
    const auto& ed = cache.edges[e];
    Vec3 d = mesh.corner(ed.f0, (ed.c0 + 1) % 3) - mesh.corner(ed.f0, ed.c0);  // v0 -> v1
    double w = cache.cotWeight[static_cast<int>(e)];
    L.row(ed.v0) += w * d;
    L.row(ed.v1) -= w * d;
  }
  return L;
}

double meanCircumradius(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache) {
  double sum = 0;
  for (int f = 0; f < mesh.faceCount(); ++f) {
    double l0 = (mesh.corner(f, 1) - mesh.corner(f, 0)).norm();
    double l1 = (mesh.corner(f, 2) - mesh.corner(f, 1)).norm();
    double l2 = (mesh.corner(f, 0) - mesh.corner(f, 2)).norm();
    sum += l0 * l1 * l2 / (4.0 * cache.faceArea[f]);
  }
  return sum / mesh.faceCount();
}

}  // namespace shellcond
