#pragma once

#include "shellcond/mesh.h"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

namespace shellcond {

struct GeometryOptions {
  // Keep negative cotangent weights from obtuse triangles by default (the
  // discrete Dirichlet energy stays exact); clamping to >= 0 is available for
  // robustness experiments.
  bool clampCotangents = false;
};

// Per-face, per-vertex, per-edge quantities plus the assembled operators.
// Everything is computed face-locally from world-space corners, so all
// quantities are invariant under the lattice re-anchoring of faces.
struct GeometryCache {
  // per face
  Eigen::VectorXd faceArea;
  std::vector<Vec3> faceNormal;                       // unit
  std::vector<Eigen::Matrix<double, 2, 3>> faceBasis; // rows: orthonormal tangents
  std::vector<Eigen::Matrix2d> faceSFF;               // b_f in the face basis

  // per vertex
  std::vector<Vec3> vertexNormal;  // unit, angle-weighted
  Eigen::VectorXd vertexArea;      // barycentric (1/3 of incident face areas)

  // per edge (aligned with `edges`)
  std::vector<EdgeInfo> edges;
  Eigen::VectorXd cotWeight;  // w_ij = (cot a + cot b)/2

  // operators
  Eigen::SparseMatrix<double> stiffness;   // S: S_ii = sum_j w_ij, S_ij = -w_ij (PSD)
  Eigen::SparseMatrix<double> massMatrix;  // diagonal vertex areas

  double totalArea = 0;
  std::vector<std::vector<int>> vertexFaces;
};

// Builds the full cache; throws InputError on zero-area faces or non-finite
// cotangents. The second fundamental form b_f is fitted per face from the
// differences of adjacent angle-weighted vertex normals (least squares over
// the three edges), with the convention b(u,v) = -<dn(u), v>, so a radius-r
// tube with inward normals has eigenvalues {0, +1/r} and the area changes
// under normal motion v_n as dA/dt = -integral of v_n tr(b).
GeometryCache build_geometry(const PeriodicSurfaceMesh& mesh, const GeometryOptions& opts = {});

// Cotangent Laplacian applied to the (wrap-corrected) vertex positions:
// row v = sum_j w_vj (x_j - x_v) evaluated with world-frame edge vectors.
// Used as the fairing direction in optimization steps.
Eigen::Matrix<double, Eigen::Dynamic, 3> laplacianPositions(const PeriodicSurfaceMesh& mesh,
                                                            const GeometryCache& cache);

// Mean circumradius over faces; the h used by convergence studies.
double meanCircumradius(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache);

}  // namespace shellcond
