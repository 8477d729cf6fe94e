#pragma once

#include "shellcond/geometry.h"
#include "shellcond/mesh.h"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <memory>

namespace shellcond {

// Output of the three-axis ADC evaluation. kA is the quadratic form of the
// asymptotic directional conductivity: kappa_A(p) = p' kA p.
struct AdcResult {
  Eigen::Matrix3d kA = Eigen::Matrix3d::Zero();
  std::array<Eigen::VectorXd, 3> solutions;    // u^i, mass-weighted mean zero
  std::array<Eigen::VectorXd, 3> divergences;  // rho^i
  Eigen::Matrix3d normalCovariance = Eigen::Matrix3d::Zero();  // (1/A) int n n'
  Eigen::Matrix3d Rmatrix = Eigen::Matrix3d::Zero();           // PSD Dirichlet Gram
  double totalArea = 0;
  double kappa = 1;
  std::array<double, 3> solverResiduals = {0, 0, 0};
};

// Integrated divergence of the tangential field of a unit direction p:
// rho_v = -sum_{j in N(v)} w_vj * p.(x_j - x_v), wrap-corrected edge vectors.
// Entries sum to zero by the antisymmetry of the edge values.
Eigen::VectorXd divergence_vector(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache,
                                  const Vec3& p);

// Direct factorization of the PSD stiffness S, reusable across right-hand
// sides. Solves S u = -rho with the constant nullspace handled by projection
// (zero-mean RHS, mass-weighted zero-mean solution) plus one step of
// iterative refinement; never by pinning a vertex.
class PoissonSolver {
 public:
  explicit PoissonSolver(const GeometryCache& cache);

  struct Solution {
    Eigen::VectorXd u;
    double relResidual = 0;  // ||S u + rho|| / ||rho||
  };
  // Throws InputError if sum(rho) is not ~0 (incompatible RHS), SolveError on
  // factorization failure or residual above 1e-10 * ||rho||.
  Solution solve(const Eigen::VectorXd& rho) const;

 private:
  const Eigen::SparseMatrix<double>* S_;
  Eigen::VectorXd vertexArea_;
  double totalArea_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

// One-shot convenience wrapper around PoissonSolver.
Eigen::VectorXd solve_poisson(const GeometryCache& cache, const Eigen::VectorXd& rho);

// Area-weighted covariance of face normals; trace is exactly 1.
Eigen::Matrix3d normal_covariance(const GeometryCache& cache);

// Full three-axis assembly kA = kappa (I - C - R) with
// R^{ij} = -(u^i . rho^j)/A symmetrized; R is the Gram matrix of the cell
// solutions in the Dirichlet inner product, hence PSD.
AdcResult adc_matrix(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache, double kappa);

// p' kA p for unit p.
double adc_directional(const Eigen::Matrix3d& kA, const Vec3& p);

// kappa (1 - p' C p): the directional ADC of any surface is bounded above by
// this; equality holds exactly for minimal surfaces and for cylinders
// parallel to p.
double upper_bound_directional(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache,
                               double kappa, const Vec3& p);

// trace(kA)/3; bounded above by 2 kappa / 3, with equality exactly on
// triply periodic minimal surfaces.
double aac(const Eigen::Matrix3d& kA);

// Independent route to the directional ADC: bound minus the Dirichlet energy
// of a fresh cell solve, kappa(1 - p'Cp) - kappa (u'Su)/A. Must agree with
// adc_directional(adc_matrix(...).kA, p) to round-off.
double energy_form_adc(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache, double kappa,
                       const Vec3& p);

// Hashin-Shtrikman upper bound for an isotropic two-phase composite at
// volume fraction rho: 2 rho kappa / (3 - rho).
double hs_bound(double rho, double kappa);

}  // namespace shellcond
