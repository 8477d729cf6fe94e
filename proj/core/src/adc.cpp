#include "shellcond/adc.h"

#include "shellcond/errors.h"

#include <cmath>

namespace shellcond {

namespace {
constexpr double kResidualTol = 1e-10;

void requireUnit(const Vec3& p) {
  if (std::abs(p.norm() - 1.0) > 1e-8) throw InputError("direction p must be a unit vector");
}
}  // namespace

Eigen::VectorXd divergence_vector(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache,
                                  const Vec3& p) {
  requireUnit(p);
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(mesh.vertexCount());
  for (size_t e = 0; e < cache.edges.size(); ++e) {
    const auto& ed = cache.edges[e];
    Vec3 d = mesh.corner(ed.f0, (ed.c0 + 1) % 3) - mesh.corner(ed.f0, ed.c0);  // v0 -> v1
    double pij = p.dot(d);
    double w = cache.cotWeight[static_cast<int>(e)];
    rho[ed.v0] -= w * pij;
    rho[ed.v1] += w * pij;  // edge value flips sign from the other endpoint
  }
  return rho;
}

PoissonSolver::PoissonSolver(const GeometryCache& cache)
    : S_(&cache.stiffness), vertexArea_(cache.vertexArea), totalArea_(cache.totalArea) {
  ldlt_.compute(*S_);
  if (ldlt_.info() != Eigen::Success)
    throw SolveError("sparse LDLT factorization of the stiffness matrix failed");
}

PoissonSolver::Solution PoissonSolver::solve(const Eigen::VectorXd& rho) const {
  const int n = static_cast<int>(rho.size());
  if (n != S_->rows()) throw InputError("right-hand side size mismatch");
  double rhoNorm = rho.norm();
  Solution out;
  if (rhoNorm == 0) {
    out.u = Eigen::VectorXd::Zero(n);
    return out;
  }
  double total = rho.sum();
  if (std::abs(total) > 1e-8 * rho.lpNorm<1>())
    throw InputError("incompatible right-hand side: entries do not sum to zero");

  // Work against the exactly-compatible projection of rho; the nullspace of S
  // is the constants, so subtract the plain mean.
  Eigen::VectorXd b = rho;
  b.array() -= total / n;

  auto project = [&](Eigen::VectorXd& u) {
    u.array() -= vertexArea_.dot(u) / totalArea_;
  };

  Eigen::VectorXd u = ldlt_.solve(-b);
  if (!u.allFinite()) throw SolveError("Poisson solve produced non-finite values");
  project(u);
  // One refinement step scrubs the round-off amplified nullspace component.
  Eigen::VectorXd r = -b - (*S_) * u;
  Eigen::VectorXd du = ldlt_.solve(r);
  if (du.allFinite()) {
    u += du;
    project(u);
  }
  out.relResidual = ((*S_) * u + b).norm() / rhoNorm;
  if (!(out.relResidual <= kResidualTol))
    throw SolveError("Poisson solve residual " + std::to_string(out.relResidual) +
                     " above tolerance");
  out.u = std::move(u);
  return out;
}

Eigen::VectorXd solve_poisson(const GeometryCache& cache, const Eigen::VectorXd& rho) {
  return PoissonSolver(cache).solve(rho).u;
}

Eigen::Matrix3d normal_covariance(const GeometryCache& cache) {
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  for (size_t f = 0; f < cache.faceNormal.size(); ++f)
    C += cache.faceArea[static_cast<int>(f)] * cache.faceNormal[f] *
         cache.faceNormal[f].transpose();
  return C / cache.totalArea;
}

AdcResult adc_matrix(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache, double kappa) {
  AdcResult res;
  res.kappa = kappa;
  res.totalArea = cache.totalArea;
  res.normalCovariance = normal_covariance(cache);

  PoissonSolver solver(cache);
  for (int i = 0; i < 3; ++i) {
    res.divergences[i] = divergence_vector(mesh, cache, Vec3::Unit(i));
    auto sol = solver.solve(res.divergences[i]);
    res.solutions[i] = std::move(sol.u);
    res.solverResiduals[i] = sol.relResidual;
  }

  // R^{ij} = (1/A) <u^i, u^j>_S. With S u^j = -rho^j this equals
  // -(u^i . rho^j)/A; assembled that way and symmetrized to remove round-off.
  Eigen::Matrix3d R;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      R(i, j) = -res.solutions[i].dot(res.divergences[j]) / cache.totalArea;
  res.Rmatrix = 0.5 * (R + R.transpose());

  res.kA = kappa * (Eigen::Matrix3d::Identity() - res.normalCovariance - res.Rmatrix);
  res.kA = 0.5 * (res.kA + res.kA.transpose().eval());
  return res;
}

double adc_directional(const Eigen::Matrix3d& kA, const Vec3& p) {
  requireUnit(p);
  return p.dot(kA * p);
}

double upper_bound_directional(const PeriodicSurfaceMesh& /*mesh*/, const GeometryCache& cache,
                               double kappa, const Vec3& p) {
  requireUnit(p);
  Eigen::Matrix3d C = normal_covariance(cache);
  return kappa * (1.0 - p.dot(C * p));
}

double aac(const Eigen::Matrix3d& kA) { return kA.trace() / 3.0; }

double energy_form_adc(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache, double kappa,
                       const Vec3& p) {
  requireUnit(p);
  Eigen::VectorXd rho = divergence_vector(mesh, cache, p);
  Eigen::VectorXd u = solve_poisson(cache, rho);
  double dirichlet = u.dot(cache.stiffness * u);
  Eigen::Matrix3d C = normal_covariance(cache);
  return kappa * (1.0 - p.dot(C * p)) - kappa * dirichlet / cache.totalArea;
}

double hs_bound(double rho, double kappa) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw InputError("volume fraction must lie in [0,1]");
  return 2.0 * rho * kappa / (3.0 - rho);
}

}  // namespace shellcond
