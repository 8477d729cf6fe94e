#include "shellcond/gradient.h"

#include "shellcond/errors.h"

#include <cmath>

namespace shellcond {
namespace {

// Accumulates the raw pairing ghat with d/dt f = sum_q ghat_q v_q for the
// entry combination f = <G, kA>; the public functions divide by vertex mass.
Eigen::VectorXd rawGradient(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache,
                            const AdcResult& adc, const Eigen::Matrix3d& G) {
  const std::size_t V = mesh.vertexCount();
  const std::size_t F = mesh.faceCount();
  const double A = cache.totalArea;
  const double kappa = adc.kappa;
  const double areaCoef = G.cwiseProduct(adc.kA).sum() / A;  // <G,kA> times dA/A pickup

  Eigen::VectorXd ghat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(V));
  for (std::size_t f = 0; f < F; ++f) {
    const auto& fc = mesh.faces[f];
    const Vec3 p0 = mesh.corner(static_cast<int>(f), 0);
    const Vec3 p1 = mesh.corner(static_cast<int>(f), 1);
    const Vec3 p2 = mesh.corner(static_cast<int>(f), 2);
    const double Af = cache.faceArea[static_cast<Eigen::Index>(f)];
    const Vec3 n = cache.faceNormal[f];
    const auto& P = cache.faceBasis[f];  // 2x3
    const Eigen::Matrix2d& b = cache.faceSFF[f];
    const Eigen::Matrix2d dev = b - 0.5 * b.trace() * Eigen::Matrix2d::Identity();

    // Hat-function gradients projected to the face plane.
    Eigen::Matrix<double, 2, 3> gradPhi;
    gradPhi.col(0) = P * n.cross(p2 - p1) / (2.0 * Af);
    gradPhi.col(1) = P * n.cross(p0 - p2) / (2.0 * Af);
    gradPhi.col(2) = P * n.cross(p1 - p0) / (2.0 * Af);

    // w_i = P e_i + grad u_i on this face, one column per axis.
    Eigen::Matrix<double, 2, 3> w;
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::Vector2d gu = Eigen::Vector2d::Zero();
      for (int k = 0; k < 3; ++k)
        gu += adc.solutions[static_cast<std::size_t>(axis)][fc[static_cast<std::size_t>(k)]] * gradPhi.col(k);
      w.col(axis) = P * Vec3::Unit(axis) + gu;
    }
    const Eigen::Matrix3d E = w.transpose() * dev * w;  // E(i,j) per entry pair

    const double faceTerm =
        (kappa / A) * 2.0 * G.cwiseProduct(E).sum() + areaCoef * b.trace();
    const double wq = Af / 3.0;
    for (int k = 0; k < 3; ++k) ghat[fc[static_cast<std::size_t>(k)]] += wq * faceTerm;
  }
  return ghat;
}

Eigen::VectorXd massNormalize(const GeometryCache& cache, Eigen::VectorXd ghat) {
  for (Eigen::Index q = 0; q < ghat.size(); ++q) ghat[q] /= cache.vertexArea[q];
  return ghat;
}

}  // namespace

Eigen::VectorXd entry_gradient(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache,
                               const AdcResult& adc, int i, int j) {
  if (i < 0 || i > 2 || j < 0 || j > 2) throw InputError("entry indices must be in 0..2");
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  if (i == j) {
    G(i, i) = 1;
  } else {
    G(i, j) = 0.5;
    G(j, i) = 0.5;
  }
  return massNormalize(cache, rawGradient(mesh, cache, adc, G));
}

ObjectiveGradient objective_gradient(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache,
                                     const AdcResult& adc, const ObjectiveSpec& spec) {
  const ObjectiveEval eval = evaluate_objective(spec, adc.kA);
  ObjectiveGradient out;
  out.value = eval.value;
  out.degenerateIsoGap = eval.degenerateIsoGap;
  out.targetAtMinimum = eval.targetAtMinimum;
  out.g = massNormalize(cache, rawGradient(mesh, cache, adc, eval.dfdk));
  return out;
}

}  // namespace shellcond
