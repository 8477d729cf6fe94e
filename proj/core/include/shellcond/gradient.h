#pragma once

#include "shellcond/adc.h"
#include "shellcond/geometry.h"
#include "shellcond/mesh.h"
#include "shellcond/objective.h"

namespace shellcond {

// Shape derivative of kA entry (i,j) under normal motion x -> x + t v n:
// returns per-vertex g with d/dt kA_ij = <g, v>_M (mass-weighted pairing).
// Face integrals use single-point quadrature with hat weights 1/3.
Eigen::VectorXd entry_gradient(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache,
                               const AdcResult& adc, int i, int j);

struct ObjectiveGradient {
  double value = 0;
  Eigen::VectorXd g;  // d/dt f = <g, v>_M
  bool degenerateIsoGap = false;
  bool targetAtMinimum = false;
};

// Chain rule over the entry derivatives for a full objective spec.
ObjectiveGradient objective_gradient(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache,
                                     const AdcResult& adc, const ObjectiveSpec& spec);

}  // namespace shellcond
