#pragma once

#include "shellcond/mesh.h"

namespace shellcond {

// One cycle of incremental isotropic remeshing: edge splits (length above
// 4/3 of target), collapses (below 4/5), valence-improving diagonal flips,
// then damped tangential relaxation. Each operation is skipped element-wise
// when it would break manifoldness, fold a face, or push a wrap shift out of
// range; the call itself never fails on a valid input. A mesh already
// uniform at the target length comes back topologically unchanged.
PeriodicSurfaceMesh remesh(const PeriodicSurfaceMesh& mesh, double targetEdgeLength);

}  // namespace shellcond
