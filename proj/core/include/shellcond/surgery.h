#pragma once

#include "shellcond/mesh.h"

namespace shellcond {

struct SurgeryResult {
  PeriodicSurfaceMesh mesh;
  int count = 0;  // necks cut
};

// Cuts thin necks: grows a geodesic ball (radius 4x threshold) around each
// candidate vertex; when the ball's boundary splits into exactly two short
// loops (circumference below 3*pi*threshold each) the enclosed tube is
// removed and both loops are capped with centroid fans. Each cut raises the
// Euler characteristic by 2. A mesh without thin necks is returned
// unchanged with count 0.
SurgeryResult detect_and_surgery(const PeriodicSurfaceMesh& mesh, double threshold);

}  // namespace shellcond
