#pragma once

#include "shellcond/mesh.h"

#include <string>

namespace shellcond {

// Reads the JSON mesh format
//   {"period": 2.0, "vertices": [[x,y,z],...], "faces": [[i,j,k],...],
//    "shifts": [[[sx,sy,sz],[sx,sy,sz],[sx,sy,sz]],...]}
// and validates every mesh invariant. Throws InputError on parse failure or
// invariant violation.
PeriodicSurfaceMesh load_mesh(const std::string& path);

// Writes the JSON mesh format with full round-trip double precision; a
// save/load cycle reproduces the mesh bit-exactly.
void save_mesh(const PeriodicSurfaceMesh& mesh, const std::string& path);

std::string mesh_to_json(const PeriodicSurfaceMesh& mesh);
PeriodicSurfaceMesh mesh_from_json(const std::string& text);

}  // namespace shellcond
