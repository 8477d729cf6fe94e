#include "shellcond/mesh_io.h"

#include "shellcond/errors.h"

#include <json.hpp>

#include <fstream>

namespace shellcond {

using nlohmann::json;

PeriodicSurfaceMesh mesh_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("mesh JSON parse failure: ") + e.what());
  }
  PeriodicSurfaceMesh m;
  try {
    m.period = j.at("period").get<double>();
    for (const auto& v : j.at("vertices")) {
      if (!v.is_array() || v.size() != 3) throw InputError("vertex entry is not a 3-array");
      m.vertices.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }
    for (const auto& f : j.at("faces")) {
      if (!f.is_array() || f.size() != 3) throw InputError("face entry is not a 3-array");
      m.faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
    }
    for (const auto& s : j.at("shifts")) {
      if (!s.is_array() || s.size() != 3) throw InputError("shift entry is not a 3-array");
      std::array<Shift, 3> row;
      for (int k = 0; k < 3; ++k) {
        const auto& c = s[k];
        if (!c.is_array() || c.size() != 3) throw InputError("shift corner is not a 3-array");
        row[k] = Shift(c[0].get<int>(), c[1].get<int>(), c[2].get<int>());
      }
      m.shifts.push_back(row);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("mesh JSON structure error: ") + e.what());
  }
  m.validateOrThrow();
  return m;
}

std::string mesh_to_json(const PeriodicSurfaceMesh& mesh) {
  json j;
  j["period"] = mesh.period;
  auto& vs = j["vertices"] = json::array();
  for (const auto& v : mesh.vertices) vs.push_back({v[0], v[1], v[2]});
  auto& fs = j["faces"] = json::array();
  for (const auto& f : mesh.faces) fs.push_back({f[0], f[1], f[2]});
  auto& ss = j["shifts"] = json::array();
  for (const auto& row : mesh.shifts) {
    json r = json::array();
    for (int k = 0; k < 3; ++k) r.push_back({row[k][0], row[k][1], row[k][2]});
    ss.push_back(std::move(r));
  }
  return j.dump();
}

PeriodicSurfaceMesh load_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open mesh file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return mesh_from_json(text);
}

void save_mesh(const PeriodicSurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + path);
  out << mesh_to_json(mesh) << "\n";
  if (!out) throw InputError("write failure: " + path);
}

}  // namespace shellcond
