#include "shellcond/implicit.h"

#include "shellcond/errors.h"

#include <cmath>
#include <unordered_map>
#include <vector>

namespace shellcond {
namespace {

double schwarzP(const Vec3& x) {
  return std::cos(M_PI * x[0]) + std::cos(M_PI * x[1]) + std::cos(M_PI * x[2]);
}

double gyroid(const Vec3& x) {
  const double cx = std::cos(M_PI * x[0]), sx = std::sin(M_PI * x[0]);
  const double cy = std::cos(M_PI * x[1]), sy = std::sin(M_PI * x[1]);
  const double cz = std::cos(M_PI * x[2]), sz = std::sin(M_PI * x[2]);
  return sx * cy + sy * cz + sz * cx;
}

double diamond(const Vec3& x) {
  const double cx = std::cos(M_PI * x[0]), sx = std::sin(M_PI * x[0]);
  const double cy = std::cos(M_PI * x[1]), sy = std::sin(M_PI * x[1]);
  const double cz = std::cos(M_PI * x[2]), sz = std::sin(M_PI * x[2]);
  return sx * sy * sz + sx * cy * cz + cx * sy * cz + cx * cy * sz;
}

double iwp(const Vec3& x) {
  const double cx = std::cos(M_PI * x[0]);
  const double cy = std::cos(M_PI * x[1]);
  const double cz = std::cos(M_PI * x[2]);
  return 2.0 * (cx * cy + cy * cz + cz * cx) -
         (std::cos(2 * M_PI * x[0]) + std::cos(2 * M_PI * x[1]) + std::cos(2 * M_PI * x[2]));
}

// Exact triangulated z=0 cross-section; normals +z, wrap shifts in x and y.
PeriodicSurfaceMesh planeMesh(int n) {
  PeriodicSurfaceMesh mesh;
  const double h = 2.0 / n;
  mesh.vertices.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mesh.vertices.push_back(Vec3(-1.0 + i * h, -1.0 + j * h, 0.0));
  auto vid = [n](int i, int j) { return (i % n) * n + (j % n); };
  auto wrapShift = [n](int i, int j) { return Shift(i >= n ? 1 : 0, j >= n ? 1 : 0, 0); };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      const Shift s0(0, 0, 0);
      mesh.faces.push_back({a, b, c});
      mesh.shifts.push_back({s0, wrapShift(i + 1, j), wrapShift(i + 1, j + 1)});
      mesh.faces.push_back({a, c, d});
      mesh.shifts.push_back({s0, wrapShift(i + 1, j + 1), wrapShift(i, j + 1)});
    }
  }
  mesh.validateOrThrow();
  return mesh;
}

// Kuhn split of the unit cube along the main diagonal c0-c7; all six tets
// positively oriented, so one marching case table orients every triangle
// consistently. Corner index bits = (x, y, z).
constexpr int kTets[6][4] = {
    {0, 1, 3, 7}, {0, 2, 6, 7}, {0, 4, 5, 7},
    {0, 5, 1, 7}, {0, 3, 2, 7}, {0, 6, 4, 7},
};

// For a lone inside vertex i, (kOpposite[i][0..2]) lists the other three tet
// vertices in an order that makes (i, a, b, c) an even permutation; the
// triangle over edges (i,a),(i,b),(i,c) then faces away from vertex i.
constexpr int kOpposite[4][3] = {{1, 2, 3}, {0, 3, 2}, {3, 0, 1}, {2, 1, 0}};

// For an inside pair {i,j}, the quad over edges
// (i,k),(i,l),(j,l),(j,k) faces the outside pair; rows are (i,j,k,l) even.
constexpr int kPairs[6][4] = {
    {0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2},
    {1, 2, 0, 3}, {1, 3, 2, 0}, {2, 3, 0, 1},
};

struct MarchContext {
  int res = 0;
  double level = 0;
  std::vector<double> values;  // grid samples, index ((i*res)+j)*res+k wrapped
  std::unordered_map<std::uint64_t, int> edgeVertex;
  PeriodicSurfaceMesh mesh;

  int gid(int i, int j, int k) const {
    return ((i % res) * res + (j % res)) * res + (k % res);
  }
};

double wrapUnit(double x) { return x - 2.0 * std::floor((x + 1.0) / 2.0); }

Vec3 wrapVec(const Vec3& p) { return Vec3(wrapUnit(p[0]), wrapUnit(p[1]), wrapUnit(p[2])); }

}  // namespace

ImplicitSpec::Kind implicit_kind_from_name(const std::string& name) {
  if (name == "schwarz-p") return ImplicitSpec::Kind::SchwarzP;
  if (name == "gyroid") return ImplicitSpec::Kind::Gyroid;
  if (name == "diamond") return ImplicitSpec::Kind::Diamond;
  if (name == "iwp") return ImplicitSpec::Kind::Iwp;
  if (name == "plane") return ImplicitSpec::Kind::Plane;
  throw InputError("unknown surface kind: " + name);
}

double implicit_value(const ImplicitSpec& spec, const Vec3& x) {
  switch (spec.kind) {
    case ImplicitSpec::Kind::SchwarzP: return schwarzP(x);
    case ImplicitSpec::Kind::Gyroid: return gyroid(x);
    case ImplicitSpec::Kind::Diamond: return diamond(x);
    case ImplicitSpec::Kind::Iwp: return iwp(x);
    case ImplicitSpec::Kind::Plane: return x[2];
    case ImplicitSpec::Kind::Custom:
      if (!spec.custom) throw InputError("custom surface requires a field function");
      return spec.custom(x);
  }
  throw InputError("unknown surface kind");
}

PeriodicSurfaceMesh generate_implicit(const ImplicitSpec& spec) {
  // The plane is built as an exact grid; any simplicial resolution works.
  if (spec.kind == ImplicitSpec::Kind::Plane) {
    if (spec.resolution < 3) throw InputError("plane resolution must be >= 3");
    return planeMesh(spec.resolution);
  }
  if (spec.resolution < 32) throw InputError("surface resolution must be >= 32");

  MarchContext ctx;
  ctx.res = spec.resolution;
  const int n = ctx.res;
  const double h = 2.0 / n;
  ctx.values.resize(static_cast<std::size_t>(n) * n * n);
  double scale = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Vec3 p(-1.0 + i * h, -1.0 + j * h, -1.0 + k * h);
        const double v = implicit_value(spec, p);
        if (!std::isfinite(v)) throw InputError("field value is not finite");
        ctx.values[static_cast<std::size_t>(ctx.gid(i, j, k))] = v;
        scale = std::max(scale, std::abs(v));
      }
  if (scale == 0) scale = 1;

  // Nudge the level until no grid sample sits within minGap of it; grid hits
  // would spawn degenerate triangles. The shift is deterministic and moves
  // the surface by well under 1e-3 of a cell.
  const double minGap = 1e-6 * scale;
  ctx.level = spec.level;
  bool clear = false;
  for (int attempt = 0; attempt < 8 && !clear; ++attempt) {
    ctx.level = spec.level + attempt * 6.1e-5 * scale;
    clear = true;
    for (const double v : ctx.values)
      if (std::abs(v - ctx.level) < minGap) {
        clear = false;
        break;
      }
  }
  if (!clear) throw InputError("could not separate level from grid samples");

  bool anyInside = false, anyOutside = false;
  for (const double v : ctx.values) (v < ctx.level ? anyInside : anyOutside) = true;
  if (!anyInside || !anyOutside) throw InputError("empty level set");

  std::vector<Vec3> corner(8);
  std::vector<double> value(8);
  std::vector<int> cornerGid(8);
  const std::uint64_t gridCount = static_cast<std::uint64_t>(n) * n * n;

  // Returns the welded vertex id and the marching point in the current
  // cell's frame (used afterwards to derive the face wrap shifts).
  auto edgePoint = [&](int ca, int cb, Vec3& localOut) -> int {
    int a = ca, b = cb;
    if (cornerGid[a] > cornerGid[b]) std::swap(a, b);
    const double fa = value[a], fb = value[b];
    const double t = (ctx.level - fa) / (fb - fa);
    const Vec3 local = corner[a] + t * (corner[b] - corner[a]);
    localOut = local;
    const std::uint64_t key =
        static_cast<std::uint64_t>(cornerGid[a]) * gridCount + static_cast<std::uint64_t>(cornerGid[b]);
    auto it = ctx.edgeVertex.find(key);
    if (it != ctx.edgeVertex.end()) return it->second;
    const int id = static_cast<int>(ctx.mesh.vertices.size());
    ctx.mesh.vertices.push_back(wrapVec(local));
    ctx.edgeVertex.emplace(key, id);
    return id;
  };

  auto emitTriangle = [&](const std::array<std::pair<int, int>, 3>& edges) {
    std::array<int, 3> ids;
    std::array<Shift, 3> shifts;
    for (int m = 0; m < 3; ++m) {
      Vec3 local;
      ids[m] = edgePoint(edges[m].first, edges[m].second, local);
      const Vec3 d = (local - ctx.mesh.vertices[static_cast<std::size_t>(ids[m])]) / 2.0;
      shifts[m] = Shift(static_cast<int>(std::lround(d[0])), static_cast<int>(std::lround(d[1])),
                        static_cast<int>(std::lround(d[2])));
    }
    const Shift base = shifts[0];
    for (int m = 0; m < 3; ++m) shifts[m] -= base;
    ctx.mesh.faces.push_back(ids);
    ctx.mesh.shifts.push_back(shifts);
  };

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        for (int c = 0; c < 8; ++c) {
          const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
          corner[c] = Vec3(-1.0 + (i + dx) * h, -1.0 + (j + dy) * h, -1.0 + (k + dz) * h);
          cornerGid[c] = ctx.gid(i + dx, j + dy, k + dz);
          value[c] = ctx.values[static_cast<std::size_t>(cornerGid[c])];
        }
        for (const auto& tet : kTets) {
          int mask = 0;
          for (int m = 0; m < 4; ++m)
            if (value[tet[m]] < ctx.level) mask |= 1 << m;
          if (mask == 0 || mask == 15) continue;
          const int count = __builtin_popcount(static_cast<unsigned>(mask));
          auto E = [&](int a, int b) { return std::make_pair(tet[a], tet[b]); };
          if (count == 1 || count == 3) {
            int v = 0;
            while (((mask >> v) & 1) == (count == 3 ? 1 : 0)) ++v;
            const int a = kOpposite[v][0], b = kOpposite[v][1], c2 = kOpposite[v][2];
            if (count == 1)
              emitTriangle({E(v, a), E(v, b), E(v, c2)});
            else
              emitTriangle({E(v, a), E(v, c2), E(v, b)});
          } else {
            for (const auto& row : kPairs) {
              const int pi = row[0], pj = row[1], pk = row[2], pl = row[3];
              if (mask != ((1 << pi) | (1 << pj))) continue;
              const auto A = E(pi, pk), B = E(pi, pl), C = E(pj, pl), D = E(pj, pk);
              emitTriangle({A, B, C});
              emitTriangle({A, C, D});
              break;
            }
          }
        }
      }

  if (ctx.mesh.faces.empty()) throw InputError("empty level set");
  ctx.mesh.validateOrThrow();
  return ctx.mesh;
}

}  // namespace shellcond
