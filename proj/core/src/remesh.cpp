#include "shellcond/remesh.h"

#include "shellcond/errors.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace shellcond {
namespace {

// Mutable mesh with face tombstones; faces keep their own wrap shifts so all
// local geometry is done on per-face world corners.
struct Work {
  std::vector<Vec3> verts;
  std::vector<char> vertAlive;
  std::vector<std::array<int, 3>> faces;  // faces[f][0] < 0 marks dead
  std::vector<std::array<Shift, 3>> shifts;

  bool faceAlive(int f) const { return faces[static_cast<std::size_t>(f)][0] >= 0; }
  Vec3 corner(int f, int k) const {
    const auto& fc = faces[static_cast<std::size_t>(f)];
    const auto& fs = shifts[static_cast<std::size_t>(f)];
    return verts[static_cast<std::size_t>(fc[k % 3])] + 2.0 * fs[k % 3].cast<double>();
  }
};

struct ERec {
  int v0, v1, f0, c0, f1, c1;  // f0 traverses v0->v1 at corner c0
};

std::uint64_t pairKey(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::vector<ERec> buildEdgeList(const Work& w) {
  std::unordered_map<std::uint64_t, std::pair<int, int>> directed;  // (a<<32|b) -> (face, corner)
  directed.reserve(w.faces.size() * 3);
  for (int f = 0; f < static_cast<int>(w.faces.size()); ++f) {
    if (!w.faceAlive(f)) continue;
    for (int k = 0; k < 3; ++k) {
      const int a = w.faces[static_cast<std::size_t>(f)][k];
      const int b = w.faces[static_cast<std::size_t>(f)][(k + 1) % 3];
      directed.emplace((static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b),
                       std::make_pair(f, k));
    }
  }
  std::vector<ERec> edges;
  edges.reserve(directed.size() / 2);
  for (int f = 0; f < static_cast<int>(w.faces.size()); ++f) {
    if (!w.faceAlive(f)) continue;
    for (int k = 0; k < 3; ++k) {
      const int a = w.faces[static_cast<std::size_t>(f)][k];
      const int b = w.faces[static_cast<std::size_t>(f)][(k + 1) % 3];
      if (a >= b) continue;
      const auto twin = directed.find((static_cast<std::uint64_t>(b) << 32) | static_cast<std::uint32_t>(a));
      if (twin == directed.end()) throw SolveError("remesh lost edge pairing");
      edges.push_back({a, b, f, k, twin->second.first, twin->second.second});
    }
  }
  return edges;
}

Vec3 snapLattice(const Vec3& t) {
  return 2.0 * Vec3(std::round(t[0] / 2.0), std::round(t[1] / 2.0), std::round(t[2] / 2.0));
}

double wrapUnit(double x) { return x - 2.0 * std::floor((x + 1.0) / 2.0); }
Vec3 wrapVec(const Vec3& p) { return Vec3(wrapUnit(p[0]), wrapUnit(p[1]), wrapUnit(p[2])); }

// Derives wrap shifts for a face given its corner positions in one common
// frame; fails when a shift component leaves {-1,0,1}.
bool deriveShifts(const Work& w, const std::array<int, 3>& ids, const std::array<Vec3, 3>& world,
                  std::array<Shift, 3>& out) {
  std::array<Shift, 3> raw;
  for (int k = 0; k < 3; ++k) {
    const Vec3 d = (world[k] - w.verts[static_cast<std::size_t>(ids[k])]) / 2.0;
    raw[k] = Shift(static_cast<int>(std::lround(d[0])), static_cast<int>(std::lround(d[1])),
                   static_cast<int>(std::lround(d[2])));
  }
  for (int k = 0; k < 3; ++k) {
    out[k] = raw[k] - raw[0];
    for (int a = 0; a < 3; ++a)
      if (out[k][a] < -1 || out[k][a] > 1) return false;
  }
  return true;
}

std::pair<Vec3, double> normalArea(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  const Vec3 c = (p1 - p0).cross(p2 - p0);
  const double n = c.norm();
  return {n > 0 ? Vec3(c / n) : Vec3::Zero(), 0.5 * n};
}

void compactFaces(Work& w) {
  std::size_t out = 0;
  for (std::size_t f = 0; f < w.faces.size(); ++f) {
    if (w.faces[f][0] < 0) continue;
    w.faces[out] = w.faces[f];
    w.shifts[out] = w.shifts[f];
    ++out;
  }
  w.faces.resize(out);
  w.shifts.resize(out);
}

void compactVertices(Work& w) {
  std::vector<int> remap(w.verts.size(), -1);
  std::size_t out = 0;
  for (std::size_t v = 0; v < w.verts.size(); ++v) {
    if (!w.vertAlive[v]) continue;
    remap[v] = static_cast<int>(out);
    w.verts[out] = w.verts[v];
    ++out;
  }
  w.verts.resize(out);
  w.vertAlive.assign(out, 1);
  for (auto& f : w.faces)
    for (int k = 0; k < 3; ++k) f[k] = remap[static_cast<std::size_t>(f[k])];
}

void splitPass(Work& w, double target) {
  const double maxLen = 4.0 / 3.0 * target;
  const auto edges = buildEdgeList(w);
  for (const ERec& e : edges) {
    if (!w.faceAlive(e.f0) || !w.faceAlive(e.f1)) continue;
    const Vec3 P0 = w.corner(e.f0, e.c0);
    const Vec3 P1 = w.corner(e.f0, e.c0 + 1);
    if ((P1 - P0).norm() <= maxLen) continue;
    const Vec3 Pa = w.corner(e.f0, e.c0 + 2);
    const Vec3 tau = snapLattice(P1 - w.corner(e.f1, e.c1));
    const Vec3 Pb = w.corner(e.f1, e.c1 + 2) + tau;
    const int a = w.faces[static_cast<std::size_t>(e.f0)][(e.c0 + 2) % 3];
    const int b = w.faces[static_cast<std::size_t>(e.f1)][(e.c1 + 2) % 3];

    const Vec3 mid = 0.5 * (P0 + P1);
    const int m = static_cast<int>(w.verts.size());
    w.verts.push_back(wrapVec(mid));
    w.vertAlive.push_back(1);

    const std::array<std::array<int, 3>, 4> ids = {{{e.v0, m, a}, {m, e.v1, a}, {e.v1, m, b}, {m, e.v0, b}}};
    const std::array<std::array<Vec3, 3>, 4> world = {
        {{P0, mid, Pa}, {mid, P1, Pa}, {P1, mid, Pb}, {mid, P0, Pb}}};
    std::array<std::array<Shift, 3>, 4> ns;
    bool ok = true;
    for (int q = 0; q < 4 && ok; ++q) ok = deriveShifts(w, ids[q], world[q], ns[q]);
    if (!ok) {
      w.verts.pop_back();
      w.vertAlive.pop_back();
      continue;
    }
    w.faces[static_cast<std::size_t>(e.f0)][0] = -1;
    w.faces[static_cast<std::size_t>(e.f1)][0] = -1;
    for (int q = 0; q < 4; ++q) {
      w.faces.push_back(ids[q]);
      w.shifts.push_back(ns[q]);
    }
  }
  compactFaces(w);
}

void collapsePass(Work& w, double target) {
  const double minLen = 4.0 / 5.0 * target;
  const double maxLen = 4.0 / 3.0 * target;
  const auto edges = buildEdgeList(w);

  std::vector<std::vector<int>> vertFaces(w.verts.size());
  for (int f = 0; f < static_cast<int>(w.faces.size()); ++f)
    for (int k = 0; k < 3; ++k)
      vertFaces[static_cast<std::size_t>(w.faces[static_cast<std::size_t>(f)][k])].push_back(f);
  std::vector<std::unordered_set<int>> ring(w.verts.size());
  for (const ERec& e : edges) {
    ring[static_cast<std::size_t>(e.v0)].insert(e.v1);
    ring[static_cast<std::size_t>(e.v1)].insert(e.v0);
  }
  std::vector<char> touched(w.verts.size(), 0);

  for (const ERec& e : edges) {
    if (!w.faceAlive(e.f0) || !w.faceAlive(e.f1)) continue;
    if (touched[static_cast<std::size_t>(e.v0)] || touched[static_cast<std::size_t>(e.v1)]) continue;
    const Vec3 P0 = w.corner(e.f0, e.c0);
    const Vec3 P1 = w.corner(e.f0, e.c0 + 1);
    if ((P1 - P0).norm() >= minLen) continue;
    const int a = w.faces[static_cast<std::size_t>(e.f0)][(e.c0 + 2) % 3];
    const int b = w.faces[static_cast<std::size_t>(e.f1)][(e.c1 + 2) % 3];
    if (a == b) continue;
    if (ring[static_cast<std::size_t>(a)].size() <= 3 || ring[static_cast<std::size_t>(b)].size() <= 3)
      continue;

    // Link condition: the shared one-ring must be exactly the two opposite
    // vertices, otherwise the collapse pinches the surface.
    int shared = 0;
    bool clean = true;
    for (int u : ring[static_cast<std::size_t>(e.v0)]) {
      if (!ring[static_cast<std::size_t>(e.v1)].count(u)) continue;
      ++shared;
      if (u != a && u != b) {
        clean = false;
        break;
      }
    }
    if (!clean || shared != 2) continue;

    const Vec3 mid = 0.5 * (P0 + P1);
    const Vec3 midCanon = wrapVec(mid);

    // Dry-run every surviving incident face with the merged vertex at mid.
    struct Patch {
      int face;
      std::array<int, 3> ids;
      std::array<Vec3, 3> world;
      std::array<Shift, 3> shifts;
    };
    std::vector<Patch> patches;
    bool ok = true;
    std::vector<int> incident;
    for (int f : vertFaces[static_cast<std::size_t>(e.v0)])
      if (w.faceAlive(f) && f != e.f0 && f != e.f1) incident.push_back(f);
    for (int f : vertFaces[static_cast<std::size_t>(e.v1)])
      if (w.faceAlive(f) && f != e.f0 && f != e.f1) incident.push_back(f);
    for (int f : incident) {
      Patch p;
      p.face = f;
      const auto& fc = w.faces[static_cast<std::size_t>(f)];
      int kv = -1;
      for (int k = 0; k < 3; ++k)
        if (fc[k] == e.v0 || fc[k] == e.v1) kv = k;
      const bool fromV0 = fc[kv] == e.v0;
      const Vec3 ref = fromV0 ? P0 : P1;
      const Vec3 delta = snapLattice(w.corner(f, kv) - ref);
      std::array<Vec3, 3> oldW = {w.corner(f, 0), w.corner(f, 1), w.corner(f, 2)};
      p.world = oldW;
      p.world[static_cast<std::size_t>(kv)] = mid + delta;
      p.ids = fc;
      p.ids[static_cast<std::size_t>(kv)] = e.v1;
      const auto before = normalArea(oldW[0], oldW[1], oldW[2]);
      const auto after = normalArea(p.world[0], p.world[1], p.world[2]);
      if (!(after.second > 0) || after.first.dot(before.first) <= 0) {
        ok = false;
        break;
      }
      for (int k = 0; k < 3 && ok; ++k)
        if (k != kv && (p.world[static_cast<std::size_t>(k)] - p.world[static_cast<std::size_t>(kv)]).norm() > maxLen)
          ok = false;
      if (!ok) break;
      patches.push_back(p);
    }
    if (!ok) continue;

    // Shifts are derived against the merged canonical position, so commit it
    // first, then re-aim every patched face.
    const Vec3 savedV1 = w.verts[static_cast<std::size_t>(e.v1)];
    w.verts[static_cast<std::size_t>(e.v1)] = midCanon;
    bool shiftsOk = true;
    for (auto& p : patches)
      if (!deriveShifts(w, p.ids, p.world, p.shifts)) {
        shiftsOk = false;
        break;
      }
    if (!shiftsOk) {
      w.verts[static_cast<std::size_t>(e.v1)] = savedV1;
      continue;
    }
    for (const auto& p : patches) {
      w.faces[static_cast<std::size_t>(p.face)] = p.ids;
      w.shifts[static_cast<std::size_t>(p.face)] = p.shifts;
      vertFaces[static_cast<std::size_t>(e.v1)].push_back(p.face);
    }
    w.faces[static_cast<std::size_t>(e.f0)][0] = -1;
    w.faces[static_cast<std::size_t>(e.f1)][0] = -1;
    w.vertAlive[static_cast<std::size_t>(e.v0)] = 0;

    touched[static_cast<std::size_t>(e.v0)] = touched[static_cast<std::size_t>(e.v1)] = 1;
    for (int u : ring[static_cast<std::size_t>(e.v0)]) touched[static_cast<std::size_t>(u)] = 1;
    for (int u : ring[static_cast<std::size_t>(e.v1)]) touched[static_cast<std::size_t>(u)] = 1;
  }
  compactFaces(w);
  compactVertices(w);
}

void flipPass(Work& w) {
  const auto edges = buildEdgeList(w);
  std::vector<int> valence(w.verts.size(), 0);
  std::unordered_set<std::uint64_t> edgeSet;
  edgeSet.reserve(edges.size() * 2);
  for (const ERec& e : edges) {
    ++valence[static_cast<std::size_t>(e.v0)];
    ++valence[static_cast<std::size_t>(e.v1)];
    edgeSet.insert(pairKey(e.v0, e.v1));
  }
  std::vector<char> dirty(w.faces.size(), 0);
  auto dev = [](int v) { return (v - 6) * (v - 6); };

  for (const ERec& e : edges) {
    if (dirty[static_cast<std::size_t>(e.f0)] || dirty[static_cast<std::size_t>(e.f1)]) continue;
    const int a = w.faces[static_cast<std::size_t>(e.f0)][(e.c0 + 2) % 3];
    const int b = w.faces[static_cast<std::size_t>(e.f1)][(e.c1 + 2) % 3];
    if (a == b || edgeSet.count(pairKey(a, b))) continue;
    if (valence[static_cast<std::size_t>(e.v0)] <= 3 || valence[static_cast<std::size_t>(e.v1)] <= 3)
      continue;
    const int before = dev(valence[static_cast<std::size_t>(e.v0)]) + dev(valence[static_cast<std::size_t>(e.v1)]) +
                       dev(valence[static_cast<std::size_t>(a)]) + dev(valence[static_cast<std::size_t>(b)]);
    const int after = dev(valence[static_cast<std::size_t>(e.v0)] - 1) +
                      dev(valence[static_cast<std::size_t>(e.v1)] - 1) +
                      dev(valence[static_cast<std::size_t>(a)] + 1) + dev(valence[static_cast<std::size_t>(b)] + 1);
    if (after >= before) continue;

    const Vec3 P0 = w.corner(e.f0, e.c0);
    const Vec3 P1 = w.corner(e.f0, e.c0 + 1);
    const Vec3 Pa = w.corner(e.f0, e.c0 + 2);
    const Vec3 tau = snapLattice(P1 - w.corner(e.f1, e.c1));
    const Vec3 Pb = w.corner(e.f1, e.c1 + 2) + tau;

    const auto n0 = normalArea(P0, P1, Pa);
    const auto n1 = normalArea(P1, P0, Pb);
    const Vec3 nref = n0.first + n1.first;
    const auto t0 = normalArea(P0, Pb, Pa);
    const auto t1 = normalArea(P1, Pa, Pb);
    if (!(t0.second > 0) || !(t1.second > 0)) continue;
    if (t0.first.dot(nref) <= 0 || t1.first.dot(nref) <= 0) continue;

    const std::array<int, 3> id0 = {e.v0, b, a}, id1 = {e.v1, a, b};
    std::array<Shift, 3> s0, s1;
    if (!deriveShifts(w, id0, {P0, Pb, Pa}, s0)) continue;
    if (!deriveShifts(w, id1, {P1, Pa, Pb}, s1)) continue;

    w.faces[static_cast<std::size_t>(e.f0)] = id0;
    w.shifts[static_cast<std::size_t>(e.f0)] = s0;
    w.faces[static_cast<std::size_t>(e.f1)] = id1;
    w.shifts[static_cast<std::size_t>(e.f1)] = s1;
    dirty[static_cast<std::size_t>(e.f0)] = dirty[static_cast<std::size_t>(e.f1)] = 1;
    edgeSet.erase(pairKey(e.v0, e.v1));
    edgeSet.insert(pairKey(a, b));
    --valence[static_cast<std::size_t>(e.v0)];
    --valence[static_cast<std::size_t>(e.v1)];
    ++valence[static_cast<std::size_t>(a)];
    ++valence[static_cast<std::size_t>(b)];
  }
}

void relaxPass(Work& w) {
  const std::size_t V = w.verts.size();
  std::vector<Vec3> normal(V, Vec3::Zero());
  std::vector<std::vector<std::pair<int, Vec3>>> star(V);  // neighbor id, position with v at its canonical spot
  for (int f = 0; f < static_cast<int>(w.faces.size()); ++f) {
    const std::array<Vec3, 3> p = {w.corner(f, 0), w.corner(f, 1), w.corner(f, 2)};
    const auto na = normalArea(p[0], p[1], p[2]);
    for (int k = 0; k < 3; ++k) {
      const int v = w.faces[static_cast<std::size_t>(f)][k];
      const Vec3 e0 = p[(k + 1) % 3] - p[k], e1 = p[(k + 2) % 3] - p[k];
      const double angle = std::atan2(e0.cross(e1).norm(), e0.dot(e1));
      normal[static_cast<std::size_t>(v)] += angle * na.first;
      const Vec3 adjust = w.verts[static_cast<std::size_t>(v)] - p[k];
      star[static_cast<std::size_t>(v)].push_back({w.faces[static_cast<std::size_t>(f)][(k + 1) % 3],
                                                   p[(k + 1) % 3] + adjust});
    }
  }
  std::vector<Vec3> next(V);
  for (std::size_t v = 0; v < V; ++v) {
    Vec3 c = Vec3::Zero();
    if (star[v].empty()) {
      next[v] = w.verts[v];
      continue;
    }
    for (const auto& s : star[v]) c += s.second;
    c /= static_cast<double>(star[v].size());
    const double nn = normal[v].norm();
    Vec3 d = c - w.verts[v];
    if (nn > 0) {
      const Vec3 n = normal[v] / nn;
      d -= d.dot(n) * n;
    }
    next[v] = w.verts[v] + 0.5 * d;
  }
  w.verts = next;
}

}  // namespace

PeriodicSurfaceMesh remesh(const PeriodicSurfaceMesh& mesh, double targetEdgeLength) {
  if (!(targetEdgeLength > 0)) throw InputError("target edge length must be positive");
  Work w;
  w.verts = mesh.vertices;
  w.vertAlive.assign(w.verts.size(), 1);
  w.faces = mesh.faces;
  w.shifts = mesh.shifts;

  splitPass(w, targetEdgeLength);
  collapsePass(w, targetEdgeLength);
  flipPass(w);
  relaxPass(w);

  PeriodicSurfaceMesh out;
  out.vertices = std::move(w.verts);
  out.faces = std::move(w.faces);
  out.shifts = std::move(w.shifts);
  rewrap(out);
  out.validateOrThrow();
  return out;
}

}  // namespace shellcond
