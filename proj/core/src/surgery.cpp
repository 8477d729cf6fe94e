#include "shellcond/surgery.h"

#include "shellcond/errors.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace shellcond {
namespace {

double wrapUnit(double x) { return x - 2.0 * std::floor((x + 1.0) / 2.0); }
Vec3 wrapVec(const Vec3& p) { return Vec3(wrapUnit(p[0]), wrapUnit(p[1]), wrapUnit(p[2])); }

std::uint64_t pairKey(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct Topology {
  std::vector<EdgeInfo> edges;
  std::unordered_map<std::uint64_t, std::pair<int, int>> edgeFaces;  // pairKey -> (f0, f1)
  std::vector<std::vector<std::pair<int, double>>> nbr;              // vertex -> (vertex, length)
  std::vector<std::vector<int>> vertFaces;
};

Topology buildTopology(const PeriodicSurfaceMesh& m) {
  Topology t;
  t.edges = buildEdges(m);
  t.nbr.resize(m.vertexCount());
  for (const EdgeInfo& e : t.edges) {
    const double len = (m.corner(e.f0, (e.c0 + 1) % 3) - m.corner(e.f0, e.c0)).norm();
    t.edgeFaces.emplace(pairKey(e.v0, e.v1), std::make_pair(e.f0, e.f1));
    t.nbr[static_cast<std::size_t>(e.v0)].push_back({e.v1, len});
    t.nbr[static_cast<std::size_t>(e.v1)].push_back({e.v0, len});
  }
  t.vertFaces = vertexFaceAdjacency(m);
  return t;
}

// Attempts one neck cut; returns true and replaces the mesh on success.
bool tryOneSurgery(PeriodicSurfaceMesh& mesh, double threshold) {
  const double ballRadius = 4.0 * threshold;
  const double loopMax = 3.0 * M_PI * threshold;
  const Topology topo = buildTopology(mesh);
  const int V = static_cast<int>(mesh.vertexCount());

  std::vector<double> dist(static_cast<std::size_t>(V));
  std::vector<int> stamp(static_cast<std::size_t>(V), -1);

  for (int seed = 0; seed < V; ++seed) {
    // Geodesic ball by Dijkstra over edge lengths, truncated at ballRadius.
    using QItem = std::pair<double, int>;
    std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> queue;
    std::vector<int> ball;
    dist[static_cast<std::size_t>(seed)] = 0;
    stamp[static_cast<std::size_t>(seed)] = seed;
    queue.push({0.0, seed});
    while (!queue.empty()) {
      const auto [d, v] = queue.top();
      queue.pop();
      if (d > dist[static_cast<std::size_t>(v)] + 1e-15) continue;
      ball.push_back(v);
      for (const auto& [u, len] : topo.nbr[static_cast<std::size_t>(v)]) {
        const double nd = d + len;
        if (nd > ballRadius) continue;
        if (stamp[static_cast<std::size_t>(u)] == seed && dist[static_cast<std::size_t>(u)] <= nd) continue;
        stamp[static_cast<std::size_t>(u)] = seed;
        dist[static_cast<std::size_t>(u)] = nd;
        queue.push({nd, u});
      }
    }
    if (static_cast<int>(ball.size()) >= V) continue;
    auto inBall = [&](int v) { return stamp[static_cast<std::size_t>(v)] == seed; };

    std::unordered_set<int> candidateFaces, ballFaces;
    for (int v : ball)
      for (int f : topo.vertFaces[static_cast<std::size_t>(v)]) candidateFaces.insert(f);
    for (int f : candidateFaces) {
      const auto& fc = mesh.faces[static_cast<std::size_t>(f)];
      if (inBall(fc[0]) && inBall(fc[1]) && inBall(fc[2])) ballFaces.insert(f);
    }
    if (ballFaces.empty()) continue;

    // Directed boundary half-edges as traversed by the surviving faces.
    std::unordered_map<int, std::tuple<int, int, int>> next;  // u -> (w, face, corner)
    bool messy = false;
    for (int f : candidateFaces) {
      if (ballFaces.count(f)) continue;
      for (int k = 0; k < 3 && !messy; ++k) {
        const int u = mesh.faces[static_cast<std::size_t>(f)][k];
        const int w2 = mesh.faces[static_cast<std::size_t>(f)][(k + 1) % 3];
        const auto it = topo.edgeFaces.find(pairKey(u, w2));
        const int other = it->second.first == f ? it->second.second : it->second.first;
        if (!ballFaces.count(other)) continue;
        if (next.count(u)) messy = true;
        next[u] = {w2, f, k};
      }
      if (messy) break;
    }
    if (messy || next.empty()) continue;

    // Split the boundary into closed loops.
    std::vector<std::vector<int>> loops;          // vertex ids
    std::vector<std::vector<std::pair<int, int>>> loopEdges;  // (face, corner) per step
    std::unordered_set<int> visited;
    bool broken = false;
    for (const auto& [start, ignored] : next) {
      (void)ignored;
      if (visited.count(start)) continue;
      std::vector<int> loop;
      std::vector<std::pair<int, int>> steps;
      int v = start;
      for (std::size_t guard = 0; guard <= next.size(); ++guard) {
        loop.push_back(v);
        visited.insert(v);
        const auto [w2, f, k] = next[v];
        steps.push_back({f, k});
        v = w2;
        if (v == start) break;
        if (visited.count(v)) {
          broken = true;
          break;
        }
      }
      if (broken || v != start) {
        broken = true;
        break;
      }
      loops.push_back(std::move(loop));
      loopEdges.push_back(std::move(steps));
    }
    if (broken || loops.size() != 2) continue;

    bool shortLoops = true;
    for (const auto& steps : loopEdges) {
      double len = 0;
      for (const auto& [f, k] : steps) len += (mesh.corner(f, (k + 1) % 3) - mesh.corner(f, k)).norm();
      if (len > loopMax) shortLoops = false;
    }
    if (!shortLoops) continue;

    // Only annular regions are cut, so each surgery adds exactly +2 to the
    // Euler characteristic.
    std::unordered_set<int> regionVerts;
    std::unordered_set<std::uint64_t> regionEdges;
    for (int f : ballFaces)
      for (int k = 0; k < 3; ++k) {
        regionVerts.insert(mesh.faces[static_cast<std::size_t>(f)][k]);
        regionEdges.insert(pairKey(mesh.faces[static_cast<std::size_t>(f)][k],
                                   mesh.faces[static_cast<std::size_t>(f)][(k + 1) % 3]));
      }
    const long chiRegion = static_cast<long>(regionVerts.size()) - static_cast<long>(regionEdges.size()) +
                           static_cast<long>(ballFaces.size());
    if (chiRegion != 0) continue;

    // Commit: drop the tube, cap both loops with centroid fans.
    PeriodicSurfaceMesh out;
    out.vertices = mesh.vertices;
    for (int f = 0; f < static_cast<int>(mesh.faceCount()); ++f) {
      if (ballFaces.count(f)) continue;
      out.faces.push_back(mesh.faces[static_cast<std::size_t>(f)]);
      out.shifts.push_back(mesh.shifts[static_cast<std::size_t>(f)]);
    }
    bool capped = true;
    for (std::size_t li = 0; li < loops.size() && capped; ++li) {
      const auto& loop = loops[li];
      const auto& steps = loopEdges[li];
      const std::size_t L = loop.size();
      if (L < 3) {
        capped = false;
        break;
      }
      // Unwrap the loop into one frame; boundary loops are short, so they
      // cannot wind around the torus and the chain closes.
      std::vector<Vec3> pos(L);
      pos[0] = mesh.vertices[static_cast<std::size_t>(loop[0])];
      for (std::size_t s = 0; s + 1 < L; ++s) {
        const auto [f, k] = steps[s];
        pos[s + 1] = pos[s] + (mesh.corner(f, (k + 1) % 3) - mesh.corner(f, k));
      }
      const auto [fl, kl] = steps[L - 1];
      const Vec3 closure = pos[L - 1] + (mesh.corner(fl, (kl + 1) % 3) - mesh.corner(fl, kl)) - pos[0];
      if (closure.norm() > 1e-9) {
        capped = false;
        break;
      }
      Vec3 centroid = Vec3::Zero();
      for (const Vec3& p : pos) centroid += p;
      centroid /= static_cast<double>(L);
      const int q = static_cast<int>(out.vertices.size());
      out.vertices.push_back(wrapVec(centroid));
      for (std::size_t s = 0; s < L && capped; ++s) {
        const int u = loop[s];
        const int w2 = loop[(s + 1) % L];
        const std::array<int, 3> ids = {w2, u, q};
        const std::array<Vec3, 3> world = {pos[(s + 1) % L], pos[s], centroid};
        std::array<Shift, 3> fs;
        std::array<Shift, 3> raw;
        for (int k = 0; k < 3; ++k) {
          const Vec3 d = (world[static_cast<std::size_t>(k)] -
                          out.vertices[static_cast<std::size_t>(ids[static_cast<std::size_t>(k)])]) / 2.0;
          raw[k] = Shift(static_cast<int>(std::lround(d[0])), static_cast<int>(std::lround(d[1])),
                         static_cast<int>(std::lround(d[2])));
        }
        for (int k = 0; k < 3; ++k) {
          fs[k] = raw[k] - raw[0];
          for (int a = 0; a < 3; ++a)
            if (fs[k][a] < -1 || fs[k][a] > 1) capped = false;
        }
        if (!capped) break;
        out.faces.push_back(ids);
        out.shifts.push_back(fs);
      }
    }
    if (!capped) continue;

    // Drop vertices strictly inside the removed tube.
    std::vector<int> remap(out.vertices.size(), -1);
    for (const auto& fc : out.faces)
      for (int k = 0; k < 3; ++k) remap[static_cast<std::size_t>(fc[k])] = 0;
    std::vector<Vec3> keptVerts;
    for (std::size_t v = 0; v < out.vertices.size(); ++v)
      if (remap[v] >= 0) {
        remap[v] = static_cast<int>(keptVerts.size());
        keptVerts.push_back(out.vertices[v]);
      }
    out.vertices = std::move(keptVerts);
    for (auto& fc : out.faces)
      for (int k = 0; k < 3; ++k) fc[k] = remap[static_cast<std::size_t>(fc[k])];

    out.validateOrThrow();
    mesh = std::move(out);
    return true;
  }
  return false;
}

}  // namespace

SurgeryResult detect_and_surgery(const PeriodicSurfaceMesh& mesh, double threshold) {
  if (!(threshold >= 0)) throw InputError("surgery threshold must be >= 0");
  SurgeryResult result;
  result.mesh = mesh;
  if (threshold == 0) return result;
  for (int guard = 0; guard < 64; ++guard) {
    if (!tryOneSurgery(result.mesh, threshold)) break;
    ++result.count;
  }
  return result;
}

}  // namespace shellcond
