#include "shellcond/optimize.h"

#include "shellcond/adc.h"
#include "shellcond/errors.h"
#include "shellcond/gradient.h"
#include "shellcond/remesh.h"
#include "shellcond/surgery.h"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

namespace shellcond {
namespace {

struct Evaluation {
  double value = 0;
  Eigen::VectorXd g;
  GeometryCache cache;
  bool degenerateIsoGap = false, targetAtMinimum = false;
};

Evaluation evaluateMesh(const PeriodicSurfaceMesh& mesh, const ObjectiveSpec& spec,
                        const OptConfig& cfg) {
  Evaluation ev;
  ev.cache = build_geometry(mesh, cfg.geometry);
  const AdcResult adc = adc_matrix(mesh, ev.cache, cfg.kappa);
  ObjectiveGradient og = objective_gradient(mesh, ev.cache, adc, spec);
  ev.value = og.value;
  ev.g = std::move(og.g);
  ev.degenerateIsoGap = og.degenerateIsoGap;
  ev.targetAtMinimum = og.targetAtMinimum;
  return ev;
}

double objectiveOnly(const PeriodicSurfaceMesh& mesh, const ObjectiveSpec& spec,
                     const OptConfig& cfg) {
  const GeometryCache cache = build_geometry(mesh, cfg.geometry);
  const AdcResult adc = adc_matrix(mesh, cache, cfg.kappa);
  return evaluate_objective(spec, adc.kA).value;
}

// Shared trial builder: offsets vertices by t*(d.n + w*(-S)x) and re-wraps.
PeriodicSurfaceMesh trialMesh(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache,
                              const Eigen::VectorXd& d, double fairingWeight, double t) {
  const Eigen::Matrix<double, Eigen::Dynamic, 3> fair = laplacianPositions(mesh, cache);
  PeriodicSurfaceMesh out = mesh;
  for (std::size_t v = 0; v < out.vertices.size(); ++v) {
    const Vec3 move = d[static_cast<Eigen::Index>(v)] * cache.vertexNormal[v] +
                      fairingWeight * Vec3(fair.row(static_cast<Eigen::Index>(v)));
    out.vertices[v] += t * move;
  }
  rewrap(out);
  return out;
}

ArmijoResult lineSearch(const PeriodicSurfaceMesh& mesh, const GeometryCache& cache,
                        const ObjectiveSpec& spec, const Eigen::VectorXd& d, double f0,
                        const Eigen::VectorXd& g, const OptConfig& cfg) {
  ArmijoResult res;
  if (d.cwiseAbs().maxCoeff() == 0) {  // vacuous: nothing to move
    res.step = cfg.armijo.initialStep;
    res.mesh = mesh;
    res.objective = f0;
    res.accepted = true;
    return res;
  }
  double slope = 0;  // <g, d>_M
  for (Eigen::Index q = 0; q < g.size(); ++q) slope += cache.vertexArea[q] * g[q] * d[q];

  PeriodicSurfaceMesh best;
  const auto trial = [&](double t) -> std::optional<double> {
    try {
      PeriodicSurfaceMesh candidate = trialMesh(mesh, cache, d, cfg.fairingWeight, t);
      const double value = objectiveOnly(candidate, spec, cfg);
      if (!std::isfinite(value)) return std::nullopt;
      best = std::move(candidate);
      return value;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  const auto hit = armijo_search(trial, f0, slope, cfg.armijo);
  if (hit) {
    res.step = hit->first;
    res.objective = hit->second;
    res.mesh = std::move(best);
    res.accepted = true;
  } else {
    res.step = cfg.armijo.minStep * cfg.armijo.shrinkFactor;
    res.objective = f0;
    res.mesh = mesh;
    res.accepted = false;
  }
  return res;
}

double trailingSlope(const std::vector<IterationRecord>& log, int window) {
  const int n = static_cast<int>(log.size());
  const int start = n - window;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < window; ++k) {
    const double x = k;
    const double y = log[static_cast<std::size_t>(start + k)].objective;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = window * sxx - sx * sx;
  return (window * sxy - sx * sy) / denom;
}

}  // namespace

Eigen::VectorXd precondition(const GeometryCache& cache, const Eigen::VectorXd& g, double c) {
  if (c < 0) throw InputError("precondition strength must be >= 0");
  if (c == 0) return cache.massMatrix.diagonal().cwiseInverse().cwiseProduct(g);
  Eigen::SparseMatrix<double> A = cache.massMatrix + c * cache.stiffness;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw SolveError("preconditioner factorization failed");
  const Eigen::VectorXd rhs = (c + 1.0) * g;
  Eigen::VectorXd d = solver.solve(rhs);
  const double rhsNorm = rhs.norm();
  if (rhsNorm > 0 && (A * d - rhs).norm() > 1e-10 * rhsNorm) {
    d += solver.solve(rhs - A * d);
    if ((A * d - rhs).norm() > 1e-10 * rhsNorm) throw SolveError("preconditioner solve inaccurate");
  }
  return d;
}

std::optional<std::pair<double, double>> armijo_search(
    const std::function<std::optional<double>(double)>& trial, double f0, double slope,
    const ArmijoConfig& cfg) {
  for (double t = cfg.initialStep; t >= cfg.minStep; t *= cfg.shrinkFactor) {
    const auto value = trial(t);
    if (!value) continue;
    if (*value - f0 >= cfg.slopeFraction * t * slope) return std::make_pair(t, *value);
  }
  return std::nullopt;
}

ArmijoResult armijo_step(const PeriodicSurfaceMesh& mesh, const ObjectiveSpec& spec,
                         const Eigen::VectorXd& d, double f0, const Eigen::VectorXd& g,
                         const OptConfig& cfg) {
  const GeometryCache cache = build_geometry(mesh, cfg.geometry);
  return lineSearch(mesh, cache, spec, d, f0, g, cfg);
}

OptimizeResult optimize(const PeriodicSurfaceMesh& mesh, const ObjectiveSpec& spec,
                        const OptConfig& cfg) {
  OptimizeResult result;
  result.mesh = mesh;
  result.mesh.validateOrThrow();

  int consecutiveFailures = 0;
  double lastAccepted = std::numeric_limits<double>::quiet_NaN();
  for (int iter = 0; iter < cfg.maxIterations; ++iter) {
    const PeriodicSurfaceMesh lastGood = result.mesh;
    IterationRecord rec;
    rec.iteration = iter;
    try {
      PeriodicSurfaceMesh work = result.mesh;
      if (cfg.enableSurgery) {
        SurgeryResult sr = detect_and_surgery(work, cfg.surgeryThreshold);
        work = std::move(sr.mesh);
        rec.surgeries = sr.count;
      }
      PeriodicSurfaceMesh beforeRemesh = work;
      if (cfg.enableRemesh) work = remesh(work, cfg.remeshTargetLength);

      Evaluation ev = evaluateMesh(work, spec, cfg);
      // Remeshing alone may lower the objective; skip it for this iteration
      // when that happens so accepted values stay non-decreasing.
      if (cfg.enableRemesh && std::isfinite(lastAccepted) && rec.surgeries == 0 &&
          ev.value < lastAccepted) {
        work = std::move(beforeRemesh);
        ev = evaluateMesh(work, spec, cfg);
      }
      rec.objectiveBefore = ev.value;
      rec.degenerateIsoGap = ev.degenerateIsoGap;
      rec.targetAtMinimum = ev.targetAtMinimum;
      double gn = 0;
      for (Eigen::Index q = 0; q < ev.g.size(); ++q)
        gn += ev.cache.vertexArea[q] * ev.g[q] * ev.g[q];
      rec.gradNorm = std::sqrt(gn);

      // The screened solve amplifies the constant mode by the inverse mean
      // vertex area, so the raw direction magnitude grows with resolution.
      // Searching along the unit mass-norm direction keeps the step ladder
      // meaningful at every mesh size.
      Eigen::VectorXd d = precondition(ev.cache, ev.g, cfg.preconditionStrength);
      double dNorm = 0;
      for (Eigen::Index q = 0; q < d.size(); ++q)
        dNorm += ev.cache.vertexArea[static_cast<std::size_t>(q)] * d[q] * d[q];
      dNorm = std::sqrt(dNorm);
      if (dNorm > 0) d /= dNorm;
      const ArmijoResult ls = lineSearch(work, ev.cache, spec, d, ev.value, ev.g, cfg);
      rec.step = ls.step;
      if (ls.accepted) {
        result.mesh = ls.mesh;
        result.mesh.validateOrThrow();
        rec.objective = ls.objective;
        rec.lineSearchFailed = false;
        consecutiveFailures = 0;
        lastAccepted = ls.objective;
      } else {
        // Roll back the whole iteration (including surgery/remesh) so a
        // failed search leaves the optimizer state untouched.
        result.mesh = lastGood;
        rec.objective = ev.value;
        rec.lineSearchFailed = true;
        ++consecutiveFailures;
      }
      rec.vertices = static_cast<int>(result.mesh.vertexCount());
      rec.faces = static_cast<int>(result.mesh.faceCount());
      rec.area = build_geometry(result.mesh, cfg.geometry).totalArea;
    } catch (const std::exception& e) {
      result.mesh = lastGood;
      result.aborted = true;
      result.abortReason = e.what();
      result.log.push_back(rec);
      return result;
    }
    result.log.push_back(rec);

    if (consecutiveFailures >= cfg.minStepRepeats) break;
    if (static_cast<int>(result.log.size()) >= cfg.regressionWindow &&
        trailingSlope(result.log, cfg.regressionWindow) < cfg.regressionSlopeTol)
      break;
  }
  return result;
}

}  // namespace shellcond
