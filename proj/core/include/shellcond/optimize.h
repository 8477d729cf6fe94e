#pragma once

#include "shellcond/geometry.h"
#include "shellcond/mesh.h"
#include "shellcond/objective.h"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace shellcond {

struct ArmijoConfig {
  double initialStep = 1.0;
  double shrinkFactor = 0.5;
  double slopeFraction = 1e-4;
  double minStep = 1e-4;
};

struct OptConfig {
  double kappa = 1.0;
  double preconditionStrength = 1.0;  // c in (M + cS) d = (c+1) g
  double fairingWeight = 0.1;         // w on the -Sx term inside trials
  ArmijoConfig armijo;
  int maxIterations = 500;
  int minStepRepeats = 5;       // consecutive line-search failures to stop
  int regressionWindow = 50;    // objectives in the trailing slope fit
  double regressionSlopeTol = 1e-3;
  double remeshTargetLength = 0.06;
  double surgeryThreshold = 0.02;
  bool enableRemesh = true;   // FD validation turns these off
  bool enableSurgery = true;
  GeometryOptions geometry;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0;      // after the accepted step
  double objectiveBefore = 0;
  double step = 0;
  int vertices = 0, faces = 0;
  double area = 0;
  int surgeries = 0;
  double gradNorm = 0;  // mass-weighted norm of g
  bool lineSearchFailed = false;
  bool degenerateIsoGap = false;
  bool targetAtMinimum = false;
};

// Screened step direction: solves (M + c S) d = (c+1) g; SPD for c >= 0.
Eigen::VectorXd precondition(const GeometryCache& cache, const Eigen::VectorXd& g, double c);

// Backtracking core shared with tests: tries initialStep*shrink^m, accepting
// the first step whose evaluated objective improves on f0 by at least
// slopeFraction*step*slope; trial() returning nullopt rejects the step.
// Returns (step, objective) or nullopt once step falls below minStep.
std::optional<std::pair<double, double>> armijo_search(
    const std::function<std::optional<double>(double)>& trial, double f0, double slope,
    const ArmijoConfig& cfg);

struct ArmijoResult {
  double step = 0;
  PeriodicSurfaceMesh mesh;
  double objective = 0;
  bool accepted = false;
};

// One line search along x + t (d.n + w*(-S)x) with re-wrapping; failed trials
// (invalid geometry, solver failure) shrink and continue. On failure returns
// the input mesh with accepted=false and step below minStep.
ArmijoResult armijo_step(const PeriodicSurfaceMesh& mesh, const ObjectiveSpec& spec,
                         const Eigen::VectorXd& d, double f0, const Eigen::VectorXd& g,
                         const OptConfig& cfg);

struct OptimizeResult {
  PeriodicSurfaceMesh mesh;
  std::vector<IterationRecord> log;
  bool aborted = false;
  std::string abortReason;
};

// Per-iteration pipeline: surgery, remesh, evaluate (ADC + objective +
// gradient), precondition, line search, update, convergence test. A failed
// line search rolls the iteration back to its starting mesh, so accepted
// objective values are non-decreasing. Unrecoverable solver/validation
// errors abort with the last good mesh.
OptimizeResult optimize(const PeriodicSurfaceMesh& mesh, const ObjectiveSpec& spec,
                        const OptConfig& cfg);

}  // namespace shellcond
