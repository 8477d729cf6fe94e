#include "shellcond/adc.h"
#include "shellcond/errors.h"
#include "shellcond/geometry.h"
#include "shellcond/gradient.h"
#include "shellcond/implicit.h"
#include "shellcond/mesh_io.h"
#include "shellcond/objective.h"
#include "shellcond/optimize.h"
#include "shellcond/profile.h"
#include "shellcond/remesh.h"
#include "shellcond/revolve.h"
#include "shellcond/surgery.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using nlohmann::json;
using namespace shellcond;

constexpr const char* kVersion = "0.1.0";

int workerCount() {
  if (const char* env = std::getenv("SHELLCOND_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(8u, hw == 0 ? 1u : hw));
}

// Runs fn(0..count-1) on up to workerCount() threads; exceptions rethrown.
void parallelPoints(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(workerCount(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> nextIndex{0};
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = nextIndex++; i < count && !failed; i = nextIndex++) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
        failed = true;
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void writeText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

struct ManifestWriter {
  json config = json::object();
  std::vector<std::string> inputs, outputs;
  json extra = json::object();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const std::string& subcommand, const std::string& besidePath) const {
    json m;
    m["tool"] = "shellcond";
    m["version"] = kVersion;
    m["subcommand"] = subcommand;
    m["config"] = config;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    m["wallClockSeconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    writeText(besidePath + ".manifest.json", m.dump(2) + "\n");
  }
};

json matrixJson(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

// Deterministic spread of directions on the sphere (golden-angle spiral).
std::vector<Vec3> sphereDirections(int n) {
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(n));
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = n == 1 ? 0.0 : 1.0 - 2.0 * i / double(n - 1);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    dirs.push_back(Vec3(r * std::cos(phi), r * std::sin(phi), z).normalized());
  }
  return dirs;
}

double fitLogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 3) throw InputError("slope fit needs at least 3 data points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw InputError("slope fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string formatDouble(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

int cmdGen(const std::string& type, int resolution, const std::string& out,
           const std::string& profileExpr, double radius, double level, unsigned seed,
           double strength, int cutoff, const std::string& inPath) {
  ManifestWriter mw;
  mw.config = {{"type", type},       {"resolution", resolution}, {"out", out},
               {"profile", profileExpr}, {"radius", radius},     {"level", level},
               {"seed", seed},       {"strength", strength},     {"cutoff", cutoff},
               {"in", inPath}};

  PeriodicSurfaceMesh mesh;
  if (type == "plane" || type == "schwarz-p" || type == "gyroid" || type == "diamond" ||
      type == "iwp") {
    ImplicitSpec spec;
    spec.kind = implicit_kind_from_name(type);
    spec.level = level;
    spec.resolution = resolution;
    mesh = generate_implicit(spec);
  } else if (type == "cylinder") {
    mesh = revolve_mesh(RevolutionProfile::constant(radius), resolution, resolution);
  } else if (type == "revolve") {
    if (profileExpr.empty()) throw InputError("--type revolve requires --profile");
    mesh = revolve_mesh(RevolutionProfile::fromExpression(profileExpr),
                        resolution, resolution);
  } else if (type == "perturb") {
    if (inPath.empty()) throw InputError("--type perturb requires --in");
    mw.inputs.push_back(inPath);
    PerturbSpec spec;
    spec.strength = strength;
    spec.frequencyCutoff = cutoff;
    spec.seed = seed;
    mesh = perturb(load_mesh(inPath), spec);
  } else {
    throw InputError("unknown --type " + type);
  }
  save_mesh(mesh, out);
  mw.outputs.push_back(out);
  mw.write("gen", out);
  return 0;
}

int cmdEval(const std::string& meshPath, double kappa, const std::string& out, int directions) {
  ManifestWriter mw;
  mw.config = {{"mesh", meshPath}, {"kappa", kappa}, {"out", out}, {"directions", directions}};
  mw.inputs.push_back(meshPath);

  const PeriodicSurfaceMesh mesh = load_mesh(meshPath);
  const GeometryCache cache = build_geometry(mesh);
  const AdcResult adc = adc_matrix(mesh, cache, kappa);

  json result;
  result["kA"] = matrixJson(adc.kA);
  result["aac"] = aac(adc.kA);
  result["kappa"] = kappa;
  result["area"] = adc.totalArea;
  result["eulerCharacteristic"] = euler_characteristic(mesh);
  result["normalCovariance"] = matrixJson(adc.normalCovariance);
  result["Rmatrix"] = matrixJson(adc.Rmatrix);
  result["solverResiduals"] = {adc.solverResiduals[0], adc.solverResiduals[1],
                               adc.solverResiduals[2]};
  json axes = json::array();
  for (int i = 0; i < 3; ++i) axes.push_back(upper_bound_directional(mesh, cache, kappa, Vec3::Unit(i)));
  result["boundsAtAxes"] = axes;
  if (directions > 0) {
    json dirJson = json::array();
    for (const Vec3& p : sphereDirections(directions)) {
      dirJson.push_back({{"p", {p[0], p[1], p[2]}},
                         {"adc", adc_directional(adc.kA, p)},
                         {"bound", upper_bound_directional(mesh, cache, kappa, p)}});
    }
    result["directions"] = dirJson;
  }
  writeText(out, result.dump(2) + "\n");
  mw.outputs.push_back(out);
  mw.write("eval", out);
  return 0;
}

json recordJson(const IterationRecord& r) {
  return {{"iteration", r.iteration},
          {"objective", r.objective},
          {"objectiveBefore", r.objectiveBefore},
          {"step", r.step},
          {"vertices", r.vertices},
          {"faces", r.faces},
          {"area", r.area},
          {"surgeries", r.surgeries},
          {"gradNorm", r.gradNorm},
          {"lineSearchFailed", r.lineSearchFailed},
          {"degenerateIsoGap", r.degenerateIsoGap},
          {"targetAtMinimum", r.targetAtMinimum}};
}

int cmdOptimize(const std::string& meshPath, const std::string& objective, double precondition,
                double fairing, int maxIter, double kappa, double remeshLength,
                double surgeryThreshold, const std::string& out, const std::string& logPath) {
  ManifestWriter mw;
  mw.config = {{"mesh", meshPath},
               {"objective", objective},
               {"precondition", precondition},
               {"fairing", fairing},
               {"max-iter", maxIter},
               {"kappa", kappa},
               {"remesh-length", remeshLength},
               {"surgery-threshold", surgeryThreshold},
               {"out", out},
               {"log", logPath}};
  mw.inputs.push_back(meshPath);

  const ObjectiveSpec spec = parse_objective(objective);
  const PeriodicSurfaceMesh mesh = load_mesh(meshPath);
  OptConfig cfg;
  cfg.kappa = kappa;
  cfg.preconditionStrength = precondition;
  cfg.fairingWeight = fairing;
  cfg.maxIterations = maxIter;
  cfg.remeshTargetLength = remeshLength;
  cfg.surgeryThreshold = surgeryThreshold;

  const OptimizeResult result = optimize(mesh, spec, cfg);
  std::ostringstream log;
  for (const IterationRecord& r : result.log) log << recordJson(r).dump() << "\n";
  writeText(logPath, log.str());
  save_mesh(result.mesh, out);
  mw.outputs.push_back(out);
  mw.outputs.push_back(logPath);
  mw.extra["iterations"] = result.log.size();
  mw.extra["aborted"] = result.aborted;
  if (result.aborted) mw.extra["abortReason"] = result.abortReason;
  mw.write("optimize", out);
  if (result.aborted) {
    std::cerr << "optimize aborted: " << result.abortReason << " (last good mesh written)\n";
    return 3;
  }
  return 0;
}

int cmdStudyHConv(const std::string& profileExpr, int refinements, int baseN,
                  const std::string& out) {
  if (refinements < 3) throw InputError("h-conv needs at least 3 refinements");
  ManifestWriter mw;
  mw.config = {{"kind", "h-conv"},
               {"profile", profileExpr},
               {"refinements", refinements},
               {"base-n", baseN},
               {"out", out}};
  const RevolutionProfile profile = RevolutionProfile::fromExpression(profileExpr);
  const double reference = adc_axial_analytic(profile, 1e-12);

  struct Point {
    double h, value, error;
  };
  std::vector<Point> points(static_cast<std::size_t>(refinements));
  parallelPoints(refinements, [&](int i) {
    const int nx = baseN << i;
    const PeriodicSurfaceMesh mesh = revolve_mesh(profile, nx, 2 * nx);
    const GeometryCache cache = build_geometry(mesh);
    const AdcResult adc = adc_matrix(mesh, cache, 1.0);
    Point p;
    p.h = meanCircumradius(mesh, cache);
    p.value = adc.kA(0, 0);
    p.error = std::abs(p.value - reference) / std::abs(reference);
    points[static_cast<std::size_t>(i)] = p;
  });

  std::ostringstream csv;
  csv << "h,value,reference,error\n";
  std::vector<double> hs, errs;
  for (const Point& p : points) {
    csv << formatDouble(p.h) << ',' << formatDouble(p.value) << ',' << formatDouble(reference)
        << ',' << formatDouble(p.error) << "\n";
    hs.push_back(p.h);
    errs.push_back(p.error);
  }
  writeText(out, csv.str());
  mw.outputs.push_back(out);
  mw.extra["slope"] = fitLogLogSlope(hs, errs);
  mw.extra["reference"] = reference;
  mw.write("study", out);
  return 0;
}

int cmdStudyEpsOrder(const std::string& profileExpr, const std::vector<double>& epsilons,
                     int gridN, int gridM, const std::string& out) {
  if (epsilons.size() < 3) throw InputError("eps-order needs at least 3 thicknesses");
  ManifestWriter mw;
  mw.config = {{"kind", "eps-order"}, {"profile", profileExpr}, {"epsilons", epsilons},
               {"grid-n", gridN},     {"grid-m", gridM},        {"out", out}};
  const RevolutionProfile profile = RevolutionProfile::fromExpression(profileExpr);
  const double kaAxial = adc_axial_analytic(profile, 1e-12);

  struct Point {
    double eps, value, reference, error, gridChange;
  };
  std::vector<Point> points(epsilons.size());
  parallelPoints(static_cast<int>(epsilons.size()), [&](int i) {
    const double eps = epsilons[static_cast<std::size_t>(i)];
    const ShellConductivity fine = effective_conductivity_shell(profile, eps, gridN, gridM);
    const ShellConductivity doubled = effective_conductivity_shell(profile, eps, 2 * gridN, 2 * gridM);
    Point p;
    p.eps = eps;
    p.value = fine.kappaEps;
    p.reference = fine.rhoEps * kaAxial;  // rho_eps * kappa * kA_axial with kappa = 1
    p.error = std::abs(p.value - p.reference);
    p.gridChange = std::abs(doubled.kappaEps - fine.kappaEps) / std::abs(fine.kappaEps);
    points[static_cast<std::size_t>(i)] = p;
  });

  std::ostringstream csv;
  csv << "epsilon,value,reference,error\n";
  std::vector<double> eps, errs;
  double worstChange = 0;
  for (const Point& p : points) {
    csv << formatDouble(p.eps) << ',' << formatDouble(p.value) << ',' << formatDouble(p.reference)
        << ',' << formatDouble(p.error) << "\n";
    eps.push_back(p.eps);
    errs.push_back(p.error);
    worstChange = std::max(worstChange, p.gridChange);
  }
  writeText(out, csv.str());
  mw.outputs.push_back(out);
  mw.extra["slope"] = fitLogLogSlope(eps, errs);
  mw.extra["gridStable"] = worstChange < 1e-3;
  mw.extra["worstGridChange"] = worstChange;
  mw.extra["kaAxial"] = kaAxial;
  mw.write("study", out);
  return 0;
}

int cmdStudyPreconSweep(const std::string& meshPath, const std::string& objective,
                        const std::vector<double>& cValues, int maxIter, const std::string& out) {
  if (cValues.size() < 2) throw InputError("precon-sweep needs at least 2 strengths");
  ManifestWriter mw;
  mw.config = {{"kind", "precon-sweep"}, {"mesh", meshPath}, {"objective", objective},
               {"c-values", cValues},    {"max-iter", maxIter}, {"out", out}};
  mw.inputs.push_back(meshPath);
  const ObjectiveSpec spec = parse_objective(objective);
  const PeriodicSurfaceMesh mesh = load_mesh(meshPath);

  std::vector<OptimizeResult> results(cValues.size());
  parallelPoints(static_cast<int>(cValues.size()), [&](int i) {
    OptConfig cfg;
    cfg.preconditionStrength = cValues[static_cast<std::size_t>(i)];
    cfg.maxIterations = maxIter;
    results[static_cast<std::size_t>(i)] = optimize(mesh, spec, cfg);
  });

  std::ostringstream csv;
  csv << "c,iteration,objective,step\n";
  json itersTo99 = json::object();
  json stepSums = json::object();
  for (std::size_t ci = 0; ci < cValues.size(); ++ci) {
    const auto& log = results[ci].log;
    double stepSum = 0;
    for (const IterationRecord& r : log) {
      csv << formatDouble(cValues[ci]) << ',' << r.iteration << ',' << formatDouble(r.objective)
          << ',' << formatDouble(r.step) << "\n";
      if (!r.lineSearchFailed) stepSum += r.step;
    }
    const std::string key = formatDouble(cValues[ci]);
    stepSums[key] = stepSum;
    if (!log.empty()) {
      const double first = log.front().objectiveBefore;
      const double final = log.back().objective;
      const double mark = first + 0.99 * (final - first);
      int hit = static_cast<int>(log.size());
      for (const IterationRecord& r : log)
        if (r.objective >= mark) {
          hit = r.iteration;
          break;
        }
      itersTo99[key] = hit;
    }
  }
  writeText(out, csv.str());
  mw.outputs.push_back(out);
  mw.extra["itersTo99"] = itersTo99;
  mw.extra["acceptedStepSums"] = stepSums;
  mw.write("study", out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asymptotic directional conductivity of periodic shell lattices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a periodic surface mesh");
  std::string genType, genOut, genProfile, genIn;
  int genResolution = 64, genCutoff = 3;
  double genRadius = 0.3, genLevel = 0, genStrength = 0;
  unsigned genSeed = 0;
  gen->add_option("--type", genType,
                  "plane|cylinder|schwarz-p|gyroid|diamond|iwp|revolve|perturb")->required();
  gen->add_option("--resolution", genResolution, "grid divisions / revolve resolution");
  gen->add_option("--out", genOut, "output mesh path")->required();
  gen->add_option("--profile", genProfile, "radius expression R(x) for --type revolve");
  gen->add_option("--radius", genRadius, "cylinder radius");
  gen->add_option("--level", genLevel, "level-set value for implicit types");
  gen->add_option("--seed", genSeed, "perturbation seed");
  gen->add_option("--strength", genStrength, "perturbation strength");
  gen->add_option("--cutoff", genCutoff, "perturbation frequency cutoff");
  gen->add_option("--in", genIn, "input mesh for --type perturb");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate the ADC matrix of a mesh");
  std::string evalMesh, evalOut;
  double evalKappa = 1.0;
  int evalDirections = 0;
  eval->add_option("--mesh", evalMesh, "input mesh path")->required();
  eval->add_option("--kappa", evalKappa, "bulk conductivity");
  eval->add_option("--out", evalOut, "output result path")->required();
  eval->add_option("--directions", evalDirections, "sampled directions to report");

  // optimize
  auto* opt = app.add_subcommand("optimize", "optimize a mesh against an ADC objective");
  std::string optMesh, optObjective, optOut, optLog;
  double optPrecondition = 1.0, optFairing = 0.1, optKappa = 1.0;
  double optRemeshLength = 0.06, optSurgeryThreshold = 0.02;
  int optMaxIter = 500;
  opt->add_option("--mesh", optMesh, "input mesh path")->required();
  opt->add_option("--objective", optObjective, "objective mini-language text")->required();
  opt->add_option("--precondition", optPrecondition, "screening strength c");
  opt->add_option("--fairing", optFairing, "fairing weight w");
  opt->add_option("--max-iter", optMaxIter, "iteration cap");
  opt->add_option("--kappa", optKappa, "bulk conductivity");
  opt->add_option("--remesh-length", optRemeshLength, "remesh target edge length");
  opt->add_option("--surgery-threshold", optSurgeryThreshold, "neck radius threshold");
  opt->add_option("--out", optOut, "output mesh path")->required();
  opt->add_option("--log", optLog, "iteration log path (JSON lines)")->required();

  // study
  auto* study = app.add_subcommand("study", "run a parameter study and emit CSV");
  std::string studyKind, studyProfile = "(2+cos(pi*x))/4", studyMesh, studyObjective = "aac";
  std::string studyOut;
  int studyRefinements = 5, studyBaseN = 16, studyGridN = 4096, studyGridM = 16;
  int studyMaxIter = 60;
  std::vector<double> studyEpsilons = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> studyCValues = {0, 1, 10};
  study->add_option("--kind", studyKind, "h-conv|eps-order|precon-sweep")->required();
  study->add_option("--profile", studyProfile, "revolution profile R(x)");
  study->add_option("--refinements", studyRefinements, "h-conv refinement count");
  study->add_option("--base-n", studyBaseN, "h-conv coarsest axial resolution");
  study->add_option("--epsilons", studyEpsilons, "eps-order thickness list");
  study->add_option("--grid-n", studyGridN, "eps-order axial grid size N");
  study->add_option("--grid-m", studyGridM, "eps-order normal grid size M");
  study->add_option("--mesh", studyMesh, "precon-sweep input mesh");
  study->add_option("--objective", studyObjective, "precon-sweep objective");
  study->add_option("--c-values", studyCValues, "precon-sweep strengths");
  study->add_option("--max-iter", studyMaxIter, "precon-sweep iteration cap");
  study->add_option("--out", studyOut, "output CSV path")->required();

  try {
    app.parse(argc, argv);
    if (*gen)
      return cmdGen(genType, genResolution, genOut, genProfile, genRadius, genLevel, genSeed,
                    genStrength, genCutoff, genIn);
    if (*eval) return cmdEval(evalMesh, evalKappa, evalOut, evalDirections);
    if (*opt)
      return cmdOptimize(optMesh, optObjective, optPrecondition, optFairing, optMaxIter, optKappa,
                         optRemeshLength, optSurgeryThreshold, optOut, optLog);
    if (*study) {
      if (studyKind == "h-conv")
        return cmdStudyHConv(studyProfile, studyRefinements, studyBaseN, studyOut);
      if (studyKind == "eps-order")
        return cmdStudyEpsOrder(studyProfile, studyEpsilons, studyGridN, studyGridM, studyOut);
      if (studyKind == "precon-sweep") {
        if (studyMesh.empty()) throw InputError("precon-sweep requires --mesh");
        return cmdStudyPreconSweep(studyMesh, studyObjective, studyCValues, studyMaxIter, studyOut);
      }
      throw InputError("unknown study kind: " + studyKind);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
