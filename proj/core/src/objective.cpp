#include "shellcond/objective.h"

#include "shellcond/errors.h"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace shellcond {
namespace {

Eigen::Matrix3d loadTargetFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open target file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("target file is not valid JSON: " + std::string(e.what()));
  }
  if (j.is_object() && j.contains("target")) j = j["target"];
  if (!j.is_array() || j.size() != 3) throw InputError("target must be a 3x3 matrix");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    if (!j[static_cast<std::size_t>(r)].is_array() || j[static_cast<std::size_t>(r)].size() != 3)
      throw InputError("target must be a 3x3 matrix");
    for (int c = 0; c < 3; ++c) {
      const auto& cell = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (!cell.is_number()) throw InputError("target entries must be numbers");
      m(r, c) = cell.get<double>();
    }
  }
  validate_target(m);
  return m;
}

struct Scanner {
  const std::string& s;
  std::size_t pos = 0;

  void skipSpace() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool done() {
    skipSpace();
    return pos >= s.size();
  }
  char peek() {
    skipSpace();
    return pos < s.size() ? s[pos] : '\0';
  }
  [[noreturn]] void fail(const std::string& what) {
    std::ostringstream msg;
    msg << "objective: " << what << " at position " << pos
        << "; expected a signed sum of {k11,k22,k33,k12,k13,k23,aac,isogap,target(FILE)}";
    throw ParseError(msg.str());
  }
  double number() {
    skipSpace();
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s.substr(pos), &used);
    } catch (const std::exception&) {
      fail("expected a number");
    }
    pos += used;
    return v;
  }
  std::string word() {
    skipSpace();
    std::size_t start = pos;
    while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])))) ++pos;
    if (pos == start) fail("expected a token");
    return s.substr(start, pos - start);
  }
};

void addEntry(ObjectiveSpec& spec, int i, int j, double w) {
  if (i == j) {
    spec.linear(i, i) += w;
  } else {
    spec.linear(i, j) += 0.5 * w;
    spec.linear(j, i) += 0.5 * w;
  }
}

}  // namespace

void validate_target(const Eigen::Matrix3d& target) {
  const double tol = 1e-9;
  if (!target.allFinite()) throw InputError("target has non-finite entries");
  if ((target - target.transpose()).cwiseAbs().maxCoeff() > tol * (1.0 + target.cwiseAbs().maxCoeff()))
    throw InputError("target must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(0.5 * (target + target.transpose()));
  if (eig.eigenvalues().minCoeff() < -tol || eig.eigenvalues().maxCoeff() > 1.0 + tol)
    throw InputError("target eigenvalues must lie in [0, 1]");
  if (target.trace() > 2.0 + tol) throw InputError("target trace must be <= 2");
}

ObjectiveSpec parse_objective(const std::string& text) {
  ObjectiveSpec spec;
  Scanner sc{text};
  if (sc.done()) sc.fail("empty objective");
  bool first = true;
  while (!sc.done()) {
    double sign = 1;
    const char c = sc.peek();
    if (c == '+' || c == '-') {
      sign = c == '-' ? -1 : 1;
      ++sc.pos;
    } else if (!first) {
      sc.fail("expected '+' or '-'");
    }
    double weight = sign;
    if (std::isdigit(static_cast<unsigned char>(sc.peek())) || sc.peek() == '.') {
      weight = sign * sc.number();
      if (sc.peek() == '*') ++sc.pos;
      else sc.fail("expected '*' after a weight");
    }
    const std::string tok = sc.word();
    if (tok == "aac") {
      spec.aacWeight += weight;
    } else if (tok == "isogap") {
      spec.isoGapWeight += weight;
    } else if (tok == "target") {
      if (sc.peek() != '(') sc.fail("expected '(' after target");
      ++sc.pos;
      const std::size_t start = sc.pos;
      while (sc.pos < sc.s.size() && sc.s[sc.pos] != ')') ++sc.pos;
      if (sc.pos >= sc.s.size()) sc.fail("unterminated target(");
      const std::string path = sc.s.substr(start, sc.pos - start);
      ++sc.pos;
      if (path.empty()) sc.fail("target file path is empty");
      if (spec.target) sc.fail("multiple target() terms");
      spec.target = loadTargetFile(path);
      spec.targetWeight += weight;
    } else if (tok.size() == 3 && tok[0] == 'k' && std::isdigit(static_cast<unsigned char>(tok[1])) &&
               std::isdigit(static_cast<unsigned char>(tok[2]))) {
      const int i = tok[1] - '1', j = tok[2] - '1';
      if (i < 0 || i > 2 || j < 0 || j > 2 || i > j) sc.fail("unknown entry token " + tok);
      addEntry(spec, i, j, weight);
    } else {
      sc.fail("unknown token '" + tok + "'");
    }
    first = false;
  }
  return spec;
}

ObjectiveEval evaluate_objective(const ObjectiveSpec& spec, const Eigen::Matrix3d& kA) {
  ObjectiveEval out;
  out.value = spec.linear.cwiseProduct(kA).sum() + spec.aacWeight * kA.trace() / 3.0;
  out.dfdk = spec.linear + spec.aacWeight / 3.0 * Eigen::Matrix3d::Identity();

  if (spec.isoGapWeight != 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(kA);  // ascending eigenvalues
    const auto& lam = eig.eigenvalues();
    const Eigen::Vector3d pMin = eig.eigenvectors().col(0);
    const Eigen::Vector3d pMax = eig.eigenvectors().col(2);
    out.value += spec.isoGapWeight * (lam[2] - lam[0]);
    out.dfdk += spec.isoGapWeight * (pMax * pMax.transpose() - pMin * pMin.transpose());
    const double scale = 1.0 + kA.cwiseAbs().maxCoeff();
    if (lam[2] - lam[1] < 1e-12 * scale || lam[1] - lam[0] < 1e-12 * scale) out.degenerateIsoGap = true;
  }
  if (spec.target) {
    const Eigen::Matrix3d diff = kA - *spec.target;
    const double dist = diff.norm();
    out.value += spec.targetWeight * -dist;
    if (dist > 0) {
      out.dfdk += spec.targetWeight * -(diff / dist);
    } else {
      out.targetAtMinimum = true;
    }
  }
  if (spec.sense == ObjectiveSpec::Sense::Minimize) {
    out.value = -out.value;
    out.dfdk = -out.dfdk;
  }
  return out;
}

std::vector<Eigen::Matrix3d> sample_targets(double dk) {
  if (!(dk > 0)) throw InputError("target step must be positive");
  const double tol = 1e-9;
  const int mMax = static_cast<int>(std::floor((1.0 + tol) / dk));
  std::vector<Eigen::Matrix3d> out;
  for (int m1 = 0; m1 <= mMax; ++m1)
    for (int m2 = 0; m2 <= mMax; ++m2)
      for (int m3 = 0; m3 <= mMax; ++m3) {
        if (m1 + m2 + m3 == 0) continue;
        if ((m1 + m2 + m3) * dk > 2.0 + tol) continue;
        out.push_back(Eigen::Vector3d(m1 * dk, m2 * dk, m3 * dk).asDiagonal());
      }
  return out;
}

}  // namespace shellcond
