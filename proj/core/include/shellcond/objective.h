#pragma once

#include "shellcond/mesh.h"

#include <optional>
#include <string>
#include <vector>

namespace shellcond {

// Scalar objective on the conductivity matrix. Always evaluated in
// maximization sense: a Minimize spec negates value and derivative.
struct ObjectiveSpec {
  Eigen::Matrix3d linear = Eigen::Matrix3d::Zero();  // symmetric weights on kA entries
  double aacWeight = 0;
  double isoGapWeight = 0;
  double targetWeight = 0;  // weight on -|kA - target|_F
  std::optional<Eigen::Matrix3d> target;
  enum class Sense { Maximize, Minimize };
  Sense sense = Sense::Maximize;
};

struct ObjectiveEval {
  double value = 0;
  Eigen::Matrix3d dfdk = Eigen::Matrix3d::Zero();  // df = <dfdk, dkA>
  bool degenerateIsoGap = false;                   // repeated extremal eigenvalue
  bool targetAtMinimum = false;                    // kA == target exactly
};

ObjectiveEval evaluate_objective(const ObjectiveSpec& spec, const Eigen::Matrix3d& kA);

// Grammar: signed sum of optionally weighted tokens, e.g.
//   "aac", "k33 + aac - 4*isogap", "0.5*k12 + target(goal.json)".
// Tokens: k11 k22 k33 k12 k13 k23 aac isogap target(FILE). The target file
// holds a feasible symmetric 3x3 matrix (JSON, either bare rows or under
// "target"); at most one target per spec. Throws ParseError on malformed
// text, InputError on an infeasible target.
ObjectiveSpec parse_objective(const std::string& text);

// Feasibility for normalized conductivity targets: symmetric, eigenvalues in
// [0,1], trace <= 2 (all with tolerance 1e-9). Throws InputError otherwise.
void validate_target(const Eigen::Matrix3d& target);

// Grid of feasible diagonal targets diag(m1,m2,m3)*dk over nonnegative
// integers m (not all zero) with every entry <= 1 and trace <= 2. Used to
// sweep attainability studies.
std::vector<Eigen::Matrix3d> sample_targets(double dk);

}  // namespace shellcond
