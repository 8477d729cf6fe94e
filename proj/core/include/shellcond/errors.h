#pragma once

#include <stdexcept>
#include <string>

namespace shellcond {

// Invalid input data: malformed files, meshes violating invariants,
// out-of-range parameters. CLI maps this to exit code 2.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Grammar/usage errors: objective mini-language, profile expressions.
// CLI maps this to exit code 1.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Runtime failures: solver non-convergence, mesh corruption mid-run.
// CLI maps this to exit code 3.
struct SolveError : std::runtime_error {
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace shellcond
