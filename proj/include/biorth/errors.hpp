#pragma once

#include <stdexcept>
#include <string>

namespace biorth {

struct TagMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A degenerate 2-plane (Gram determinant below threshold) is an error,
/// never silently reported as flat.
struct DegeneratePlaneError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a finite-difference oracle fails its own convergence check.
struct OracleFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative solver (chart inversion, geodesic refinement,
/// plane optimization) does not converge; carries diagnostics in the message.
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace biorth
