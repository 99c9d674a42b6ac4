#pragma once

#include <stdexcept>
#include <string>

namespace emhydro {

// Euler-angle chart breaks down at sin(alpha) = 0.
struct PoleSingularity : std::runtime_error {
  double alpha;
  explicit PoleSingularity(double a)
      : std::runtime_error("pole-singular Euler angle alpha=" + std::to_string(a)),
        alpha(a) {}
};

// Query or path point fell inside a node tube (|psi|^2 below threshold).
struct NodeTooClose : std::runtime_error {
  double rho_rel;  // |psi|^2 / max|psi|^2 at the offending point
  explicit NodeTooClose(double r)
      : std::runtime_error("point too close to a wavefunction node, rho_rel=" +
                           std::to_string(r)),
        rho_rel(r) {}
};

struct StepTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateJacobian : std::runtime_error {
  double jac;
  explicit DegenerateJacobian(double j)
      : std::runtime_error("degenerate flow-map Jacobian J=" + std::to_string(j)),
        jac(j) {}
};

struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SnapshotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// initial data violating the t=0 Maxwell constraints (divergence/transversality)
struct ConstraintViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace emhydro
