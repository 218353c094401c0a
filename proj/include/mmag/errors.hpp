#pragma once

#include <stdexcept>
#include <string>

namespace mmag {

// Bad caller input: out-of-range parameter, malformed configuration, violated precondition.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A polygon / cross-section that fails its structural invariants (too few vertices,
// non-positive area, self-intersection, ...).
struct InvalidGeometry : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An object was used while violating one of its type invariants.
struct InvalidState : std::logic_error {
  using std::logic_error::logic_error;
};

// A finite element / finite volume assembly hit a degenerate element.
struct AssemblyFailure : std::runtime_error {
  int element_index;
  AssemblyFailure(const std::string& msg, int index)
      : std::runtime_error(msg), element_index(index) {}
};

// An iterative linear solve did not reach the requested tolerance.
struct SolverFailure : std::runtime_error {
  double residual;  // best relative residual reached
  SolverFailure(const std::string& msg, double res)
      : std::runtime_error(msg), residual(res) {}
};

// A sphere retraction collapsed: |m + v| was numerically zero.
struct StepCollapse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An optimization produced a non-finite energy.
struct Diverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A requested computation exceeds the configured resource budget.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mmag
