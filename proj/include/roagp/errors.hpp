#pragma once

#include <stdexcept>
#include <string>

namespace roagp {

// Failure taxonomy. Every error carries a human-readable message naming the
// offending quantity (config key, time, window slot, ...).

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The algebraic constraint Jacobian lost rank.
struct RegularityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Newton on the algebraic constraints did not converge.
struct AlgebraicSolveFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Integration had to stop before the horizon (algebraic solve died mid-run).
struct TrajectoryAborted : std::runtime_error {
  TrajectoryAborted(const std::string& what, double t)
      : std::runtime_error(what), time(t) {}
  double time;
};

// State became non-finite during integration.
struct TrajectoryDiverged : std::runtime_error {
  TrajectoryDiverged(const std::string& what, double t)
      : std::runtime_error(what), time(t) {}
  double time;
};

// A value estimate was requested for a trajectory that did not converge.
struct NotStableSample : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Kernel matrix factorization failed or a site denominator vanished.
struct IllConditionedKernel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Predicted variance fell below the numerical tolerance for zero.
struct PosteriorInconsistency : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every candidate grid point is excluded.
struct DomainExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One assessment step exhausted its retry budget.
struct StepFailed : std::runtime_error {
  StepFailed(const std::string& what, long step_index)
      : std::runtime_error(what), step(step_index) {}
  long step;
};

// The equilibrium fails the eigenvalue screen; assessment refuses to start.
struct UnstableEquilibrium : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The model admits no consistent equilibrium (imbalance, singular solve, ...).
struct ModelInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace roagp
