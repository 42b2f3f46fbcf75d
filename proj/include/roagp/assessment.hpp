#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "roagp/dae_system.hpp"
#include "roagp/grid_eval.hpp"
#include "roagp/trajectory.hpp"
#include "roagp/window_gp.hpp"

namespace roagp {

// Standard normal CDF (erfc-based, double precision).
double normal_cdf(double x);

// Two-sided confidence multiplier: the quantile b with Phi(b) = (1+delta)/2,
// computed by a rational approximation plus one Halley refinement (abs error
// well under 1e-9). delta must lie in (0, 1).
double beta_delta(double delta);

// Sampling domain: one or two state coordinates swept on a regular grid,
// remaining coordinates pinned to zero (deviation coordinates).
struct DomainSpec {
  std::vector<int> axes;
  Vec lo;
  Vec hi;
  std::vector<int> resolution;

  DomainGrid grid(int state_dim) const {
    return DomainGrid(axes, lo, hi, resolution, state_dim);
  }
};

struct AssessmentConfig {
  double delta = 0.9;       // confidence level in (0,1)
  double xi = 1e-3;         // convergence ball radius
  double t_n = 10.0;        // trajectory horizon
  double dt = 0.01;         // integration/recording step
  int h = 100;              // window width
  DomainSpec domain;
  KernelSpec kernel;
  int max_steps = 10;
  int max_retries = 200;    // rejected-sample budget per step
  bool halt_on_step_failure = false;
  double gamma_exponent = 2.0;

  void validate() const;
  static AssessmentConfig from_json_text(const std::string& text);
  static AssessmentConfig from_file(const std::string& path);
};

// Rejected grid points, by linear grid index.
using ExcludedSet = std::set<std::int64_t>;

// One attempt record: the sampled start state, whether it was accepted, the
// value estimate when accepted, and the wall time of the attempt.
struct LogRecord {
  std::int64_t step = 0;
  Vec x;
  bool accepted = false;
  double v_hat = 0.0;
  double wall_ms = 0.0;
};

struct AssessmentLog {
  std::vector<LogRecord> records;
};

// Acquisition: the not-excluded grid point maximizing mu + beta * sigma.
// Ties break toward the lowest row-major index. Throws DomainExhausted when
// every grid point is excluded.
struct Selection {
  std::int64_t index = 0;
  Vec x;
  double acquisition = 0.0;
};

Selection select_sample(const WindowState& state, const DomainGrid& grid,
                        double beta, const ExcludedSet& excluded,
                        EvalMode mode = EvalMode::Parallel);

// One sampling step: select, simulate, accept (push) or reject (exclude) and
// retry. Returns the advanced window state; mutates excluded/log. Throws
// StepFailed when the retry budget is exhausted.
WindowState assessment_step(const DaeSystem& system, const WindowState& state,
                            const AssessmentConfig& config, const DomainGrid& grid,
                            ExcludedSet& excluded, AssessmentLog& log);

// Membership sweep at one confidence level.
struct RoaCell {
  double x = 0.0;
  double y = 0.0;  // zero for 1-D domains
  double mu = 0.0;
  double sigma = 0.0;
  bool member = false;
};

struct RoaEstimate {
  std::int64_t step = 0;
  double delta = 0.0;
  double beta = 0.0;
  double v_hat_max = 0.0;
  std::vector<RoaCell> cells;
};

// Grid membership: mu + beta sigma <= max observation in the window
// (non-strict). The window's preloaded zeros participate in the max.
RoaEstimate roa_grid(const WindowState& state, const DomainGrid& grid, double delta,
                     EvalMode mode = EvalMode::Parallel);

struct AssessmentResult {
  std::vector<RoaEstimate> estimates;  // one per executed step, or the single
                                       // initial estimate when max_steps = 0
  AssessmentLog log;
  WindowState final_state;
  ExcludedSet excluded;
};

// Full loop: verifies the (origin-anchored) equilibrium is Hurwitz, seeds the
// window with origin observations, then runs max_steps sampling steps.
// Throws UnstableEquilibrium up front; StepFailed inside a step is logged and
// either skipped or fatal per config.halt_on_step_failure.
AssessmentResult run_assessment(const DaeSystem& system, const AssessmentConfig& config);

// Continuation of a run from a restored window state and exclusion set.
AssessmentResult resume_assessment(const DaeSystem& system, const AssessmentConfig& config,
                                   WindowState state, ExcludedSet excluded);

}  // namespace roagp
