#pragma once

#include <functional>
#include <vector>

#include "roagp/dae_system.hpp"
#include "roagp/types.hpp"

namespace roagp {

// Strictly increasing weight applied to the state norm when accumulating the
// energy-like value along a trajectory. Power family: z -> z^p, p >= 1.
struct GammaFunction {
  enum class Kind { Power };
  Kind kind = Kind::Power;
  double exponent = 2.0;
  std::function<double(double)> eval;

  static GammaFunction power(double p = 2.0);
  double operator()(double z) const { return eval(z); }
};

// Probes the evaluator on [0, z_max]: gamma(0) == 0, strictly increasing,
// and bounded by z^exponent (all within 1e-12 slack).
bool gamma_validate(const GammaFunction& gamma, double z_max = 10.0, int probes = 257);

// Fixed-step solution record. samples[k] is the differential state at
// t = k * dt; samples.front() == x0, samples.back() is at the horizon.
struct Trajectory {
  Vec x0;
  double dt = 0.0;
  double horizon = 0.0;
  std::vector<Vec> samples;
  bool converged = false;   // final state norm < xi
  double final_norm = 0.0;  // ||samples.back()||_2
  double xi = 0.0;
};

// Classical RK4 on the reduced ODE x' = f(x, Y(x)); the algebraic branch is
// tracked by Newton, warm-started stage to stage. The recording step equals
// the integration step. Throws TrajectoryDiverged on non-finite state,
// TrajectoryAborted when the algebraic solve fails mid-run.
Trajectory integrate(const DaeSystem& system, const Vec& x0, double dt,
                     double horizon, double xi);

// Same, but on a raw evaluator bundle with an explicit initial algebraic
// guess (used for piecewise runs under topology switches).
Trajectory integrate_raw(const DaeDynamics& dyn, const Vec& x0, const Vec& y_guess,
                         double dt, double horizon, double xi);

// One accepted observation for the learner: the start state and the
// accumulated value. tail_bound reports the truncation estimate
// gamma(xi) / lambda_est with lambda_est fitted on the last tenth of the run
// (reported, never subtracted).
struct LyapunovSample {
  Vec x;
  double v_hat = 0.0;
  double tail_bound = 0.0;
};

// Trapezoidal accumulation of gamma(||x(t)||) over the recorded samples.
// Requires traj.converged, else NotStableSample.
LyapunovSample estimate_lyapunov(const Trajectory& traj, const GammaFunction& gamma);

}  // namespace roagp
