#include "roagp/trajectory.hpp"

#include <cmath>
#include <sstream>

#include "roagp/errors.hpp"

namespace roagp {

GammaFunction GammaFunction::power(double p) {
  if (!(p >= 1.0)) throw ConfigError("GammaFunction::power: exponent must be >= 1");
  GammaFunction g;
  g.kind = Kind::Power;
  g.exponent = p;
  g.eval = [p](double z) { return std::pow(z, p); };
  return g;
}

bool gamma_validate(const GammaFunction& gamma, double z_max, int probes) {
  if (!gamma.eval || probes < 2 || !(z_max > 0.0)) return false;
  const double slack = 1e-12;
  double prev = gamma(0.0);
  if (std::abs(prev) > slack) return false;
  for (int i = 1; i < probes; ++i) {
    const double z = z_max * static_cast<double>(i) / (probes - 1);
    const double v = gamma(z);
    if (!(v > prev)) return false;
    if (v > std::pow(z, gamma.exponent) + slack) return false;
    prev = v;
  }
  return true;
}

Trajectory integrate_raw(const DaeDynamics& dyn, const Vec& x0, const Vec& y_guess,
                         double dt, double horizon, double xi) {
  if (!(dt > 0.0) || !(horizon > 0.0)) {
    throw ConfigError("integrate: dt and horizon must be positive");
  }
  if (x0.size() != dyn.n) throw ConfigError("integrate: x0 has wrong dimension");

  const long steps = std::max<long>(1, std::lround(horizon / dt));
  Trajectory traj;
  traj.x0 = x0;
  traj.dt = dt;
  traj.horizon = static_cast<double>(steps) * dt;
  traj.xi = xi;
  traj.samples.reserve(steps + 1);
  traj.samples.push_back(x0);

  Vec x = x0;
  Vec y = y_guess;
  // stage derivative with algebraic tracking; y is the running warm start
  auto deriv = [&](const Vec& xs) -> Vec {
    if (dyn.m > 0) y = solve_algebraic(dyn, xs, y);
    return dyn.f(xs, y);
  };

  for (long k = 1; k <= steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * dt;
    try {
      const Vec k1 = deriv(x);
      const Vec k2 = deriv(x + (0.5 * dt) * k1);
      const Vec k3 = deriv(x + (0.5 * dt) * k2);
      const Vec k4 = deriv(x + dt * k3);
      x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const AlgebraicSolveFailure& e) {
      std::ostringstream os;
      os << "trajectory aborted near t=" << t_prev << ": " << e.what();
      throw TrajectoryAborted(os.str(), t_prev);
    } catch (const RegularityViolation& e) {
      std::ostringstream os;
      os << "trajectory aborted near t=" << t_prev << ": " << e.what();
      throw TrajectoryAborted(os.str(), t_prev);
    }
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "trajectory diverged near t=" << static_cast<double>(k) * dt;
      throw TrajectoryDiverged(os.str(), static_cast<double>(k) * dt);
    }
    traj.samples.push_back(x);
  }
  traj.final_norm = traj.samples.back().norm();
  traj.converged = traj.final_norm < xi;
  return traj;
}

Trajectory integrate(const DaeSystem& system, const Vec& x0, double dt,
                     double horizon, double xi) {
  // algebraic branch starts from the equilibrium value
  return integrate_raw(system.dynamics(), x0, system.equilibrium().y, dt, horizon, xi);
}

LyapunovSample estimate_lyapunov(const Trajectory& traj, const GammaFunction& gamma) {
  if (!traj.converged) {
    std::ostringstream os;
    os << "estimate_lyapunov: trajectory did not converge (final norm "
       << traj.final_norm << " >= " << traj.xi << ")";
    throw NotStableSample(os.str());
  }
  const size_t n = traj.samples.size();
  double acc = 0.0;
  double prev = gamma(traj.samples.front().norm());
  for (size_t k = 1; k < n; ++k) {
    const double cur = gamma(traj.samples[k].norm());
    acc += 0.5 * (prev + cur) * traj.dt;
    prev = cur;
  }

  // decay-rate fit on the last tenth: least squares slope of log ||x||
  double tail = 0.0;
  const size_t start = n - std::max<size_t>(2, n / 10);
  double sum_t = 0, sum_v = 0, sum_tt = 0, sum_tv = 0;
  long cnt = 0;
  for (size_t k = start; k < n; ++k) {
    const double nm = traj.samples[k].norm();
    if (nm <= 0.0) continue;
    const double t = static_cast<double>(k) * traj.dt;
    const double v = std::log(nm);
    sum_t += t;
    sum_v += v;
    sum_tt += t * t;
    sum_tv += t * v;
    ++cnt;
  }
  if (cnt >= 2) {
    const double denom = cnt * sum_tt - sum_t * sum_t;
    if (denom > 0) {
      const double slope = (cnt * sum_tv - sum_t * sum_v) / denom;
      const double lambda_est = std::max(1e-6, -slope);
      tail = gamma(traj.xi) / lambda_est;
    }
  }

  LyapunovSample s;
  s.x = traj.x0;
  s.v_hat = acc;
  s.tail_bound = tail;
  return s;
}

}  // namespace roagp
