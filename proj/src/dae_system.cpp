#include "roagp/dae_system.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "roagp/errors.hpp"

namespace roagp {

namespace {

void check_dims(const char* who, const DaeDynamics& dyn, const Vec& x, const Vec& y) {
  if (x.size() != dyn.n || y.size() != dyn.m) {
    std::ostringstream os;
    os << who << ": expected x in R^" << dyn.n << ", y in R^" << dyn.m
       << ", got " << x.size() << " and " << y.size();
    throw ConfigError(os.str());
  }
}

}  // namespace

DaeSystem::DaeSystem(DaeDynamics dynamics, Equilibrium eq, Box domain_hint)
    : dyn_(std::move(dynamics)), eq_(std::move(eq)), hint_(std::move(domain_hint)) {
  if (dyn_.n < 1 || dyn_.m < 0) {
    throw ConfigError("DaeSystem: need n >= 1 and m >= 0");
  }
  if (!dyn_.f || !dyn_.g) {
    throw ConfigError("DaeSystem: missing f or g evaluator");
  }
  check_dims("DaeSystem equilibrium", dyn_, eq_.x, eq_.y);
  if (hint_.lo.size() != dyn_.n || hint_.hi.size() != dyn_.n) {
    throw ConfigError("DaeSystem: domain hint must be a box in R^n");
  }
  const Vec fres = dyn_.f(eq_.x, eq_.y);
  const Vec gres = dyn_.g(eq_.x, eq_.y);
  const double resid = std::max(fres.size() ? fres.lpNorm<Eigen::Infinity>() : 0.0,
                                gres.size() ? gres.lpNorm<Eigen::Infinity>() : 0.0);
  if (!(resid <= 1e-8)) {
    std::ostringstream os;
    os << "DaeSystem: equilibrium residual " << resid << " exceeds 1e-8";
    throw ModelInfeasible(os.str());
  }
}

std::pair<Vec, Vec> residual(const DaeSystem& system, const Vec& x, const Vec& y) {
  check_dims("residual", system.dynamics(), x, y);
  return {system.dynamics().f(x, y), system.dynamics().g(x, y)};
}

Vec solve_algebraic(const DaeDynamics& dyn, const Vec& x, const Vec& y_guess,
                    double tol, int max_iter) {
  check_dims("solve_algebraic", dyn, x, y_guess);
  if (dyn.m == 0) return Vec(0);

  Vec y = y_guess;
  Vec g = dyn.g(x, y);
  double gn = g.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < max_iter; ++it) {
    if (gn <= tol) return y;
    const Mat gy = jacobians(dyn, x, y).gy;
    Eigen::JacobiSVD<Mat> svd(gy, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 1e-10 * smax)) {
      std::ostringstream os;
      os << "solve_algebraic: constraint Jacobian singular (smin/smax="
         << (smax > 0 ? smin / smax : 0.0) << ") at iteration " << it;
      throw RegularityViolation(os.str());
    }
    const Vec step = svd.solve(g);
    // step halving keeps the iteration from overshooting folds
    double lambda = 1.0;
    Vec y_next;
    double gn_next = gn;
    for (int cut = 0; cut < 30; ++cut) {
      y_next = y - lambda * step;
      const Vec g_next = dyn.g(x, y_next);
      gn_next = g_next.lpNorm<Eigen::Infinity>();
      if (gn_next < gn || gn_next <= tol) {
        g = g_next;
        break;
      }
      lambda *= 0.5;
    }
    if (!(gn_next < gn) && gn_next > tol) {
      std::ostringstream os;
      os << "solve_algebraic: stalled at ||g||=" << gn << " after " << it + 1
         << " iterations";
      throw AlgebraicSolveFailure(os.str());
    }
    y = y_next;
    gn = gn_next;
  }
  if (gn <= tol) return y;
  std::ostringstream os;
  os << "solve_algebraic: no convergence in " << max_iter
     << " iterations, ||g||=" << gn;
  throw AlgebraicSolveFailure(os.str());
}

bool regularity_check(const DaeDynamics& dyn, const Vec& x, const Vec& y) {
  check_dims("regularity_check", dyn, x, y);
  if (dyn.m == 0) return true;
  const Mat gy = jacobians(dyn, x, y).gy;
  Eigen::JacobiSVD<Mat> svd(gy);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  return smin > 1e-10 * smax;
}

JacobianBlocks jacobians(const DaeDynamics& dyn, const Vec& x, const Vec& y) {
  check_dims("jacobians", dyn, x, y);
  if (dyn.jacobian) return dyn.jacobian(x, y);

  JacobianBlocks jb;
  jb.fx.resize(dyn.n, dyn.n);
  jb.fy.resize(dyn.n, dyn.m);
  jb.gx.resize(dyn.m, dyn.n);
  jb.gy.resize(dyn.m, dyn.m);
  Vec xp = x, xm = x, yp = y, ym = y;
  for (int j = 0; j < dyn.n; ++j) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x(j)));
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    jb.fx.col(j) = (dyn.f(xp, y) - dyn.f(xm, y)) / (2.0 * h);
    if (dyn.m > 0) jb.gx.col(j) = (dyn.g(xp, y) - dyn.g(xm, y)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  for (int j = 0; j < dyn.m; ++j) {
    const double h = std::max(1e-6, 1e-6 * std::abs(y(j)));
    yp(j) = y(j) + h;
    ym(j) = y(j) - h;
    jb.fy.col(j) = (dyn.f(x, yp) - dyn.f(x, ym)) / (2.0 * h);
    jb.gy.col(j) = (dyn.g(x, yp) - dyn.g(x, ym)) / (2.0 * h);
    yp(j) = y(j);
    ym(j) = y(j);
  }
  return jb;
}

ReducedJacobian reduced_matrix(const DaeDynamics& dyn, const Vec& x, const Vec& y) {
  const JacobianBlocks jb = jacobians(dyn, x, y);
  if (dyn.m == 0) return {jb.fx, x, y};
  Eigen::JacobiSVD<Mat> svd(jb.gy, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 1e-10 * smax)) {
    throw RegularityViolation("reduced_matrix: dg/dy singular at linearization point");
  }
  return {jb.fx - jb.fy * svd.solve(jb.gx), x, y};
}

double spectral_abscissa(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Mat& a) { return spectral_abscissa(a) < -1e-9; }

DaeDynamics shift_dynamics(const DaeDynamics& dyn, const Vec& xs, const Vec& ys) {
  DaeDynamics shifted;
  shifted.n = dyn.n;
  shifted.m = dyn.m;
  shifted.f = [f = dyn.f, xs, ys](const Vec& x, const Vec& y) {
    return f(x + xs, y + ys);
  };
  shifted.g = [g = dyn.g, xs, ys](const Vec& x, const Vec& y) {
    return g(x + xs, y + ys);
  };
  if (dyn.jacobian) {
    shifted.jacobian = [jac = dyn.jacobian, xs, ys](const Vec& x, const Vec& y) {
      return jac(x + xs, y + ys);
    };
  }
  return shifted;
}

DaeSystem shift_to_origin(const DaeSystem& system) {
  const DaeDynamics& dyn = system.dynamics();
  const Vec& xs = system.equilibrium().x;
  const Vec& ys = system.equilibrium().y;
  Box hint{system.domain_hint().lo - xs, system.domain_hint().hi - xs};
  return DaeSystem(shift_dynamics(dyn, xs, ys),
                   Equilibrium{Vec::Zero(dyn.n), Vec::Zero(dyn.m)}, std::move(hint));
}

Equilibrium find_equilibrium(const DaeDynamics& dyn, const Vec& x0, const Vec& y0,
                             double tol, int max_iter) {
  check_dims("find_equilibrium", dyn, x0, y0);
  Vec x = x0, y = y0;
  auto stacked = [&](const Vec& xx, const Vec& yy) {
    Vec r(dyn.n + dyn.m);
    r.head(dyn.n) = dyn.f(xx, yy);
    if (dyn.m > 0) r.tail(dyn.m) = dyn.g(xx, yy);
    return r;
  };
  Vec r = stacked(x, y);
  double rn = r.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < max_iter; ++it) {
    if (rn <= tol) return {x, y};
    const JacobianBlocks jb = jacobians(dyn, x, y);
    Mat full(dyn.n + dyn.m, dyn.n + dyn.m);
    full.topLeftCorner(dyn.n, dyn.n) = jb.fx;
    full.topRightCorner(dyn.n, dyn.m) = jb.fy;
    full.bottomLeftCorner(dyn.m, dyn.n) = jb.gx;
    full.bottomRightCorner(dyn.m, dyn.m) = jb.gy;
    Eigen::FullPivLU<Mat> lu(full);
    if (!lu.isInvertible()) {
      throw ModelInfeasible(
          "find_equilibrium: stacked Jacobian singular; no isolated equilibrium "
          "(check the angle anchor / datum)");
    }
    const Vec step = lu.solve(r);
    double lambda = 1.0;
    Vec xn, yn, rn_vec;
    double rn_next = rn;
    for (int cut = 0; cut < 30; ++cut) {
      xn = x - lambda * step.head(dyn.n);
      yn = y - lambda * step.tail(dyn.m);
      rn_vec = stacked(xn, yn);
      rn_next = rn_vec.lpNorm<Eigen::Infinity>();
      if (rn_next < rn || rn_next <= tol) break;
      lambda *= 0.5;
    }
    if (!(rn_next < rn) && rn_next > tol) {
      throw ModelInfeasible("find_equilibrium: damped Newton stalled");
    }
    x = xn;
    y = yn;
    r = rn_vec;
    rn = rn_next;
  }
  if (rn <= tol) return {x, y};
  throw ModelInfeasible("find_equilibrium: no convergence");
}

}  // namespace roagp
