#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "roagp/types.hpp"

namespace roagp {

// Equilibrium pair (x*, y*) of a semi-explicit DAE.
struct Equilibrium {
  Vec x;
  Vec y;
};

// The four first-order blocks at a point: df/dx, df/dy, dg/dx, dg/dy.
struct JacobianBlocks {
  Mat fx;
  Mat fy;
  Mat gx;
  Mat gy;
};

// Reduced dynamics matrix A = fx - fy * gy^{-1} * gx together with the
// linearization point it was computed at.
struct ReducedJacobian {
  Mat a;
  Vec x;
  Vec y;
};

// Evaluator bundle for  x' = f(x, y), 0 = g(x, y)  with x in R^n, y in R^m.
// m = 0 is a plain ODE; g evaluators then return empty vectors.
struct DaeDynamics {
  int n = 0;
  int m = 0;
  std::function<Vec(const Vec&, const Vec&)> f;
  std::function<Vec(const Vec&, const Vec&)> g;
  // Optional analytic derivative override; when absent, central differences.
  std::function<JacobianBlocks(const Vec&, const Vec&)> jacobian;
};

// A DAE model anchored at a verified equilibrium, plus a sampling hint box
// (in x coordinates). Value type; copies share the underlying evaluators.
class DaeSystem {
 public:
  // Validates dimensions and that (x*, y*) is an equilibrium to 1e-8 (inf
  // norm of both residual blocks). Throws ConfigError / ModelInfeasible.
  DaeSystem(DaeDynamics dynamics, Equilibrium eq, Box domain_hint);

  int n() const { return dyn_.n; }
  int m() const { return dyn_.m; }
  const DaeDynamics& dynamics() const { return dyn_; }
  const Equilibrium& equilibrium() const { return eq_; }
  const Box& domain_hint() const { return hint_; }

 private:
  DaeDynamics dyn_;
  Equilibrium eq_;
  Box hint_;
};

// Evaluates both residual blocks exactly once each. Dimension mismatch throws
// ConfigError.
std::pair<Vec, Vec> residual(const DaeSystem& system, const Vec& x, const Vec& y);

// Newton solve of g(x, y) = 0 in y from y_guess. Tolerance on ||g||_inf.
// Throws RegularityViolation when dg/dy loses rank at an iterate,
// AlgebraicSolveFailure when max_iter is exhausted.
Vec solve_algebraic(const DaeDynamics& dyn, const Vec& x, const Vec& y_guess,
                    double tol = 1e-10, int max_iter = 50);

// True when the smallest singular value of dg/dy exceeds 1e-10 times the
// largest. Trivially true for m = 0.
bool regularity_check(const DaeDynamics& dyn, const Vec& x, const Vec& y);

// All four derivative blocks; analytic override when the model provides one,
// otherwise central differences with per-coordinate step
// max(1e-6, 1e-6 |coord|).
JacobianBlocks jacobians(const DaeDynamics& dyn, const Vec& x, const Vec& y);

// Reduced matrix A = fx - fy gy^{-1} gx at (x, y). Throws RegularityViolation
// when dg/dy is singular.
ReducedJacobian reduced_matrix(const DaeDynamics& dyn, const Vec& x, const Vec& y);

// Strict Hurwitz test: every eigenvalue real part < -1e-9.
bool is_hurwitz(const Mat& a);

// Largest real part over the eigenvalues of a.
double spectral_abscissa(const Mat& a);

// Returns the system translated so the equilibrium sits at the origin:
// f~(x, y) = f(x + x*, y + y*), likewise g; the domain hint shifts by -x*.
// Evaluations agree bitwise with the original at the translated point.
DaeSystem shift_to_origin(const DaeSystem& system);

// Same coordinate change on a bare evaluator bundle: the returned dynamics
// evaluate the original ones at (x + xs, y + ys). Used to express disturbed
// variants of a model in the coordinates of the undisturbed equilibrium.
DaeDynamics shift_dynamics(const DaeDynamics& dyn, const Vec& xs, const Vec& ys);

// Damped Newton on the stacked residual (f; g) over (x; y). Used by model
// builders to locate equilibria. Throws ModelInfeasible on failure.
Equilibrium find_equilibrium(const DaeDynamics& dyn, const Vec& x0, const Vec& y0,
                             double tol = 1e-11, int max_iter = 80);

}  // namespace roagp
