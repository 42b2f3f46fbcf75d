#pragma once

#include <cstdint>

#include "roagp/kernel.hpp"
#include "roagp/types.hpp"

namespace roagp {

// ---- window operator algebra -------------------------------------------
// These four linear maps implement the fixed-width sliding update: the
// oldest slot is dropped by moving everything one place up the diagonal,
// vectors/matrices grow by zero padding, and prefixes are extracted during
// the rebuild sweep.

// Moves every entry one step up-left: out(i, j) = in(i+1, j+1), last row and
// column zero. Linear and nilpotent of index h for an h x h matrix.
Mat shift_up(const Mat& d);

// Appends one zero entry to a vector.
Vec append_zero(const Vec& v);

// Appends one zero row and one zero column to a square matrix.
Mat pad_zero_row_col(const Mat& m);

// First `len` entries of v.
Vec prefix(const Vec& v, Eigen::Index len);

// ---- site construction ----------------------------------------------------
// Scalar coefficients of a Gaussian observation update given the running
// prediction at the new point. r is always negative for noise_var > 0.
struct SiteCoefficients {
  double q = 0.0;
  double r = 0.0;
};

SiteCoefficients gaussian_site(double obs, double mu_prev, double var_prev,
                               double noise_var);

// ---- posterior ------------------------------------------------------------
struct PosteriorEval {
  double mu = 0.0;
  double sigma = 0.0;
};

// Direct dense conditioning: mu = k^T (K + noise I)^{-1} obs,
// var = k(x,x) - k^T (K + noise I)^{-1} k, via Cholesky with 1e-10 jitter.
// points: N x dim (rows are inputs). Throws IllConditionedKernel if the
// factorization fails. N = 0 returns the prior.
PosteriorEval batch_posterior(const KernelSpec& kernel, const Mat& points,
                              const Vec& obs, const Vec& x);

// ---- sliding window state --------------------------------------------------
// Fixed-width FIFO of (point, observation) pairs together with the
// coefficient pair (alpha, C) parametrizing the posterior
//   mu(x)  = alpha^T k_h(x)
//   var(x) = k(x, x) + k_h(x)^T C k_h(x)
// and the cached window kernel matrix K. (alpha, C) are rebuilt from
// (points, observations, K) on every push, so the state is self-consistent
// by construction. Immutable value type: push returns the advanced state.
class WindowState {
 public:
  // Window preloaded with h copies of (origin, 0), sites processed -- the
  // standard warm start for assessment runs.
  static WindowState initial(const KernelSpec& kernel, int h, int dim);

  // Same slots but no sites processed: exact prior everywhere (mu = 0,
  // sigma = signal std). Useful as a neutral starting point in tests.
  static WindowState prior(const KernelSpec& kernel, int h, int dim);

  int width() const { return h_; }
  int dim() const { return static_cast<int>(points_.cols()); }
  std::int64_t step() const { return step_; }
  const KernelSpec& kernel() const { return kernel_; }
  const Mat& points() const { return points_; }
  const Vec& observations() const { return observations_; }
  const Vec& alpha() const { return alpha_; }
  const Mat& coeff() const { return c_; }
  const Mat& kernel_matrix() const { return k_; }

  // Largest observation currently in the window.
  double max_observation() const { return observations_.maxCoeff(); }

  // Slide in (x_new, obs_new): FIFO shift, kernel matrix update via the
  // shift operator plus new last row/column/diagonal, then a full rebuild
  // sweep of (alpha, C) over the h slots. Throws IllConditionedKernel when a
  // site denominator vanishes.
  [[nodiscard]] WindowState push(const Vec& x_new, double obs_new) const;

  PosteriorEval predict(const Vec& x) const;

  // Covariance vector between the window slots and x.
  Vec kernel_vector(const Vec& x) const;

  // Used by snapshot restore; validates shapes.
  static WindowState restore(const KernelSpec& kernel, std::int64_t step, int h,
                             Mat points, Vec observations, Vec alpha, Mat c, Mat k);

 private:
  WindowState() = default;
  void rebuild_coefficients();

  KernelSpec kernel_;
  int h_ = 0;
  std::int64_t step_ = 0;
  Mat points_;        // h x dim
  Vec observations_;  // h
  Vec alpha_;         // h
  Mat c_;             // h x h
  Mat k_;             // h x h
};

}  // namespace roagp
