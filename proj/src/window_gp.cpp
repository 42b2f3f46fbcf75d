#include "roagp/window_gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>

#include "roagp/errors.hpp"

namespace roagp {

namespace {
constexpr double kJitter = 1e-10;
constexpr double kVarianceSlack = -1e-10;  // tolerated negative variance
}  // namespace

Mat shift_up(const Mat& d) {
  const Eigen::Index h = d.rows();
  Mat out = Mat::Zero(h, d.cols());
  if (h > 1 && d.cols() > 1) {
    out.topLeftCorner(h - 1, d.cols() - 1) = d.bottomRightCorner(h - 1, d.cols() - 1);
  }
  return out;
}

Vec append_zero(const Vec& v) {
  Vec out(v.size() + 1);
  out.head(v.size()) = v;
  out(v.size()) = 0.0;
  return out;
}

Mat pad_zero_row_col(const Mat& m) {
  Mat out = Mat::Zero(m.rows() + 1, m.cols() + 1);
  out.topLeftCorner(m.rows(), m.cols()) = m;
  return out;
}

Vec prefix(const Vec& v, Eigen::Index len) {
  if (len < 0 || len > v.size()) throw ConfigError("prefix: length out of range");
  return v.head(len);
}

SiteCoefficients gaussian_site(double obs, double mu_prev, double var_prev,
                               double noise_var) {
  const double denom = noise_var + var_prev;
  if (!(denom > 1e-300)) {
    throw IllConditionedKernel("gaussian_site: vanishing predictive denominator");
  }
  return {(obs - mu_prev) / denom, -1.0 / denom};
}

PosteriorEval batch_posterior(const KernelSpec& kernel, const Mat& points,
                              const Vec& obs, const Vec& x) {
  kernel.validate();
  const Eigen::Index n = points.rows();
  if (obs.size() != n) throw ConfigError("batch_posterior: points/observations mismatch");
  const double kxx = kernel.signal_variance;
  if (n == 0) return {0.0, std::sqrt(kxx)};

  Mat gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel_eval(kernel, points.row(i), points.row(j));
      gram(i, j) = v;
      gram(j, i) = v;
    }
    gram(i, i) += kernel.noise_variance + kJitter;
  }
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedKernel("batch_posterior: Cholesky factorization failed");
  }
  Vec kvec(n);
  for (Eigen::Index i = 0; i < n; ++i) kvec(i) = kernel_eval(kernel, points.row(i), x);
  const Vec w = llt.solve(obs);
  const Vec kw = llt.solve(kvec);
  const double mu = kvec.dot(w);
  double var = kxx - kvec.dot(kw);
  if (var < kVarianceSlack) {
    throw PosteriorInconsistency("batch_posterior: negative predictive variance");
  }
  return {mu, std::sqrt(std::max(0.0, var))};
}

WindowState WindowState::initial(const KernelSpec& kernel, int h, int dim) {
  WindowState s = prior(kernel, h, dim);
  s.rebuild_coefficients();
  return s;
}

WindowState WindowState::prior(const KernelSpec& kernel, int h, int dim) {
  kernel.validate();
  if (h < 1) throw ConfigError("WindowState: width must be >= 1");
  if (dim < 1) throw ConfigError("WindowState: dimension must be >= 1");
  WindowState s;
  s.kernel_ = kernel;
  s.h_ = h;
  s.step_ = 0;
  s.points_ = Mat::Zero(h, dim);
  s.observations_ = Vec::Zero(h);
  s.alpha_ = Vec::Zero(h);
  s.c_ = Mat::Zero(h, h);
  // all slots hold the origin, so every kernel entry is the signal variance
  s.k_ = Mat::Constant(h, h, kernel.signal_variance);
  return s;
}

WindowState WindowState::push(const Vec& x_new, double obs_new) const {
  if (x_new.size() != points_.cols()) {
    throw ConfigError("WindowState::push: point has wrong dimension");
  }
  WindowState next(*this);
  next.step_ = step_ + 1;

  // FIFO slide of the raw window
  if (h_ > 1) {
    next.points_.topRows(h_ - 1) = points_.bottomRows(h_ - 1);
    next.observations_.head(h_ - 1) = observations_.tail(h_ - 1);
  }
  next.points_.row(h_ - 1) = x_new.transpose();
  next.observations_(h_ - 1) = obs_new;

  // kernel matrix: shift up the diagonal, then inject the new last
  // row/column and the new diagonal entry
  next.k_ = shift_up(k_);
  for (int i = 0; i < h_ - 1; ++i) {
    const double v = kernel_eval(kernel_, next.points_.row(i), x_new);
    next.k_(i, h_ - 1) = v;
    next.k_(h_ - 1, i) = v;
  }
  next.k_(h_ - 1, h_ - 1) = kernel_eval(kernel_, x_new, x_new);

  next.rebuild_coefficients();
  return next;
}

void WindowState::rebuild_coefficients() {
  // Sequential conditioning sweep over the window slots. The running
  // coefficient pair grows one slot per iteration; with Gaussian sites this
  // reproduces the dense batch posterior over the window contents.
  Vec alpha(0);
  Mat c(0, 0);
  for (int j = 0; j < h_; ++j) {
    const Vec kj = prefix(k_.col(j), j);
    const double mu_prev = alpha.dot(kj);
    const Vec ckj = c * kj;
    double var_prev = k_(j, j) + kj.dot(ckj);
    if (var_prev < kVarianceSlack) {
      std::ostringstream os;
      os << "window rebuild: negative running variance at slot " << j;
      throw PosteriorInconsistency(os.str());
    }
    var_prev = std::max(0.0, var_prev);
    SiteCoefficients site;
    try {
      site = gaussian_site(observations_(j), mu_prev, var_prev, kernel_.noise_variance);
    } catch (const IllConditionedKernel&) {
      std::ostringstream os;
      os << "window rebuild: vanishing site denominator at slot " << j
         << " (noise_variance=" << kernel_.noise_variance << ")";
      throw IllConditionedKernel(os.str());
    }
    Vec s = append_zero(ckj);
    s(j) += 1.0;
    alpha = append_zero(alpha) + site.q * s;
    c = pad_zero_row_col(c) + site.r * (s * s.transpose());
  }
  alpha_ = alpha;
  c_ = c;
}

Vec WindowState::kernel_vector(const Vec& x) const {
  Vec k(h_);
  for (int i = 0; i < h_; ++i) k(i) = kernel_eval(kernel_, points_.row(i), x);
  return k;
}

PosteriorEval WindowState::predict(const Vec& x) const {
  if (x.size() != points_.cols()) {
    throw ConfigError("WindowState::predict: point has wrong dimension");
  }
  const Vec k = kernel_vector(x);
  const double mu = alpha_.dot(k);
  const double var = kernel_.signal_variance + k.dot(c_ * k);
  if (var < kVarianceSlack) {
    throw PosteriorInconsistency("predict: negative predictive variance");
  }
  return {mu, std::sqrt(std::max(0.0, var))};
}

WindowState WindowState::restore(const KernelSpec& kernel, std::int64_t step, int h,
                                 Mat points, Vec observations, Vec alpha, Mat c,
                                 Mat k) {
  kernel.validate();
  if (h < 1 || points.rows() != h || observations.size() != h || alpha.size() != h ||
      c.rows() != h || c.cols() != h || k.rows() != h || k.cols() != h) {
    throw ConfigError("WindowState::restore: inconsistent shapes");
  }
  WindowState s;
  s.kernel_ = kernel;
  s.h_ = h;
  s.step_ = step;
  s.points_ = std::move(points);
  s.observations_ = std::move(observations);
  s.alpha_ = std::move(alpha);
  s.c_ = std::move(c);
  s.k_ = std::move(k);
  return s;
}

}  // namespace roagp
