#include "roagp/grid_eval.hpp"

#include <sstream>

#include "roagp/errors.hpp"

namespace roagp {

DomainGrid::DomainGrid(std::vector<int> axes, Vec lo, Vec hi,
                       std::vector<int> resolution, int state_dim)
    : axes_(std::move(axes)),
      lo_(std::move(lo)),
      hi_(std::move(hi)),
      resolution_(std::move(resolution)),
      state_dim_(state_dim) {
  if (axes_.empty() || axes_.size() > 2) {
    throw ConfigError("domain: need one or two axes");
  }
  if (static_cast<size_t>(lo_.size()) != axes_.size() ||
      static_cast<size_t>(hi_.size()) != axes_.size() ||
      resolution_.size() != axes_.size()) {
    throw ConfigError("domain: axes/lo/hi/resolution length mismatch");
  }
  if (axes_.size() == 2 && axes_[0] == axes_[1]) {
    throw ConfigError("domain: axes must be distinct");
  }
  total_ = 1;
  for (size_t a = 0; a < axes_.size(); ++a) {
    if (axes_[a] < 0 || axes_[a] >= state_dim_) {
      std::ostringstream os;
      os << "domain: axis index " << axes_[a] << " outside state dimension "
         << state_dim_;
      throw ConfigError(os.str());
    }
    if (resolution_[a] < 2) throw ConfigError("domain: resolution must be >= 2");
    if (!(hi_(a) > lo_(a))) throw ConfigError("domain: need hi > lo per axis");
    total_ *= resolution_[a];
  }
}

Vec DomainGrid::axis_values(std::int64_t idx) const {
  if (idx < 0 || idx >= total_) throw ConfigError("domain: index out of range");
  Vec vals(static_cast<Eigen::Index>(axes_.size()));
  if (axes_.size() == 1) {
    vals(0) = lo_(0) + (hi_(0) - lo_(0)) * static_cast<double>(idx) /
                           static_cast<double>(resolution_[0] - 1);
  } else {
    const std::int64_t res1 = resolution_[1];
    const std::int64_t i0 = idx / res1;
    const std::int64_t i1 = idx % res1;
    vals(0) = lo_(0) + (hi_(0) - lo_(0)) * static_cast<double>(i0) /
                           static_cast<double>(resolution_[0] - 1);
    vals(1) = lo_(1) + (hi_(1) - lo_(1)) * static_cast<double>(i1) /
                           static_cast<double>(res1 - 1);
  }
  return vals;
}

Vec DomainGrid::point(std::int64_t idx) const {
  const Vec vals = axis_values(idx);
  Vec x = Vec::Zero(state_dim_);
  for (size_t a = 0; a < axes_.size(); ++a) x(axes_[a]) = vals(a);
  return x;
}

void evaluate_posterior_grid(const WindowState& state, const DomainGrid& grid,
                             std::vector<double>& mu, std::vector<double>& sigma,
                             EvalMode mode) {
  if (grid.state_dim() != state.dim()) {
    throw ConfigError("evaluate_posterior_grid: grid/state dimension mismatch");
  }
  const std::int64_t n = grid.size();
  mu.resize(n);
  sigma.resize(n);

  if (mode == EvalMode::Parallel) {
#ifdef ROAGP_HAVE_OPENMP
    // exceptions must not unwind across the parallel region
    bool inconsistent = false;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        const PosteriorEval p = state.predict(grid.point(i));
        mu[i] = p.mu;
        sigma[i] = p.sigma;
      } catch (const PosteriorInconsistency&) {
#pragma omp atomic write
        inconsistent = true;
      }
    }
    if (inconsistent) {
      throw PosteriorInconsistency(
          "evaluate_posterior_grid: negative predictive variance on grid");
    }
    return;
#endif
  }
  for (std::int64_t i = 0; i < n; ++i) {
    const PosteriorEval p = state.predict(grid.point(i));
    mu[i] = p.mu;
    sigma[i] = p.sigma;
  }
}

}  // namespace roagp
