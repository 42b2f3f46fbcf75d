#pragma once

#include <cstdint>
#include <vector>

#include "roagp/types.hpp"
#include "roagp/window_gp.hpp"

namespace roagp {

// Regular grid over one or two selected state coordinates; all other
// coordinates are pinned to zero. Row-major linear indexing: the first axis
// is the slow one. A single-axis domain behaves like a 1 x resolution grid.
class DomainGrid {
 public:
  DomainGrid(std::vector<int> axes, Vec lo, Vec hi, std::vector<int> resolution,
             int state_dim);

  std::int64_t size() const { return total_; }
  int state_dim() const { return state_dim_; }
  const std::vector<int>& axes() const { return axes_; }
  const std::vector<int>& resolution() const { return resolution_; }

  // Full-dimensional state for a linear index.
  Vec point(std::int64_t idx) const;

  // The grid coordinates only (1 or 2 values matching axes()).
  Vec axis_values(std::int64_t idx) const;

 private:
  std::vector<int> axes_;
  Vec lo_, hi_;
  std::vector<int> resolution_;
  int state_dim_ = 0;
  std::int64_t total_ = 0;
};

enum class EvalMode { Serial, Parallel };

// Posterior mean/std at every grid point. The parallel path distributes grid
// points across OpenMP threads; each point's arithmetic is independent, so
// both modes produce bitwise-identical output (asserted in tests).
void evaluate_posterior_grid(const WindowState& state, const DomainGrid& grid,
                             std::vector<double>& mu, std::vector<double>& sigma,
                             EvalMode mode);

}  // namespace roagp
