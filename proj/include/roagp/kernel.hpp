#pragma once

#include <cmath>

#include "roagp/errors.hpp"
#include "roagp/types.hpp"

namespace roagp {

// Squared-exponential covariance plus the observation noise level used when
// conditioning. Defaults follow the assessment loop's standard settings.
struct KernelSpec {
  double length_scale = 0.5;
  double signal_variance = 1.0;
  double noise_variance = 1e-4;

  void validate() const {
    if (!(length_scale > 0.0)) throw ConfigError("kernel: length_scale must be > 0");
    if (!(signal_variance > 0.0)) throw ConfigError("kernel: signal_variance must be > 0");
    if (!(noise_variance >= 0.0)) throw ConfigError("kernel: noise_variance must be >= 0");
  }
};

inline double kernel_eval(const KernelSpec& k, const Vec& a, const Vec& b) {
  const double d2 = (a - b).squaredNorm();
  return k.signal_variance * std::exp(-d2 / (2.0 * k.length_scale * k.length_scale));
}

}  // namespace roagp
