#pragma once

#include "roagp/dae_system.hpp"

namespace roagp {

// Small analytic systems used as CLI-accessible test models and in tests.

// x' = -rate * x, equilibrium at 0. rate > 0 gives a stable origin.
DaeSystem make_scalar_linear(double rate = 1.0, double half_width = 3.0);

// x' = x - x^3 translated so the stable equilibrium at +1 sits at the origin.
// The true basin of the origin in translated coordinates is (-1, inf).
DaeSystem make_scalar_bistable(double half_width = 2.0);

// Planar linear ODE x' = A x (A must be provided, equilibrium at 0).
DaeSystem make_linear2d(const Mat& a, double half_width = 3.0);

}  // namespace roagp
