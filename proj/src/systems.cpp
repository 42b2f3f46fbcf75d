#include "roagp/systems.hpp"

#include "roagp/errors.hpp"

namespace roagp {

namespace {

Vec empty_g(const Vec&, const Vec&) { return Vec(0); }

Box centered_box(int n, double half_width) {
  return {Vec::Constant(n, -half_width), Vec::Constant(n, half_width)};
}

}  // namespace

DaeSystem make_scalar_linear(double rate, double half_width) {
  DaeDynamics dyn;
  dyn.n = 1;
  dyn.m = 0;
  dyn.f = [rate](const Vec& x, const Vec&) { return Vec::Constant(1, -rate * x(0)); };
  dyn.g = empty_g;
  dyn.jacobian = [rate](const Vec&, const Vec&) {
    JacobianBlocks jb;
    jb.fx = Mat::Constant(1, 1, -rate);
    jb.fy.resize(1, 0);
    jb.gx.resize(0, 1);
    jb.gy.resize(0, 0);
    return jb;
  };
  return DaeSystem(std::move(dyn), {Vec::Zero(1), Vec(0)}, centered_box(1, half_width));
}

DaeSystem make_scalar_bistable(double half_width) {
  // original coordinates: z' = z - z^3; translated x = z - 1
  DaeDynamics dyn;
  dyn.n = 1;
  dyn.m = 0;
  dyn.f = [](const Vec& x, const Vec&) {
    const double z = x(0) + 1.0;
    return Vec::Constant(1, z - z * z * z);
  };
  dyn.g = empty_g;
  dyn.jacobian = [](const Vec& x, const Vec&) {
    const double z = x(0) + 1.0;
    JacobianBlocks jb;
    jb.fx = Mat::Constant(1, 1, 1.0 - 3.0 * z * z);
    jb.fy.resize(1, 0);
    jb.gx.resize(0, 1);
    jb.gy.resize(0, 0);
    return jb;
  };
  return DaeSystem(std::move(dyn), {Vec::Zero(1), Vec(0)}, centered_box(1, half_width));
}

DaeSystem make_linear2d(const Mat& a, double half_width) {
  if (a.rows() != 2 || a.cols() != 2) {
    throw ConfigError("make_linear2d: matrix must be 2x2");
  }
  DaeDynamics dyn;
  dyn.n = 2;
  dyn.m = 0;
  dyn.f = [a](const Vec& x, const Vec&) -> Vec { return a * x; };
  dyn.g = empty_g;
  dyn.jacobian = [a](const Vec&, const Vec&) {
    JacobianBlocks jb;
    jb.fx = a;
    jb.fy.resize(2, 0);
    jb.gx.resize(0, 2);
    jb.gy.resize(0, 0);
    return jb;
  };
  return DaeSystem(std::move(dyn), {Vec::Zero(2), Vec(0)}, centered_box(2, half_width));
}

}  // namespace roagp
