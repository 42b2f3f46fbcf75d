#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "roagp/errors.hpp"
#include "roagp/grid_eval.hpp"
#include "roagp/window_gp.hpp"

using namespace roagp;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

WindowState seeded_state(int dim, int h, int n_points, unsigned seed) {
  KernelSpec kernel;
  kernel.length_scale = 0.6;
  kernel.signal_variance = 3.0;
  kernel.noise_variance = 1e-4;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  WindowState s = WindowState::initial(kernel, h, dim);
  for (int i = 0; i < n_points; ++i) {
    Vec x(dim);
    for (int d = 0; d < dim; ++d) x[d] = u(rng);
    s = s.push(x, 0.5 * x.squaredNorm());
  }
  return s;
}

}  // namespace

TEST_CASE("two-axis grid indexing is row-major with zeros elsewhere") {
  // Axes 0 and 2 of a 4-dimensional state, resolutions 3 x 2.
  DomainGrid grid({0, 2}, vec2(-1.0, 10.0), vec2(1.0, 20.0), {3, 2}, 4);
  REQUIRE(grid.size() == 6);
  CHECK(grid.state_dim() == 4);

  // idx = i * 2 + j with axis values (-1, 0, 1) x (10, 20).
  struct Expect {
    std::int64_t idx;
    double a0, a2;
  };
  const Expect table[] = {{0, -1.0, 10.0}, {1, -1.0, 20.0}, {2, 0.0, 10.0},
                          {3, 0.0, 20.0},  {4, 1.0, 10.0},  {5, 1.0, 20.0}};
  for (const auto& e : table) {
    Vec p = grid.point(e.idx);
    REQUIRE(p.size() == 4);
    CHECK(p[0] == doctest::Approx(e.a0).epsilon(1e-15));
    CHECK(p[2] == doctest::Approx(e.a2).epsilon(1e-15));
    CHECK(p[1] == 0.0);
    CHECK(p[3] == 0.0);
    Vec av = grid.axis_values(e.idx);
    REQUIRE(av.size() == 2);
    CHECK(av[0] == doctest::Approx(e.a0).epsilon(1e-15));
    CHECK(av[1] == doctest::Approx(e.a2).epsilon(1e-15));
  }
}

TEST_CASE("grid endpoints land exactly on the bounds") {
  DomainGrid grid({0}, Vec::Constant(1, -3.0), Vec::Constant(1, 3.0), {61}, 1);
  REQUIRE(grid.size() == 61);
  CHECK(grid.point(0)[0] == -3.0);
  CHECK(grid.point(60)[0] == 3.0);
  CHECK(grid.point(30)[0] == doctest::Approx(0.0).epsilon(1e-15));
  // Uniform spacing.
  const double step = grid.point(1)[0] - grid.point(0)[0];
  CHECK(step == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(grid.point(31)[0] - grid.point(30)[0] == doctest::Approx(step).epsilon(1e-12));
}

TEST_CASE("one-axis grid in a multi-dim state") {
  DomainGrid grid({1}, Vec::Constant(1, 0.0), Vec::Constant(1, 1.0), {5}, 3);
  REQUIRE(grid.size() == 5);
  Vec p = grid.point(2);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[2] == 0.0);
  CHECK(grid.axis_values(2).size() == 1);
}

TEST_CASE("grid constructor rejects bad specifications") {
  const Vec lo1 = Vec::Constant(1, -1.0);
  const Vec hi1 = Vec::Constant(1, 1.0);
  // Repeated axis.
  CHECK_THROWS_AS(DomainGrid({0, 0}, vec2(-1, -1), vec2(1, 1), {3, 3}, 2), ConfigError);
  // Axis out of range.
  CHECK_THROWS_AS(DomainGrid({2}, lo1, hi1, {3}, 2), ConfigError);
  CHECK_THROWS_AS(DomainGrid({-1}, lo1, hi1, {3}, 2), ConfigError);
  // lo >= hi.
  CHECK_THROWS_AS(DomainGrid({0}, Vec::Constant(1, 1.0), Vec::Constant(1, 1.0), {3}, 1),
                  ConfigError);
  // Resolution below 2.
  CHECK_THROWS_AS(DomainGrid({0}, lo1, hi1, {1}, 1), ConfigError);
  // Mismatched axis/resolution counts.
  CHECK_THROWS_AS(DomainGrid({0, 1}, vec2(-1, -1), vec2(1, 1), {3}, 2), ConfigError);
  // No axes at all.
  CHECK_THROWS_AS(DomainGrid({}, Vec(0), Vec(0), {}, 2), ConfigError);
}

TEST_CASE("grid evaluation matches pointwise prediction") {
  WindowState state = seeded_state(2, 15, 15, 11);
  DomainGrid grid({0, 1}, vec2(-2.0, -2.0), vec2(2.0, 2.0), {9, 7}, 2);
  std::vector<double> mu, sigma;
  evaluate_posterior_grid(state, grid, mu, sigma, EvalMode::Serial);
  REQUIRE(mu.size() == static_cast<std::size_t>(grid.size()));
  REQUIRE(sigma.size() == mu.size());
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    PosteriorEval p = state.predict(grid.point(i));
    CHECK(mu[static_cast<std::size_t>(i)] == p.mu);
    CHECK(sigma[static_cast<std::size_t>(i)] == p.sigma);
    CHECK(sigma[static_cast<std::size_t>(i)] >= 0.0);
  }
}

TEST_CASE("parallel grid sweep is bitwise identical to the serial reference") {
  WindowState state = seeded_state(2, 40, 60, 21);
  DomainGrid grid({0, 1}, vec2(-2.0, -2.0), vec2(2.0, 2.0), {101, 101}, 2);
  std::vector<double> mu_s, sig_s, mu_p, sig_p;
  evaluate_posterior_grid(state, grid, mu_s, sig_s, EvalMode::Serial);
  evaluate_posterior_grid(state, grid, mu_p, sig_p, EvalMode::Parallel);
  REQUIRE(mu_p.size() == mu_s.size());
  bool mu_equal = true, sig_equal = true;
  for (std::size_t i = 0; i < mu_s.size(); ++i) {
    if (mu_s[i] != mu_p[i]) mu_equal = false;
    if (sig_s[i] != sig_p[i]) sig_equal = false;
  }
  CHECK(mu_equal);
  CHECK(sig_equal);
}

TEST_CASE("prior state evaluates to the prior on the whole grid") {
  KernelSpec kernel;
  kernel.signal_variance = 4.0;
  WindowState prior = WindowState::prior(kernel, 5, 1);
  DomainGrid grid({0}, Vec::Constant(1, -1.0), Vec::Constant(1, 1.0), {11}, 1);
  std::vector<double> mu, sigma;
  evaluate_posterior_grid(prior, grid, mu, sigma, EvalMode::Parallel);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    CHECK(mu[i] == 0.0);
    CHECK(sigma[i] == doctest::Approx(2.0).epsilon(1e-15));
  }
}
