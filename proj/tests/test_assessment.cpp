#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "roagp/assessment.hpp"
#include "roagp/errors.hpp"
#include "roagp/systems.hpp"

using namespace roagp;

namespace {

// Bisection on normal_cdf: an independent oracle for the quantile routine.
double quantile_by_bisection(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

AssessmentConfig scalar_config() {
  AssessmentConfig c;
  c.delta = 0.9;
  c.xi = 1e-3;
  c.t_n = 10.0;
  c.dt = 0.01;
  c.h = 20;
  c.max_steps = 4;
  c.max_retries = 60;
  c.kernel.length_scale = 0.5;
  c.kernel.signal_variance = 9.0;
  c.kernel.noise_variance = 1e-4;
  c.domain.axes = {0};
  c.domain.lo = Vec::Constant(1, -3.0);
  c.domain.hi = Vec::Constant(1, 3.0);
  c.domain.resolution = {61};
  return c;
}

}  // namespace

TEST_CASE("normal_cdf hits tabulated values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
  CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
  CHECK(normal_cdf(3.0) == doctest::Approx(0.9986501019683699).epsilon(1e-12));
  // Symmetry.
  CHECK(normal_cdf(0.7) + normal_cdf(-0.7) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("confidence multiplier matches reference quantiles") {
  // beta_delta(d) = Phi^{-1}((1+d)/2); reference values from an independent
  // high-precision evaluation of the inverse normal CDF.
  CHECK(beta_delta(0.1) == doctest::Approx(0.12566134685507416).epsilon(1e-9));
  CHECK(beta_delta(0.5) == doctest::Approx(0.6744897501960817).epsilon(1e-9));
  CHECK(beta_delta(0.9) == doctest::Approx(1.6448536269514722).epsilon(1e-9));
  CHECK(beta_delta(0.99) == doctest::Approx(2.5758293035489004).epsilon(1e-9));
}

TEST_CASE("confidence multiplier round-trips through the CDF") {
  for (double d : {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99, 0.999}) {
    const double b = beta_delta(d);
    CHECK(2.0 * normal_cdf(b) - 1.0 == doctest::Approx(d).epsilon(1e-9));
    CHECK(std::abs(b - quantile_by_bisection(0.5 * (1.0 + d))) <= 1e-9);
  }
  // Monotone, vanishing at delta -> 0+.
  CHECK(beta_delta(1e-12) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(beta_delta(0.5) < beta_delta(0.9));
  CHECK_THROWS_AS(beta_delta(0.0), ConfigError);
  CHECK_THROWS_AS(beta_delta(1.0), ConfigError);
  CHECK_THROWS_AS(beta_delta(-0.2), ConfigError);
}

TEST_CASE("acquisition picks the most optimistic grid point") {
  KernelSpec kernel;
  kernel.length_scale = 0.5;
  kernel.signal_variance = 9.0;
  kernel.noise_variance = 1e-4;
  DomainGrid grid({0}, Vec::Constant(1, -3.0), Vec::Constant(1, 3.0), {61}, 1);
  const double beta = beta_delta(0.9);

  SUBCASE("uniform prior ties break to the lowest index") {
    WindowState prior = WindowState::prior(kernel, 5, 1);
    Selection sel = select_sample(prior, grid, beta, {});
    CHECK(sel.index == 0);
    CHECK(sel.x[0] == -3.0);
    CHECK(sel.acquisition == doctest::Approx(beta * 3.0).epsilon(1e-12));

    // Excluding the winner moves to the next index.
    Selection sel2 = select_sample(prior, grid, beta, {0});
    CHECK(sel2.index == 1);
  }

  SUBCASE("a high observation pulls the acquisition toward it") {
    WindowState s = WindowState::initial(kernel, 10, 1);
    s = s.push(Vec::Constant(1, 2.0), 25.0);  // large value near the right edge
    Selection sel = select_sample(s, grid, beta, {});
    // Brute-force argmax over the grid must agree exactly.
    std::int64_t best = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      PosteriorEval p = s.predict(grid.point(i));
      const double a = p.mu + beta * p.sigma;
      if (a > best_val) {
        best_val = a;
        best = i;
      }
    }
    CHECK(sel.index == best);
    CHECK(sel.acquisition == doctest::Approx(best_val).epsilon(1e-12));
    CHECK(std::abs(sel.x[0] - 2.0) < 1.0);  // near the observed site
  }

  SUBCASE("exhausted domain throws") {
    WindowState prior = WindowState::prior(kernel, 5, 1);
    ExcludedSet all;
    for (std::int64_t i = 0; i < grid.size(); ++i) all.insert(i);
    CHECK_THROWS_AS(select_sample(prior, grid, beta, all), DomainExhausted);
    all.erase(42);
    Selection sel = select_sample(prior, grid, beta, all);
    CHECK(sel.index == 42);
  }

  SUBCASE("serial and parallel scans agree") {
    WindowState s = WindowState::initial(kernel, 10, 1);
    s = s.push(Vec::Constant(1, -1.2), 4.0);
    s = s.push(Vec::Constant(1, 0.8), 1.5);
    Selection a = select_sample(s, grid, beta, {7}, EvalMode::Serial);
    Selection b = select_sample(s, grid, beta, {7}, EvalMode::Parallel);
    CHECK(a.index == b.index);
    CHECK(a.acquisition == b.acquisition);
  }
}

TEST_CASE("one sampling step on the stable scalar system") {
  DaeSystem sys = make_scalar_linear();
  AssessmentConfig cfg = scalar_config();
  DomainGrid grid = cfg.domain.grid(sys.n());
  WindowState state = WindowState::initial(cfg.kernel, cfg.h, sys.n());
  ExcludedSet excluded;
  AssessmentLog log;

  WindowState next = assessment_step(sys, state, cfg, grid, excluded, log);
  CHECK(next.step() == state.step() + 1);
  REQUIRE(log.records.size() == 1);
  const LogRecord& rec = log.records.front();
  CHECK(rec.accepted);
  CHECK(rec.step == 1);
  // The fresh posterior is symmetric, so the first pick is the left edge,
  // and its converse value estimate is close to x^2/2 = 4.5.
  CHECK(rec.x[0] == -3.0);
  CHECK(rec.v_hat == doctest::Approx(4.5).epsilon(0.01));
  CHECK(next.max_observation() == rec.v_hat);
  CHECK(excluded.empty());
  CHECK(rec.wall_ms >= 0.0);
}

TEST_CASE("rejections are excluded and retried within one step") {
  DaeSystem sys = make_scalar_bistable();
  AssessmentConfig cfg = scalar_config();
  cfg.domain.lo = Vec::Constant(1, -2.0);
  cfg.domain.hi = Vec::Constant(1, 2.0);
  cfg.domain.resolution = {101};
  cfg.max_retries = 120;
  DomainGrid grid = cfg.domain.grid(sys.n());
  WindowState state = WindowState::initial(cfg.kernel, cfg.h, sys.n());
  ExcludedSet excluded;
  AssessmentLog log;

  // First pick is x = -2, outside the basin (boundary at -1): it must be
  // rejected and the step must continue until something converges.
  WindowState next = assessment_step(sys, state, cfg, grid, excluded, log);
  CHECK(next.step() == 1);
  REQUIRE(log.records.size() >= 2);
  CHECK_FALSE(log.records.front().accepted);
  CHECK(log.records.front().x[0] == -2.0);
  CHECK(log.records.back().accepted);
  CHECK(log.records.back().x[0] > -1.0);
  CHECK(!excluded.empty());
  // Every rejected point lies outside the true basin.
  for (std::int64_t idx : excluded) CHECK(grid.point(idx)[0] <= -1.0);
  // All records belong to step 1.
  for (const auto& r : log.records) CHECK(r.step == 1);
}

TEST_CASE("retry budget exhaustion raises StepFailed with the step number") {
  // x' = +x: nothing converges except the origin's immediate vicinity.
  DaeSystem sys = make_scalar_linear(-1.0);  // rate -1 => x' = +x
  AssessmentConfig cfg = scalar_config();
  cfg.max_retries = 5;
  cfg.t_n = 2.0;
  DomainGrid grid = cfg.domain.grid(sys.n());
  WindowState state = WindowState::initial(cfg.kernel, cfg.h, sys.n());
  ExcludedSet excluded;
  AssessmentLog log;
  CHECK_THROWS_AS(assessment_step(sys, state, cfg, grid, excluded, log), StepFailed);
  try {
    assessment_step(sys, state, cfg, grid, excluded, log);
  } catch (const StepFailed& e) {
    CHECK(e.step == 1);
  }
}

TEST_CASE("membership threshold is non-strict") {
  KernelSpec kernel;
  kernel.length_scale = 0.5;
  kernel.signal_variance = 9.0;
  kernel.noise_variance = 1e-4;
  DomainGrid grid({0}, Vec::Constant(1, -1.0), Vec::Constant(1, 1.0), {3}, 1);
  const double delta = 0.9;
  const double beta = beta_delta(delta);

  // Hand-build a window whose posterior at some grid point sits exactly on
  // the boundary mu + beta sigma = v_hat_max. With alpha = C = 0 the
  // posterior is mu = 0, sigma = s everywhere, so set one observation to
  // exactly beta * s.
  const double s = std::sqrt(kernel.signal_variance);
  const int h = 4;
  Mat points = Mat::Zero(h, 1);
  Vec obs = Vec::Zero(h);
  obs[h - 1] = beta * s;
  Mat k(h, h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < h; ++j)
      k(i, j) = kernel_eval(kernel, points.row(i).transpose(), points.row(j).transpose());
  WindowState exact = WindowState::restore(kernel, 1, h, points, obs, Vec::Zero(h),
                                           Mat::Zero(h, h), k);
  RoaEstimate est = roa_grid(exact, grid, delta);
  CHECK(est.v_hat_max == beta * s);
  for (const RoaCell& c : est.cells) {
    CHECK(c.mu == 0.0);
    CHECK(c.sigma == doctest::Approx(s).epsilon(1e-15));
    CHECK(c.member);  // equality counts as inside
  }

  // Nudge the threshold one ulp below the score: everything drops out.
  Vec obs_low = obs;
  obs_low[h - 1] = std::nextafter(beta * s, -std::numeric_limits<double>::infinity());
  WindowState below = WindowState::restore(kernel, 1, h, points, obs_low, Vec::Zero(h),
                                           Mat::Zero(h, h), k);
  RoaEstimate est_low = roa_grid(below, grid, delta);
  for (const RoaCell& c : est_low.cells) CHECK_FALSE(c.member);
}

TEST_CASE("membership flags recompute from the published cell fields") {
  DaeSystem sys = make_scalar_linear();
  AssessmentConfig cfg = scalar_config();
  AssessmentResult res = run_assessment(sys, cfg);
  REQUIRE(!res.estimates.empty());
  for (const RoaEstimate& est : res.estimates) {
    CHECK(est.beta == doctest::Approx(beta_delta(est.delta)).epsilon(1e-12));
    for (const RoaCell& c : est.cells) {
      const bool recomputed = c.mu + est.beta * c.sigma <= est.v_hat_max;
      CHECK(c.member == recomputed);
    }
  }
}

TEST_CASE("fresh window yields an empty estimate") {
  KernelSpec kernel;
  kernel.signal_variance = 9.0;
  kernel.length_scale = 0.5;
  kernel.noise_variance = 1e-4;
  WindowState init = WindowState::initial(kernel, 10, 1);
  DomainGrid grid({0}, Vec::Constant(1, -3.0), Vec::Constant(1, 3.0), {61}, 1);
  RoaEstimate est = roa_grid(init, grid, 0.9);
  CHECK(est.v_hat_max == 0.0);  // only the preloaded zeros
  // Away from the origin sigma is large, so mu + beta sigma > 0: not members.
  std::int64_t members = 0;
  for (const RoaCell& c : est.cells)
    if (c.member) ++members;
  // At most the immediate origin vicinity can slip under the zero threshold.
  CHECK(members <= 3);
  for (const RoaCell& c : est.cells)
    if (c.member) CHECK(std::abs(c.x) <= 0.2);
}

TEST_CASE("full run on the stable scalar system") {
  DaeSystem sys = make_scalar_linear();
  AssessmentConfig cfg = scalar_config();
  AssessmentResult res = run_assessment(sys, cfg);

  REQUIRE(res.estimates.size() == 4);
  CHECK(res.final_state.step() == 4);
  CHECK(res.excluded.empty());  // everything in [-3,3] converges
  REQUIRE(res.log.records.size() == 4);
  for (const LogRecord& r : res.log.records) {
    CHECK(r.accepted);
    // Globally stable linear system: the converse value is x^2/2.
    CHECK(r.v_hat == doctest::Approx(0.5 * r.x[0] * r.x[0]).epsilon(0.02));
  }
  // Steps enumerate 1..4.
  for (std::size_t i = 0; i < res.log.records.size(); ++i)
    CHECK(res.log.records[i].step == static_cast<std::int64_t>(i + 1));
  // Estimates carry increasing step stamps and a growing-or-equal threshold.
  for (std::size_t i = 0; i < res.estimates.size(); ++i)
    CHECK(res.estimates[i].step == static_cast<std::int64_t>(i + 1));
}

TEST_CASE("max_steps = 0 produces exactly the initial estimate") {
  DaeSystem sys = make_scalar_linear();
  AssessmentConfig cfg = scalar_config();
  cfg.max_steps = 0;
  AssessmentResult res = run_assessment(sys, cfg);
  REQUIRE(res.estimates.size() == 1);
  CHECK(res.estimates.front().step == 0);
  CHECK(res.log.records.empty());
  CHECK(res.final_state.step() == 0);
}

TEST_CASE("unstable equilibrium is rejected up front") {
  DaeSystem sys = make_scalar_linear(-1.0);  // x' = +x
  AssessmentConfig cfg = scalar_config();
  CHECK_THROWS_AS(run_assessment(sys, cfg), UnstableEquilibrium);
}

TEST_CASE("higher confidence gives nested (smaller) membership sets") {
  DaeSystem sys = make_scalar_bistable();
  AssessmentConfig cfg = scalar_config();
  cfg.domain.lo = Vec::Constant(1, -2.0);
  cfg.domain.hi = Vec::Constant(1, 2.0);
  cfg.domain.resolution = {101};
  cfg.max_steps = 8;
  cfg.max_retries = 120;
  AssessmentResult res = run_assessment(sys, cfg);

  DomainGrid grid = cfg.domain.grid(sys.n());
  RoaEstimate e50 = roa_grid(res.final_state, grid, 0.5);
  RoaEstimate e90 = roa_grid(res.final_state, grid, 0.9);
  RoaEstimate e99 = roa_grid(res.final_state, grid, 0.99);
  REQUIRE(e50.cells.size() == e90.cells.size());
  std::int64_t n50 = 0, n90 = 0, n99 = 0;
  for (std::size_t i = 0; i < e50.cells.size(); ++i) {
    n50 += e50.cells[i].member;
    n90 += e90.cells[i].member;
    n99 += e99.cells[i].member;
    // Containment pointwise: a 0.99-member must be a 0.9-member, etc.
    if (e99.cells[i].member) CHECK(e90.cells[i].member);
    if (e90.cells[i].member) CHECK(e50.cells[i].member);
  }
  CHECK(n50 >= n90);
  CHECK(n90 >= n99);
  CHECK(n90 > 0);  // after 8 steps something is inside
}

TEST_CASE("threshold follows the window when large values are evicted") {
  // Width-2 window: push 5, 5, then 1. After the third push both 5s are gone
  // one by one and the max drops.
  KernelSpec kernel;
  kernel.length_scale = 0.5;
  kernel.signal_variance = 1.0;
  kernel.noise_variance = 1e-4;
  DomainGrid grid({0}, Vec::Constant(1, -1.0), Vec::Constant(1, 1.0), {5}, 1);
  WindowState s = WindowState::initial(kernel, 2, 1);
  s = s.push(Vec::Constant(1, 0.3), 5.0);
  s = s.push(Vec::Constant(1, -0.4), 5.0);
  CHECK(roa_grid(s, grid, 0.9).v_hat_max == 5.0);
  s = s.push(Vec::Constant(1, 0.1), 1.0);
  CHECK(roa_grid(s, grid, 0.9).v_hat_max == 5.0);  // one 5 still in the window
  s = s.push(Vec::Constant(1, -0.2), 1.0);
  CHECK(roa_grid(s, grid, 0.9).v_hat_max == 1.0);  // both 5s evicted
}

TEST_CASE("rejected starts never enter the window") {
  DaeSystem sys = make_scalar_bistable();
  AssessmentConfig cfg = scalar_config();
  cfg.domain.lo = Vec::Constant(1, -2.0);
  cfg.domain.hi = Vec::Constant(1, 2.0);
  cfg.domain.resolution = {101};
  cfg.max_steps = 6;
  cfg.max_retries = 120;
  AssessmentResult res = run_assessment(sys, cfg);

  DomainGrid grid = cfg.domain.grid(sys.n());
  const Mat& pts = res.final_state.points();
  for (std::int64_t idx : res.excluded) {
    const double bad_x = grid.point(idx)[0];
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
      // Window rows are either preloaded origin slots or accepted samples.
      if (pts(r, 0) != 0.0) CHECK(pts(r, 0) != bad_x);
    }
  }
  // And the log agrees: accepted records only for basin points.
  for (const LogRecord& r : res.log.records)
    if (r.accepted) CHECK(r.x[0] > -1.0);
}

TEST_CASE("resume continues from the handed-over state") {
  DaeSystem sys = make_scalar_linear();
  AssessmentConfig cfg = scalar_config();
  cfg.max_steps = 2;
  AssessmentResult first = run_assessment(sys, cfg);
  AssessmentResult second =
      resume_assessment(sys, cfg, first.final_state, first.excluded);
  CHECK(second.final_state.step() == 4);
  REQUIRE(second.log.records.size() == 2);
  CHECK(second.log.records.front().step == 3);

  // Dimension mismatch is rejected.
  KernelSpec k2 = cfg.kernel;
  WindowState wrong = WindowState::initial(k2, cfg.h, 2);
  CHECK_THROWS_AS(resume_assessment(sys, cfg, wrong, {}), ConfigError);
}

TEST_CASE("config parsing reports offending keys") {
  const char* good = R"({
    "delta": 0.9, "xi": 1e-3, "t_n": 10.0, "dt": 0.01, "h": 20,
    "max_steps": 4, "max_retries": 60,
    "kernel": {"length_scale": 0.5, "signal_variance": 9.0, "noise_variance": 1e-4},
    "domain": {"axes": [0], "lo": [-3.0], "hi": [3.0], "resolution": [61]},
    "gamma": {"exponent": 2.0}
  })";
  AssessmentConfig cfg = AssessmentConfig::from_json_text(good);
  CHECK(cfg.delta == 0.9);
  CHECK(cfg.h == 20);
  CHECK(cfg.gamma_exponent == 2.0);
  REQUIRE(cfg.domain.axes.size() == 1);
  CHECK(cfg.domain.resolution[0] == 61);

  // Flat gamma_exponent spelling also accepted.
  AssessmentConfig flat = AssessmentConfig::from_json_text(
      R"({"domain": {"axes": [0], "lo": [-1.0], "hi": [1.0], "resolution": [11]},
          "gamma_exponent": 3.0})");
  CHECK(flat.gamma_exponent == 3.0);

  auto expect_mentions = [](const char* text, const char* needle) {
    try {
      AssessmentConfig::from_json_text(text);
      FAIL_CHECK("expected ConfigError for: " << needle);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_mentions(R"({"delta": 1.5,
                      "domain": {"axes":[0],"lo":[-1.0],"hi":[1.0],"resolution":[11]}})",
                  "delta");
  expect_mentions(R"({"dt": -0.1,
                      "domain": {"axes":[0],"lo":[-1.0],"hi":[1.0],"resolution":[11]}})",
                  "dt");
  expect_mentions(R"({"h": 0,
                      "domain": {"axes":[0],"lo":[-1.0],"hi":[1.0],"resolution":[11]}})",
                  "h");
  expect_mentions(R"({"domain": {"axes":[0],"lo":[-1.0],"hi":[1.0]}})", "resolution");
  expect_mentions(R"({})", "domain");
  CHECK_THROWS_AS(AssessmentConfig::from_json_text("not json"), ConfigError);
  CHECK_THROWS_AS(AssessmentConfig::from_file("/nonexistent/path.json"), ConfigError);
}
