#include "roagp/assessment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "roagp/errors.hpp"

namespace roagp {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

namespace {

// Rational approximation of the inverse standard normal CDF (relative error
// ~1.15e-9 everywhere), refined below to full double precision.
double inverse_normal_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double beta_delta(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw ConfigError("delta must lie in (0, 1), got " + std::to_string(delta));
  }
  const double p = 0.5 * (1.0 + delta);
  double x = inverse_normal_approx(p);
  // One Halley step against the exact CDF; takes the approximation to ~1e-15.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

// ---- configuration ---------------------------------------------------------

void AssessmentConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("assessment: delta must lie in (0, 1)");
  if (!(xi > 0.0)) throw ConfigError("assessment: xi must be positive");
  if (!(t_n > 0.0)) throw ConfigError("assessment: t_n must be positive");
  if (!(dt > 0.0) || dt > t_n) throw ConfigError("assessment: dt must lie in (0, t_n]");
  if (h < 1) throw ConfigError("assessment: h must be at least 1");
  if (max_steps < 0) throw ConfigError("assessment: max_steps must be non-negative");
  if (max_retries < 1) throw ConfigError("assessment: max_retries must be at least 1");
  if (!(gamma_exponent >= 1.0)) throw ConfigError("assessment: gamma_exponent must be >= 1");
  kernel.validate();
  const std::size_t k = domain.axes.size();
  if (k != 1 && k != 2) throw ConfigError("assessment: domain.axes must list 1 or 2 coordinates");
  if (domain.lo.size() != static_cast<Eigen::Index>(k) ||
      domain.hi.size() != static_cast<Eigen::Index>(k) ||
      domain.resolution.size() != k) {
    throw ConfigError("assessment: domain lo/hi/resolution must match axes length");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(domain.lo[static_cast<Eigen::Index>(i)] < domain.hi[static_cast<Eigen::Index>(i)])) {
      throw ConfigError("assessment: domain.lo must be strictly below domain.hi");
    }
    if (domain.resolution[i] < 2) throw ConfigError("assessment: domain.resolution must be >= 2");
  }
}

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ConfigError("assessment config: missing or non-numeric key '" + key + "'");
  }
  return j.at(key).get<double>();
}

double optional_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError("assessment config: key '" + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

AssessmentConfig AssessmentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("assessment config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("assessment config: top level must be an object");

  AssessmentConfig cfg;
  cfg.delta = optional_number(j, "delta", cfg.delta);
  cfg.xi = optional_number(j, "xi", cfg.xi);
  cfg.t_n = optional_number(j, "t_n", cfg.t_n);
  cfg.dt = optional_number(j, "dt", cfg.dt);
  cfg.h = static_cast<int>(optional_number(j, "h", cfg.h));
  cfg.max_steps = static_cast<int>(optional_number(j, "max_steps", cfg.max_steps));
  cfg.max_retries = static_cast<int>(optional_number(j, "max_retries", cfg.max_retries));
  if (j.contains("halt_on_step_failure")) {
    if (!j.at("halt_on_step_failure").is_boolean()) {
      throw ConfigError("assessment config: key 'halt_on_step_failure' must be a boolean");
    }
    cfg.halt_on_step_failure = j.at("halt_on_step_failure").get<bool>();
  }
  cfg.gamma_exponent = optional_number(j, "gamma_exponent", cfg.gamma_exponent);
  if (j.contains("gamma")) {
    const json& g = j.at("gamma");
    if (!g.is_object()) throw ConfigError("assessment config: key 'gamma' must be an object");
    cfg.gamma_exponent = optional_number(g, "exponent", cfg.gamma_exponent);
  }

  if (j.contains("kernel")) {
    const json& k = j.at("kernel");
    if (!k.is_object()) throw ConfigError("assessment config: key 'kernel' must be an object");
    cfg.kernel.length_scale = optional_number(k, "length_scale", cfg.kernel.length_scale);
    cfg.kernel.signal_variance = optional_number(k, "signal_variance", cfg.kernel.signal_variance);
    cfg.kernel.noise_variance = optional_number(k, "noise_variance", cfg.kernel.noise_variance);
  }

  if (!j.contains("domain") || !j.at("domain").is_object()) {
    throw ConfigError("assessment config: missing object key 'domain'");
  }
  const json& d = j.at("domain");
  for (const char* key : {"axes", "lo", "hi", "resolution"}) {
    if (!d.contains(key) || !d.at(key).is_array()) {
      throw ConfigError(std::string("assessment config: domain needs array key '") + key + "'");
    }
  }
  const auto& axes = d.at("axes");
  const auto& lo = d.at("lo");
  const auto& hi = d.at("hi");
  const auto& res = d.at("resolution");
  const std::size_t k = axes.size();
  if (lo.size() != k || hi.size() != k || res.size() != k) {
    throw ConfigError("assessment config: domain axes/lo/hi/resolution lengths differ");
  }
  cfg.domain.lo.resize(static_cast<Eigen::Index>(k));
  cfg.domain.hi.resize(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    if (!axes[i].is_number_integer()) throw ConfigError("assessment config: domain.axes must be integers");
    if (!lo[i].is_number() || !hi[i].is_number()) {
      throw ConfigError("assessment config: domain.lo/hi must be numbers");
    }
    if (!res[i].is_number_integer()) {
      throw ConfigError("assessment config: domain.resolution must be integers");
    }
    cfg.domain.axes.push_back(axes[i].get<int>());
    cfg.domain.lo[static_cast<Eigen::Index>(i)] = lo[i].get<double>();
    cfg.domain.hi[static_cast<Eigen::Index>(i)] = hi[i].get<double>();
    cfg.domain.resolution.push_back(res[i].get<int>());
  }

  cfg.validate();
  return cfg;
}

AssessmentConfig AssessmentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("assessment config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

// ---- acquisition -----------------------------------------------------------

Selection select_sample(const WindowState& state, const DomainGrid& grid,
                        double beta, const ExcludedSet& excluded, EvalMode mode) {
  std::vector<double> mu;
  std::vector<double> sigma;
  evaluate_posterior_grid(state, grid, mu, sigma, mode);

  // The scan is serial so the lowest-index tie-break is exact regardless of
  // how the evaluations above were scheduled.
  std::int64_t best = -1;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    if (excluded.count(i)) continue;
    const double val = mu[static_cast<std::size_t>(i)] + beta * sigma[static_cast<std::size_t>(i)];
    if (val > best_val) {
      best_val = val;
      best = i;
    }
  }
  if (best < 0) throw DomainExhausted("every grid point has been excluded");
  return Selection{best, grid.point(best), best_val};
}

// ---- assessment loop -------------------------------------------------------

WindowState assessment_step(const DaeSystem& system, const WindowState& state,
                            const AssessmentConfig& config, const DomainGrid& grid,
                            ExcludedSet& excluded, AssessmentLog& log) {
  const double beta = beta_delta(config.delta);
  const GammaFunction gamma = GammaFunction::power(config.gamma_exponent);
  const std::int64_t this_step = state.step() + 1;

  int rejections = 0;
  for (;;) {
    const Selection sel = select_sample(state, grid, beta, excluded, EvalMode::Parallel);
    const auto start = std::chrono::steady_clock::now();

    bool accepted = false;
    double v_hat = 0.0;
    try {
      const Trajectory traj = integrate(system, sel.x, config.dt, config.t_n, config.xi);
      const LyapunovSample sample = estimate_lyapunov(traj, gamma);
      v_hat = sample.v_hat;
      accepted = true;
    } catch (const NotStableSample&) {
      // trajectory left the xi-ball: ordinary rejection
    } catch (const TrajectoryAborted&) {
      // algebraic solve broke down along the way: treat as unstable
    } catch (const TrajectoryDiverged&) {
      // state blew up: certainly outside the region of attraction
    }

    const auto stop = std::chrono::steady_clock::now();
    LogRecord rec;
    rec.step = this_step;
    rec.x = sel.x;
    rec.accepted = accepted;
    rec.v_hat = v_hat;
    rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    log.records.push_back(std::move(rec));

    if (accepted) return state.push(sel.x, v_hat);

    excluded.insert(sel.index);
    ++rejections;
    if (rejections > config.max_retries) {
      throw StepFailed("retry budget exhausted (" + std::to_string(config.max_retries) +
                           " rejected samples)",
                       this_step);
    }
  }
}

RoaEstimate roa_grid(const WindowState& state, const DomainGrid& grid, double delta,
                     EvalMode mode) {
  std::vector<double> mu;
  std::vector<double> sigma;
  evaluate_posterior_grid(state, grid, mu, sigma, mode);

  RoaEstimate est;
  est.step = state.step();
  est.delta = delta;
  est.beta = beta_delta(delta);
  est.v_hat_max = state.max_observation();
  est.cells.resize(static_cast<std::size_t>(grid.size()));
  const bool two_d = grid.axes().size() == 2;
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    const Vec av = grid.axis_values(i);
    RoaCell& cell = est.cells[static_cast<std::size_t>(i)];
    cell.x = av[0];
    cell.y = two_d ? av[1] : 0.0;
    cell.mu = mu[static_cast<std::size_t>(i)];
    cell.sigma = sigma[static_cast<std::size_t>(i)];
    cell.member = cell.mu + est.beta * cell.sigma <= est.v_hat_max;
  }
  return est;
}

namespace {

AssessmentResult run_loop(const DaeSystem& system, const AssessmentConfig& config,
                          WindowState state, ExcludedSet excluded) {
  const DomainGrid grid = config.domain.grid(system.n());

  AssessmentResult result{.estimates = {}, .log = {}, .final_state = std::move(state),
                          .excluded = std::move(excluded)};
  if (config.max_steps == 0) {
    result.estimates.push_back(roa_grid(result.final_state, grid, config.delta));
    return result;
  }
  for (int step = 0; step < config.max_steps; ++step) {
    try {
      result.final_state = assessment_step(system, result.final_state, config, grid,
                                           result.excluded, result.log);
    } catch (const StepFailed&) {
      if (config.halt_on_step_failure) throw;
      // Step skipped; the estimate below repeats the previous window state.
    }
    result.estimates.push_back(roa_grid(result.final_state, grid, config.delta));
  }
  return result;
}

void require_hurwitz(const DaeSystem& system) {
  const Equilibrium& eq = system.equilibrium();
  const ReducedJacobian red = reduced_matrix(system.dynamics(), eq.x, eq.y);
  if (!is_hurwitz(red.a)) {
    throw UnstableEquilibrium(
        "equilibrium fails the Hurwitz screen; assessment refuses to start");
  }
}

}  // namespace

AssessmentResult run_assessment(const DaeSystem& system, const AssessmentConfig& config) {
  config.validate();
  require_hurwitz(system);
  WindowState state = WindowState::initial(config.kernel, config.h, system.n());
  return run_loop(system, config, std::move(state), ExcludedSet{});
}

AssessmentResult resume_assessment(const DaeSystem& system, const AssessmentConfig& config,
                                   WindowState state, ExcludedSet excluded) {
  config.validate();
  require_hurwitz(system);
  if (state.dim() != system.n()) {
    throw ConfigError("snapshot dimension " + std::to_string(state.dim()) +
                      " does not match the model state dimension " + std::to_string(system.n()));
  }
  return run_loop(system, config, std::move(state), std::move(excluded));
}

}  // namespace roagp
