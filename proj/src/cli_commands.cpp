#include "roagp/cli_commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <Eigen/SVD>
#include "json.hpp"

#include "roagp/assessment.hpp"
#include "roagp/csv_io.hpp"
#include "roagp/errors.hpp"
#include "roagp/microgrid.hpp"
#include "roagp/snapshot.hpp"
#include "roagp/systems.hpp"
#include "roagp/trajectory.hpp"

namespace roagp {

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double number_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) {
    throw ConfigError(std::string("model config: key '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

DaeSystem build_model(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model config: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError("model config: missing string key 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "microgrid") {
    return microgrid_build(MicrogridConfig::from_json_text(json_text));
  }
  if (type == "scalar_linear") {
    return make_scalar_linear(number_or(j, "rate", 1.0), number_or(j, "half_width", 3.0));
  }
  if (type == "scalar_bistable") {
    return make_scalar_bistable(number_or(j, "half_width", 2.0));
  }
  if (type == "linear2d") {
    if (!j.contains("a") || !j.at("a").is_array() || j.at("a").size() != 2) {
      throw ConfigError("model config: linear2d needs key 'a' as a 2x2 array");
    }
    Mat a(2, 2);
    for (int r = 0; r < 2; ++r) {
      const auto& row = j.at("a").at(r);
      if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
        throw ConfigError("model config: linear2d needs key 'a' as a 2x2 array");
      }
      a(r, 0) = row[0].get<double>();
      a(r, 1) = row[1].get<double>();
    }
    return make_linear2d(a, number_or(j, "half_width", 3.0));
  }
  throw ConfigError("model config: unknown 'type' value '" + type + "'");
}

// ---- simulate ---------------------------------------------------------------

namespace {

// One integration phase expressed in base-equilibrium coordinates.
struct Phase {
  DaeDynamics dyn;
  long steps = 0;
};

}  // namespace

int cmd_simulate(const SimulateOptions& options, std::ostream& diag) {
  std::string text;
  MicrogridConfig cfg;
  try {
    text = slurp(options.model_path);
    cfg = MicrogridConfig::from_json_text(text);
  } catch (const std::exception& e) {
    diag << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const DaeSystem base = microgrid_build(cfg);
    const Vec& xeq = base.equilibrium().x;
    const Vec& yeq = base.equilibrium().y;
    const DaeDynamics base_shifted = shift_dynamics(base.dynamics(), xeq, yeq);

    const double dt = cfg.simulation.dt;
    const double xi = cfg.simulation.xi;
    const long steps_total = std::max<long>(1, std::lround(cfg.simulation.t_n / dt));

    std::vector<Phase> phases;
    if (cfg.disturbance) {
      const Disturbance& d = *cfg.disturbance;
      // Event times snap to the integration grid.
      long k_event = std::lround(d.time / dt);
      k_event = std::max<long>(0, std::min(k_event, steps_total));
      long k_clear = d.clear_after > 0.0 ? k_event + std::lround(d.clear_after / dt) : steps_total;
      k_clear = std::max(k_event, std::min(k_clear, steps_total));

      const MicrogridConfig disturbed = cfg.with_branch_scaled(d.branch, d.scale);
      const DaeDynamics disturbed_shifted =
          shift_dynamics(microgrid_dynamics(disturbed), xeq, yeq);
      phases.push_back({base_shifted, k_event});
      phases.push_back({disturbed_shifted, k_clear - k_event});
      phases.push_back({base_shifted, steps_total - k_clear});
    } else {
      phases.push_back({base_shifted, steps_total});
    }

    std::vector<double> times;
    std::vector<Vec> states;
    times.reserve(steps_total + 1);
    states.reserve(steps_total + 1);

    Vec x = Vec::Zero(base.n());
    Vec y = Vec::Zero(base.m());
    long k0 = 0;  // global step index of the current phase start
    bool converged = true;
    double final_norm = 0.0;
    for (const Phase& phase : phases) {
      if (phase.steps <= 0) continue;
      const Trajectory tr =
          integrate_raw(phase.dyn, x, y, dt, static_cast<double>(phase.steps) * dt, xi);
      const std::size_t first = times.empty() ? 0 : 1;  // phase boundary sample is shared
      for (std::size_t i = first; i < tr.samples.size(); ++i) {
        times.push_back(static_cast<double>(k0 + static_cast<long>(i)) * dt);
        states.push_back(tr.samples[i] + xeq);
      }
      x = tr.samples.back();
      if (base.m() > 0) y = solve_algebraic(phase.dyn, x, y);
      k0 += phase.steps;
      converged = tr.converged;
      final_norm = tr.final_norm;
    }

    auto out = open_output(options.out_path);
    out << csv_header_line(fnv1a64(text), options.seed);
    write_trajectory_csv(out, times, states);
    if (!out) throw ConfigError("write to '" + options.out_path + "' failed");

    diag << "simulate: " << times.size() << " samples, t = [0, "
         << format_double(times.back()) << "], dt = " << format_double(dt) << '\n';
    diag << "simulate: final deviation " << format_double(final_norm) << " (xi = "
         << format_double(xi) << "), " << (converged ? "converged" : "NOT converged") << '\n';
    diag << "simulate: wrote " << options.out_path << '\n';
    return kExitOk;
  } catch (const TrajectoryDiverged& e) {
    diag << "trajectory diverged at t = " << e.time << ": " << e.what() << '\n';
    return kExitDiverged;
  } catch (const TrajectoryAborted& e) {
    diag << "trajectory aborted at t = " << e.time << ": " << e.what() << '\n';
    return kExitDiverged;
  } catch (const ConfigError& e) {
    diag << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ModelInfeasible& e) {
    diag << "model infeasible: " << e.what() << '\n';
    return kExitConfig;
  }
}

// ---- assess -------------------------------------------------------------------

int cmd_assess(const AssessOptions& options, std::ostream& diag) {
  std::string model_text;
  std::string assess_text;
  AssessmentConfig cfg;
  try {
    model_text = slurp(options.model_path);
    assess_text = slurp(options.assess_path);
    cfg = AssessmentConfig::from_json_text(assess_text);
    if (options.steps_override >= 0) cfg.max_steps = options.steps_override;
    if (options.delta_override > 0.0) cfg.delta = options.delta_override;
    cfg.validate();
  } catch (const std::exception& e) {
    diag << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const DaeSystem base = build_model(model_text);
    const DaeSystem shifted = shift_to_origin(base);

    const std::uint64_t hash = fnv1a64(model_text + "\n" + assess_text);
    const std::filesystem::path dir(options.out_dir);
    std::filesystem::create_directories(dir);

    AssessmentResult result = [&] {
      if (options.resume_path.empty()) return run_assessment(shifted, cfg);
      Snapshot snap = load_snapshot(options.resume_path);
      diag << "resuming from step " << snap.state.step() << " (" << options.resume_path
           << ")\n";
      return resume_assessment(shifted, cfg, std::move(snap.state), std::move(snap.excluded));
    }();

    for (const RoaEstimate& est : result.estimates) {
      char name[48];
      std::snprintf(name, sizeof(name), "roa_step_%04lld.csv",
                    static_cast<long long>(est.step));
      auto out = open_output(dir / name);
      out << csv_header_line(hash, options.seed);
      write_roa_csv(out, est);
      std::int64_t members = 0;
      for (const RoaCell& cell : est.cells) members += cell.member ? 1 : 0;
      diag << "step " << est.step << ": v_hat_max = " << format_double(est.v_hat_max)
           << ", members = " << members << "/" << est.cells.size() << '\n';
    }

    {
      auto out = open_output(dir / "assessment_log.csv");
      out << csv_header_line(hash, options.seed);
      write_log_csv(out, result.log, shifted.n());
    }
    save_snapshot((dir / "window_state.json").string(), result.final_state, result.excluded);

    diag << "assess: window at step " << result.final_state.step() << ", outputs in "
         << dir.string() << '\n';
    return kExitOk;
  } catch (const UnstableEquilibrium& e) {
    diag << "unstable equilibrium: " << e.what() << '\n';
    return kExitUnstable;
  } catch (const ConfigError& e) {
    diag << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ModelInfeasible& e) {
    diag << "model infeasible: " << e.what() << '\n';
    return kExitConfig;
  }
}

// ---- validate ------------------------------------------------------------------

int cmd_validate(const ValidateOptions& options, std::ostream& diag) {
  int failures = 0;
  auto report = [&](const char* check, bool ok, const std::string& detail) {
    diag << "check " << check << (ok ? "  PASS  " : "  FAIL  ") << detail << '\n';
    if (!ok) ++failures;
  };

  try {
    const std::string text = slurp(options.model_path);
    const DaeSystem system = build_model(text);
    std::ostringstream shape;
    shape << "n = " << system.n() << ", m = " << system.m();
    report("config     ", true, shape.str());

    const Vec& xeq = system.equilibrium().x;
    const Vec& yeq = system.equilibrium().y;
    const auto [f, g] = residual(system, xeq, yeq);
    const double fn = f.size() ? f.lpNorm<Eigen::Infinity>() : 0.0;
    const double gn = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
    {
      std::ostringstream d;
      d << "|f|_inf = " << format_double(fn) << ", |g|_inf = " << format_double(gn)
        << " (tol 1e-8)";
      report("equilibrium", fn <= 1e-8 && gn <= 1e-8, d.str());
    }

    const JacobianBlocks jb = jacobians(system.dynamics(), xeq, yeq);
    if (system.m() > 0) {
      Eigen::JacobiSVD<Mat> svd(jb.gy);
      const double ratio = svd.singularValues()(svd.singularValues().size() - 1) /
                           svd.singularValues()(0);
      std::ostringstream d;
      d << "smin/smax of dg/dy = " << format_double(ratio) << " (threshold 1e-10)";
      report("regularity ", ratio > 1e-10, d.str());
    } else {
      report("regularity ", true, "no algebraic block");
    }

    const ReducedJacobian red = reduced_matrix(system.dynamics(), xeq, yeq);
    const double abscissa = spectral_abscissa(red.a);
    {
      std::ostringstream d;
      d << "max Re(lambda) = " << format_double(abscissa);
      report("hurwitz    ", abscissa < -1e-9, d.str());
    }
  } catch (const std::exception& e) {
    report("config     ", false, e.what());
  }

  if (failures > 0) {
    diag << failures << " check(s) failed\n";
    return kExitValidation;
  }
  diag << "all checks passed\n";
  return kExitOk;
}

}  // namespace roagp
