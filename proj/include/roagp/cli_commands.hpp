#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "roagp/dae_system.hpp"

namespace roagp {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;       // unreadable/invalid configuration
inline constexpr int kExitDiverged = 3;     // trajectory left the finite range
inline constexpr int kExitUnstable = 4;     // equilibrium fails the Hurwitz screen
inline constexpr int kExitValidation = 5;   // validate found failing checks

// Builds a model from its JSON description. The "type" key selects the
// implementation: "microgrid" (full config), or the built-in test systems
// "scalar_linear" {rate, half_width}, "scalar_bistable" {half_width},
// "linear2d" {a: 2x2, half_width}. Returns the system in original
// coordinates (equilibrium wherever the model puts it).
DaeSystem build_model(const std::string& json_text);

struct SimulateOptions {
  std::string model_path;
  std::string out_path = "trajectory.csv";
  std::uint64_t seed = 0;
};

struct AssessOptions {
  std::string model_path;
  std::string assess_path;
  std::string out_dir = ".";
  int steps_override = -1;       // < 0 keeps the config value
  double delta_override = -1.0;  // <= 0 keeps the config value
  std::string resume_path;       // snapshot to continue from; empty = fresh run
  std::uint64_t seed = 0;
};

struct ValidateOptions {
  std::string model_path;
};

// Disturbance playback: integrates the configured microgrid through its
// branch event and writes the trajectory CSV (original coordinates).
int cmd_simulate(const SimulateOptions& options, std::ostream& diag);

// Full assessment run (or snapshot resume): writes one ROA CSV per emitted
// estimate, the attempt log, and the final window snapshot into out_dir.
int cmd_assess(const AssessOptions& options, std::ostream& diag);

// Model health report: config invariants, equilibrium residual, algebraic
// regularity, Hurwitz property. Prints one line per check.
int cmd_validate(const ValidateOptions& options, std::ostream& diag);

}  // namespace roagp
