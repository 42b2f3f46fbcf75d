#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "roagp/cli_commands.hpp"
#include "roagp/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"region-of-attraction estimation for DAE power-system models"};
  app.set_version_flag("--version", std::string("roagp ") + roagp::kVersion);
  app.require_subcommand(1);

  roagp::SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "integrate a configured disturbance");
  simulate->add_option("--model", sim.model_path, "microgrid model JSON")->required();
  simulate->add_option("--out", sim.out_path, "trajectory CSV path");
  simulate->add_option("--seed", sim.seed, "seed recorded in output headers");

  roagp::AssessOptions assess;
  CLI::App* assess_cmd = app.add_subcommand("assess", "run the sampling assessment loop");
  assess_cmd->add_option("--model", assess.model_path, "model JSON")->required();
  assess_cmd->add_option("--assess", assess.assess_path, "assessment config JSON")->required();
  assess_cmd->add_option("--out", assess.out_dir, "output directory");
  assess_cmd->add_option("--steps", assess.steps_override, "override max_steps");
  assess_cmd->add_option("--delta", assess.delta_override, "override confidence level");
  assess_cmd->add_option("--resume", assess.resume_path, "window snapshot to continue from");
  assess_cmd->add_option("--seed", assess.seed, "seed recorded in output headers");

  roagp::ValidateOptions val;
  CLI::App* validate = app.add_subcommand("validate", "check a model configuration");
  validate->add_option("--model", val.model_path, "model JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return roagp::cmd_simulate(sim, std::cout);
    if (assess_cmd->parsed()) return roagp::cmd_assess(assess, std::cout);
    if (validate->parsed()) return roagp::cmd_validate(val, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
