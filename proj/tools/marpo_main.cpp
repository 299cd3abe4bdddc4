/// @file marpo_main.cpp
/// @brief Command-line tool: forward, picard, tangent, identify, galerkin
/// and check subcommands over a flat key=value configuration.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "marpo/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"marpo - PO4-DOP marine phosphorus column model"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --config follow the subcommand

  std::string config_path;
  app.add_option("-c,--config", config_path, "run configuration file")
      ->required();

  marpo::CommandFlags flags;

  CLI::App* forward = app.add_subcommand(
      "forward", "nonlinear forward run: snapshots + diagnostics CSV");
  CLI::App* picard = app.add_subcommand(
      "picard", "fixed-point iteration report (residuals, ratios, L_A)");

  CLI::App* tangent =
      app.add_subcommand("tangent", "tangent-linear solve for one parameter");
  tangent->add_option("--param", flags.param,
                      "one of lambda,alpha,K_P,K_I,K_W,beta,nu")
      ->required();
  tangent->add_flag("--fd-check", flags.fd_check,
                    "compare against central differences of forward solves");

  CLI::App* identify =
      app.add_subcommand("identify", "Gauss-Newton twin-experiment fit");
  identify->add_option("--obs", flags.obs_path, "observations CSV");
  identify->add_flag("--synth", flags.synth,
                     "synthesize observations from the configured parameters");
  identify->add_option("--sigma", flags.synth_sigma,
                       "noise level for --synth");
  identify->add_option("--seed", flags.seed, "noise seed");

  CLI::App* galerkin =
      app.add_subcommand("galerkin", "spectral oracle on a flat box");
  galerkin->add_option("--modes", flags.modes, "modes per direction")
      ->required();
  galerkin->add_flag("--compare", flags.compare,
                     "also run picard and emit the cross-method error CSV");

  CLI::App* check =
      app.add_subcommand("check", "seeded invariant suites, CSV results");
  check->add_option("--suite", flags.suite, "suite name or 'all'");
  check->add_option("--seed", flags.seed, "sample seed")->required();

  CLI11_PARSE(app, argc, argv);

  std::string command;
  for (CLI::App* sub : {forward, picard, tangent, identify, galerkin, check})
    if (sub->parsed()) command = sub->get_name();

  marpo::RunConfig cfg;
  try {
    cfg = marpo::parse_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return marpo::kExitConfigError;
  }
  return marpo::run_command(command, cfg, flags);
}
