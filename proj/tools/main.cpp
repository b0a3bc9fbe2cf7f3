#include <cstdint>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"
#include "condreg/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"condreg: conductivity reconstruction experiments"};
  app.require_subcommand(1);
  std::string config_path;
  condreg::cli::RunOptions options;
  std::uint64_t seed = 0;
  const std::map<std::string, std::string> help{
      {"mesh", "build a mesh and report its metrics"},
      {"forward", "boundary map of a phantom conductivity"},
      {"noise", "perturb a stored operator to an exact distance"},
      {"reconstruct", "regularised reconstruction from noisy data"},
      {"converge", "reconstructions along a decreasing noise sequence"},
      {"homogenize", "boundary-map distance of microstructures to their homogenized limit"},
      {"recover-check", "recovery construction errors under refinement"},
      {"at-check", "Ambrosio-Tortorelli recovery energies and compactness"},
      {"estimate-beta", "empirical stability exponent of the forward map"},
  };
  for (const std::string& name : condreg::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "key = value configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", options.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--jobs", options.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed")) options.seed = seed;
  try {
    auto config = condreg::cli::Config::load(config_path);
    condreg::cli::run_command(chosen->get_name(), config, options);
  } catch (const condreg::InvalidInput& e) {
    std::cerr << "condreg " << chosen->get_name() << ": " << e.what() << '\n';
    return 2;
  } catch (const condreg::NumericalFailure& e) {
    std::cerr << "condreg " << chosen->get_name() << ": numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "condreg " << chosen->get_name() << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
