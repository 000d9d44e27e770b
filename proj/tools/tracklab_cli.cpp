#include <iostream>

#include "CLI11.hpp"
#include "tracklab/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tracklab: tracking-type optimal control experiments"};
  app.require_subcommand(1);

  std::string run_config;
  std::uint64_t seed = 0;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run the experiment described by a scenario file");
  run->add_option("config", run_config, "Scenario JSON file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  auto* out_opt = run->add_option("--out", out_dir, "Override the output directory");

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check a scenario file without running it");
  validate->add_option("config", validate_config, "Scenario JSON file")->required();

  auto* list_maps = app.add_subcommand("list-maps", "List the available control-to-state maps");
  auto* list_experiments = app.add_subcommand("list-experiments", "List the available experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) {
    tracklab::RunOverrides overrides;
    if (*seed_opt) overrides.seed = seed;
    if (*out_opt) overrides.output = out_dir;
    return tracklab::run_scenario(run_config, overrides);
  }
  if (*validate) return tracklab::validate_scenario(validate_config);
  if (*list_maps) {
    for (const auto& n : tracklab::map_names()) std::cout << n << '\n';
    return 0;
  }
  if (*list_experiments) {
    for (const auto& n : tracklab::experiment_names()) std::cout << n << '\n';
    return 0;
  }
  return 0;
}
