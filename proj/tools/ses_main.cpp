#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ses/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"socioeconomic status inference pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  const std::vector<std::string> subcommands = {"synth",  "preprocess", "homes",    "census-join",
                                                "occupations", "embed",  "topics",   "features",
                                                "train",  "evaluate",   "report"};
  for (const auto& name : subcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "pipeline config file (JSON)");
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_option("--set", overrides, "override a config key, e.g. --set cv.configs=20")
        ->take_all();
  }

  CLI11_PARSE(app, argc, argv);
  const std::string chosen = app.get_subcommands().front()->get_name();

  ses::cli::PipelineConfig config;
  try {
    config = ses::cli::load_config(config_path, overrides, seed);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return ses::cli::run_checked(chosen, config, std::cout);
}
