// Scenario-driven front end: swnet <command> <scenario.json> [--out DIR] [--seed N] [--threads K]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "swnet/error.hpp"
#include "swnet/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Switched network scheduling toolkit"};
  app.require_subcommand(1);

  std::string scenario;
  swnet::CliOverrides ov;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t threads = 0;

  for (const char* name : {"analyze", "simulate", "fluid", "lift", "collapse", "iqcheck"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " scenario");
    sub->add_option("scenario", scenario, "scenario JSON file, or - for stdin")->required();
    sub->add_option("--out", out, "output directory (overrides the file)");
    sub->add_option("--seed", seed, "master seed (overrides the file)");
    sub->add_option("--threads", threads, "worker threads (default: SWNET_THREADS, then all cores)")
        ->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);

  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--out")) ov.out = out;
  if (sub->count("--seed")) ov.seed = seed;
  if (sub->count("--threads")) ov.threads = threads;

  try {
    const swnet::ScenarioConfig cfg = swnet::parse_scenario(scenario, ov);
    if (swnet::to_string(cfg.experiment.kind) != sub->get_name()) {
      std::cerr << "error: scenario declares experiment '" << swnet::to_string(cfg.experiment.kind)
                << "' but the command is '" << sub->get_name() << "'\n";
      return 1;
    }
    const int status = swnet::execute(cfg, std::cout);
    std::cout << "outputs written to " << cfg.out << "\n";
    return status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
