#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "ermc/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ermc: concentration bounds and Monte Carlo checks for empirical risk minimizers"};
  app.set_version_flag("--version", std::string(ERMC_VERSION));
  app.require_subcommand(1);

  std::string config;
  ermc::CliOverrides o;
  std::string out;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  const std::pair<const char*, const char*> commands[] = {
      {"bound", "tabulate the concentration bound over n and delta"},
      {"experiment", "Monte Carlo rate experiment for one problem"},
      {"verify", "check the assumption inequalities of each problem"},
      {"mcdiarmid-sim", "simulate bounded-difference tails against their bounds"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "INI config file")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "base seed (overrides the config)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ermc::kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  if (sub->count("--out")) o.out = out;
  if (sub->count("--seed")) o.seed = seed;
  if (sub->count("--threads")) o.threads = threads;
  return ermc::run_command(sub->get_name(), config, o, std::cout, std::cerr);
}
