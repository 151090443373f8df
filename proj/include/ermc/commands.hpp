#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ermc/config.hpp"
#include "ermc/core.hpp"

namespace ermc {

enum ExitCode : int { kExitOk = 0, kExitAcceptance = 1, kExitConfig = 2, kExitIo = 3 };

// Command-line flags that take precedence over the config file.
struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void apply_overrides(RunConfig& cfg, const CliOverrides& o);

// Builds a problem from its config block, or from defaults when the block is absent.
std::unique_ptr<EstimationProblem> make_problem(const RunConfig& cfg, const std::string& name);

// Ten evenly spaced deviations up to twelve standard deviations of the mean of
// n uniforms, capped at 1/2.
std::vector<double> default_t_grid(std::size_t n);

int cmd_bound(const RunConfig& cfg, const std::string& out_dir, std::ostream& out);
int cmd_experiment(const RunConfig& cfg, const std::string& out_dir, std::ostream& out);
int cmd_verify(const RunConfig& cfg, const std::string& out_dir, std::ostream& out);
int cmd_mcdiarmid_sim(const RunConfig& cfg, const std::string& out_dir, std::ostream& out);

// Loads the config, applies overrides, runs the subcommand and maps errors
// to exit codes.
int run_command(const std::string& command, const std::string& config_path, const CliOverrides& overrides,
                std::ostream& out, std::ostream& err);

}  // namespace ermc
