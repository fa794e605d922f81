#ifndef DIRACSOC_CLI_COMMANDS_HPP
#define DIRACSOC_CLI_COMMANDS_HPP

#include <filesystem>
#include <stdexcept>
#include <string>

#include "diracsoc/cli/config.hpp"

namespace diracsoc::cli {

enum ExitCode : int { exit_pass = 0, exit_failure = 1, exit_usage = 2, exit_blowup = 3 };

// Non-finite numbers where finite ones were expected; maps to exit code 3.
struct NumericalBlowup : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Each command runs its suite, writes <out>/<suite>.jsonl (+ .meta.json and
// any CSV artifacts) and returns 0 if every check passed, 1 otherwise.
int cmd_verify_clifford(const RunConfig& config, const std::string& command_line);
int cmd_verify_identity(const RunConfig& config, const std::string& command_line);
int cmd_dispersion(const RunConfig& config, const std::string& command_line);
int cmd_evolve(const RunConfig& config, const std::string& command_line);
int cmd_simulate(const RunConfig& config, const std::string& command_line);
// Aggregates every *.jsonl in out_dir into a summary; never recomputes.
int cmd_report(const std::filesystem::path& out_dir);

// argv entry point: `diracsoc <command> [--config PATH] [--out DIR] [--seed N]
// [--backend spectral|fd4] [--epsilon +1|-1] [--set key=value ...]`.
int run(int argc, char** argv);

}  // namespace diracsoc::cli

#endif  // DIRACSOC_CLI_COMMANDS_HPP
