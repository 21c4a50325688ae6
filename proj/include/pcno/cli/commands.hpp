#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcno/cli/run_config.hpp"

namespace pcno::cli {

struct RunContext
{
  std::filesystem::path out;
  int threads = 1;
};

/// Every command writes `config.snapshot` into the output directory; running
/// the same command from that snapshot reproduces its outputs byte for byte.
void cmd_generate(const RunConfig& cfg, const RunContext& ctx);
void cmd_project(const RunConfig& cfg, const RunContext& ctx);
void cmd_train(const RunConfig& cfg, const RunContext& ctx);
void cmd_rollout(const RunConfig& cfg, const RunContext& ctx);
void cmd_sample(const RunConfig& cfg, const RunContext& ctx);
void cmd_uncertainty(const RunConfig& cfg, const RunContext& ctx);
void cmd_evaluate(const RunConfig& cfg, const RunContext& ctx);

void run_command(const RunConfig& cfg, const RunContext& ctx);

/// --threads, else SPECPROJ_THREADS, else 1.
int resolve_threads(int flag_value);

/// Parses arguments (without the program name), runs the command and maps
/// errors to exit codes: 1 usage, 2 data or contract, 3 numerical.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace pcno::cli
