#ifndef CAVTOOL_COMMANDS_HPP
#define CAVTOOL_COMMANDS_HPP

#include <cstdint>
#include <filesystem>

namespace cavtool::cli {

struct CommandContext {
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
};

// Each command returns the process exit code: 0 on success, 3 when a fit did
// not converge (outputs are still written). Config problems surface as
// std::runtime_error / std::invalid_argument, infeasible physics as the
// typed errors; main maps both to exit codes.
int run_stack(const CommandContext& context);
int run_dispersion(const CommandContext& context);
int run_fit(const CommandContext& context);
int run_report(const CommandContext& context);
int run_beta_scan(const CommandContext& context);
int run_synth(const CommandContext& context);

}  // namespace cavtool::cli

#endif  // CAVTOOL_COMMANDS_HPP
