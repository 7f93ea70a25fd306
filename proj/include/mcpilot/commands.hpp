#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mcpilot/harness.hpp"

namespace mcpilot {

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";
  bool no_delay_model = false;
  std::string baseline;  // "", "ballistic" or "mlp"
};

/// Config file (if any) plus command-line overrides. Unknown keys are
/// reported on `log`.
Settings load_settings(const CommandOptions& opts, std::ostream& log);

/// Subcommand names accepted by run_command.
const std::vector<std::string>& command_names();

/// Runs one subcommand; all artifacts go to opts.out. Returns an exit code.
int run_command(const std::string& name, const CommandOptions& opts, std::ostream& log);

}  // namespace mcpilot
