#pragma once

#include <iosfwd>
#include <string>

#include "config.hpp"

namespace nowcast {

// Exit codes shared by the commands, the C API, and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitConvergence = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitInternal = 5;

// Each command is a pure function of (input files, config, seed): given the
// same inputs it writes byte-identical primary outputs. Wall-clock time and
// other environment facts only appear in the JSON sidecars.
int cmd_simulate(const KeyValueConfig& cfg, std::ostream& log);
int cmd_indicators(const KeyValueConfig& cfg, std::ostream& log);
int cmd_nowcast(const KeyValueConfig& cfg, std::ostream& log);
int cmd_evaluate(const KeyValueConfig& cfg, std::ostream& log);

// Dispatches by name and maps exceptions to exit codes (InputError -> 2,
// NumericError -> 4, anything else -> 5), logging the message.
int run_command(const std::string& name, const KeyValueConfig& cfg, std::ostream& log);

}  // namespace nowcast
