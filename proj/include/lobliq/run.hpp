#pragma once

#include <string>
#include <vector>

#include "lobliq/config.hpp"
#include "lobliq/report.hpp"

namespace lobliq {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitNumerical = 3 };

/// Runs the configured command and returns its tables without touching disk.
std::vector<Table> compute_tables(const RunConfig& config);

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;             // empty on success
  std::vector<std::string> files;  // relative to output.dir, manifest last
};

/// Validates, computes every table, then writes tables and manifest.json.
/// Nothing is written unless every table was computed. Config and parameter
/// errors map to exit 2, numerical failures to 3, IO errors to 1.
RunOutcome run(const RunConfig& config);

}  // namespace lobliq
