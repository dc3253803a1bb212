#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "npfb/config.hpp"
#include "npfb/field.hpp"
#include "npfb/reports.hpp"

namespace npfb {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitInstability = 4,
};

struct CommandOptions {
  std::optional<std::string> config_path;
  /// section.key -> value from command-line flags; wins over env and file.
  std::map<std::string, std::string> overrides;
  std::vector<std::string> checks;
  std::optional<std::string> field_path;  ///< analyze: dump to read
  bool mutate_omega = false;              ///< verify-barriers self-test
  std::ostream* log = nullptr;            ///< progress lines; null for silence
};

/// Names accepted by --checks.
const std::vector<std::string>& available_checks();

struct CheckOutcome {
  std::string name;
  bool passed = false;
  Json report;
  std::vector<std::string> files;  ///< written, relative to out_dir
};

/// Runs one named check on a solved field at cfg.analysis_level and writes
/// its report (and CSV tables) into out_dir. Returns the outcome; the caller
/// adds the files to its manifest.
CheckOutcome run_check(const std::string& name, const Field& field, const ProblemConfig& cfg,
                       const std::string& out_dir);

int cmd_solve(const CommandOptions& opts);
int cmd_analyze(const CommandOptions& opts);
int cmd_verify_barriers(const CommandOptions& opts);
int cmd_sweep(const CommandOptions& opts);

}  // namespace npfb
