#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "npfb/grid.hpp"
#include "npfb/operator.hpp"
#include "npfb/perturbation.hpp"
#include "npfb/solver.hpp"

namespace npfb {

/// Everything a run needs. Section and key names follow the config file.
struct ProblemConfig {
  // [grid]
  int n = 2;
  double h = 1.0 / 128;
  std::array<int, kMaxDim> cells{128, 128, 128};
  std::vector<double> origin{0.0, 0.0, 0.0};
  double T = 0.5;
  double dt = 1.0 / 512;

  // [pde_core]
  double p = 2.0;
  BranchNormalization branch = BranchNormalization::consistent;

  // [perturbation]
  std::vector<double> eps{0.2, 0.1, 0.05};
  ZetaProfile profile = ZetaProfile::smooth_bump;
  std::string f = "1";
  double c0 = 1.0;
  double c1 = 1.0;
  double grad_bound = 0.0;
  std::string phi = "4.8*x2^2*(1-x2)^2*max(0, 1-4*x1)";
  std::string ramp = "min(t/0.1, 1)";

  // [solver]
  std::vector<double> delta{1e-2, 1e-3, 1e-4};
  double cfl_safety = 0.9;

  // [fb_analysis]
  double kappa = 4.0;
  std::vector<double> radii;          ///< empty: dyadic from 4h
  std::optional<double> t0;           ///< default T - dt
  double k_margin = 0.125;            ///< compact set K: parabolic distance >= k_margin
  std::size_t sample_budget = 2000000;
  double slack = 0.5;

  // [cli]
  std::string out_dir = "npfb-out";
  std::uint64_t seed = 0;
  int slice_stride = 64;              ///< checkpoint every stride-th level; 0: none
  std::string slice_format = "binary"; ///< binary or csv
  bool dump_all = false;              ///< full dump of every continuation run, not just the last

  // [sweep]
  std::vector<double> sweep_p{1.5, 2.0, 3.0};
  std::vector<double> sweep_eps{0.2, 0.1, 0.05};
  std::vector<double> sweep_h{1.0 / 64, 1.0 / 128};

  SpaceTimeGrid grid() const;
  /// Problem for one (eps, delta) pair of the schedules.
  Problem problem(double eps_value, double delta_value) const;
  ForcingSpec forcing() const;
  BoundaryDataSpec boundary() const;
  /// Slice analysed by default: t0 if given, else T - dt.
  int analysis_level(const SpaceTimeGrid& g) const;
  /// Checks p, schedules, grid and expressions; throws ConfigError.
  void validate() const;
  /// Stable key = value listing of every field, the input of the config hash.
  std::string canonical() const;
};

/// Config errors carry "file:line: message" when the line is known.
class ConfigFileError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Raw section.key -> (value, line) map of a config file.
struct ConfigEntries {
  std::string source;  ///< file name or "<string>"
  std::map<std::string, std::pair<std::string, int>> values;
};

ConfigEntries parse_config_text(const std::string& text, const std::string& source);
ConfigEntries read_config_file(const std::string& path);

/// Applies entries to cfg; unknown keys and bad values raise ConfigFileError
/// with the line. Entries with line 0 come from overrides and say so.
void apply_entries(ProblemConfig& cfg, const ConfigEntries& entries);

/// NPFB_<SECTION>_<KEY> environment overrides for every known key, upper-cased
/// with '-' replaced by '_'.
ConfigEntries environment_entries();

/// Every recognised section.key.
const std::vector<std::string>& known_keys();

/// File, then environment, then explicit overrides (flags), then validation.
ProblemConfig load_config(const std::optional<std::string>& path,
                          const std::map<std::string, std::string>& flag_overrides);

std::vector<double> parse_number_list(const std::string& text);

}  // namespace npfb
