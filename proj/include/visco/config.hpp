#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "visco/dynamics.hpp"

namespace visco {

/// Post-processing settings shared by runs and families.
struct AnalysisConfig {
  std::vector<double> k_list = {1.0, 2.0, 4.0, 8.0, 16.0};
  double ball_radius = 0.0;  ///< <= 0 selects L/4
  double t0 = 0.0;
  double t1 = -1.0;          ///< < 0 selects t_end
  std::vector<double> cutoffs = {2.0, 4.0, 8.0};
};

struct RunConfig {
  int n = 64;
  double length = 2.0 * std::numbers::pi;
  ModelParams params;
  double dt = 1e-3;
  double t_end = 1.0;
  double cfl = kDefaultCfl;
  InitSpec init;
  int snapshot_every = 100;     ///< steps; 0 keeps only the first and last snapshot
  int diagnostics_every = 10;   ///< steps
  std::filesystem::path output_dir = "out";
  AnalysisConfig analysis;

  /// Number of steps to reach t_end; the last step is shortened if needed.
  long step_count() const;
  double window_end() const { return analysis.t1 < 0.0 ? t_end : analysis.t1; }

  /// Throws Error(ConfigError) on invalid values.
  void validate() const;
};

enum class SweepKind { Eta, Delta, Grid, Dt };

std::string to_string(SweepKind k);
/// Config key of the sweep, e.g. "sweep.eta_list".
std::string sweep_key(SweepKind k);

struct RunFamily {
  RunConfig base;
  SweepKind kind = SweepKind::Eta;
  std::vector<double> values;
  int workers = 0;  ///< 0: as many as the hardware allows

  /// Throws Error(InvalidFamily) for an empty or non-monotone list.
  void validate() const;
  /// One config per sweep value, writing into base.output_dir/run_<i>. For dt
  /// sweeps the output cadences are rescaled to keep the base snapshot times.
  std::vector<RunConfig> runs() const;
  /// Smallest eta, delta or dt; finest grid.
  std::size_t reference_index() const;
};

using ConfigMap = std::map<std::string, std::string>;

/// Parses "key=value" lines; '#' starts a comment. Throws Error(ConfigError) on
/// malformed lines and repeated keys.
ConfigMap parse_config(std::istream& in);
ConfigMap parse_config_file(const std::filesystem::path& path);

/// Every key must be known; sweep.* keys are rejected here.
RunConfig run_config_from(const ConfigMap& kv);
/// Exactly one sweep.* key is required.
RunFamily run_family_from(const ConfigMap& kv);

/// Key=value text that parses back to the same config.
std::string to_config_text(const RunConfig& cfg);

/// Comma-separated list of reals.
std::vector<double> parse_real_list(const std::string& key, const std::string& text);

}  // namespace visco
