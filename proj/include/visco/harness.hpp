#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "visco/config.hpp"
#include "visco/diagnostics.hpp"
#include "visco/dynamics.hpp"
#include "visco/error.hpp"
#include "visco/spectral.hpp"

namespace visco {

// ---------------------------------------------------------------------------
// Single runs

/// Called with the initial state (step 0) and after every accepted step.
using StepObserver = std::function<void(const State&, long step)>;

/// Integrates cfg from init to t_end. Times are set to m * dt exactly and the
/// last step is shortened to land on t_end. Propagates CflViolation/NonFinite.
State integrate(const RunConfig& cfg, const StepObserver& observe = {});

/// Snapshots of one run held in memory, ordered by time.
struct RunSeries {
  RunConfig config;
  std::vector<State> snapshots;
};

/// Integrates and keeps the states at the snapshot cadence (first and last always).
RunSeries simulate(const RunConfig& cfg);

struct RunOutcome {
  long steps = 0;
  double t_final = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::filesystem::path> files;  ///< relative to output_dir
};

/// Writes config.txt, snapshots/snap_<step>.vel2 and diagnostics.csv under
/// cfg.output_dir.
RunOutcome run_simulation(const RunConfig& cfg);

/// Throws Error(MissingArtifacts) if the directory lacks config or snapshots.
RunSeries load_run(const std::filesystem::path& dir);

struct OracleComparison {
  double l2_diff = 0.0;       ///< ||F_pde - F_oracle||_L2 at t_end
  double l2_deviation = 0.0;  ///< ||F_pde - I||_L2 at t_end
  double linf_diff = 0.0;
};

/// Integrates cfg (which must start from F = I) and compares F(t_end) with the
/// Lagrangian flow map built from the velocity after every step.
OracleComparison compare_flow_map(const RunConfig& cfg, const FlowMapOptions& options = {});

// ---------------------------------------------------------------------------
// Families

/// Worker count: family.workers (0: hardware), capped by VISCO_THREADS and the run count.
int worker_count(const RunFamily& family);

struct RunRecord {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  RunOutcome outcome;
};

/// Runs every member concurrently, writes family.cfg and manifest.json under
/// family.base.output_dir. Failures are recorded and do not stop the family.
std::vector<RunRecord> run_family(const RunFamily& family);

/// Reads family.cfg from a family directory.
RunFamily load_family_config(const std::filesystem::path& root);

std::string sha256_hex(const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Convergence diagnostics. The weak limit is proxied by the reference run.

struct DefectReport {
  std::vector<double> k_list;
  std::vector<std::vector<double>> values;  ///< [run][k]: ||T_k|F| - T_k|F_ref|||^3_{L3(mask x window)}
  std::vector<double> sup;                  ///< max over k per run
  std::size_t reference = 0;
};

/// Every run is resampled spectrally to the reference grid and paired with the
/// reference snapshots at equal times. mask lives on the reference grid.
/// Throws GridMismatch, or EmptyWindow when no snapshot pair lies in [t0, t1].
DefectReport osc_defect(std::span<const RunSeries> runs, std::size_t reference, const BallMask& mask, double t0,
                        double t1, std::span<const double> k_list);

struct StrongConvTable {
  std::vector<double> parameters;
  std::vector<double> errors;  ///< ||F - F_ref||_{L2(mask x window)}; 0 for the reference
  double rate = 0.0;           ///< slope of log error against log parameter
  bool monotone = false;       ///< errors shrink from the farthest run towards the reference
  std::size_t reference = 0;
};

StrongConvTable strong_conv(std::span<const RunSeries> runs, std::span<const double> parameters,
                            std::size_t reference, const BallMask& mask, double t0, double t1);

/// Least-squares slope of log y against log x over entries with x, y > 0.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// C1 cubic smoothstep cutoff: 1 on [0, M/2], 0 on [M, inf).
struct CutoffFn {
  double cap = 1.0;

  double s(double r) const;
  double ds(double r) const;
  /// F s(|F|)
  Mat2 psi(const Mat2& F) const;
  /// |F|^2 s(|F|)
  double phi(const Mat2& F) const;
};

struct PairingReport {
  std::vector<double> caps;
  std::vector<double> matrix;         ///< int int G : psi(F)
  std::vector<double> scalar_direct;     ///< int int (-Delta)^{-1} div [grad P - div sigma] phi(F)
  std::vector<double> scalar_pressure;     ///< int int [P_a - Pi1 + (-Delta)^{-1}(...)] phi(F), raw gauge
  std::vector<double> scalar_pressure_gauged;  ///< same with the bracket replaced by mean(B) - B
  double assembly_agreement = 0.0;    ///< max_t ||A - (mean B - B)||_L2 / ||A||_L2, 0 when A = 0
};

/// Integrals over mask x [t0, t1], trapezoid in time. Throws EmptyWindow.
PairingReport flux_pairing(const RunSeries& run, std::span<const CutoffFn> cutoffs, const BallMask& mask, double t0,
                           double t1);

/// Trapezoid rule over (t, value) samples; a lone sample gets unit weight.
double time_integral(std::span<const std::pair<double, double>> samples);

}  // namespace visco
