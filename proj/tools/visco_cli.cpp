#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "visco/config.hpp"
#include "visco/error.hpp"
#include "visco/harness.hpp"
#include "visco/report.hpp"

using namespace visco;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitArtifacts = 4;

int exit_code(Errc code) {
  switch (code) {
    case Errc::NonFinite:
    case Errc::CflViolation:
    case Errc::ConstraintViolation:
      return kExitNumerical;
    case Errc::MissingArtifacts:
    case Errc::IoError:
      return kExitArtifacts;
    default:
      return kExitConfig;
  }
}

int cmd_run(const fs::path& config, const std::string& out_override) {
  RunConfig cfg = run_config_from(parse_config_file(config));
  if (!out_override.empty()) cfg.output_dir = out_override;
  const RunOutcome out = run_simulation(cfg);
  std::printf("run: %ld steps, t = %.17g, %.3f s, output %s\n", out.steps, out.t_final, out.wall_seconds,
              cfg.output_dir.string().c_str());
  return kExitOk;
}

int cmd_family(const fs::path& config, const std::string& out_override, bool report) {
  RunFamily family = run_family_from(parse_config_file(config));
  if (!out_override.empty()) family.base.output_dir = out_override;
  const auto records = run_family(family);
  int code = kExitOk;
  for (const auto& r : records) {
    if (r.ok) {
      std::printf("run_%zu: ok, %ld steps, %.3f s\n", r.index, r.outcome.steps, r.outcome.wall_seconds);
    } else {
      std::printf("run_%zu: failed: %s\n", r.index, r.error.c_str());
      code = kExitNumerical;
    }
  }
  if (report) std::printf("report: %s\n", write_report(family.base.output_dir).string().c_str());
  return code;
}

int cmd_analyze(const fs::path& root) {
  std::printf("report: %s\n", write_report(root).string().c_str());
  return kExitOk;
}

int cmd_oracle(const RunConfig& cfg, const FlowMapOptions& options) {
  const OracleComparison c = compare_flow_map(cfg, options);
  std::printf("n = %d, dt = %.3g, t = %.3g\n", cfg.n, cfg.dt, cfg.t_end);
  std::printf("||F_pde - F_oracle||_L2 = %.6e\n", c.l2_diff);
  std::printf("||F_pde - I||_L2        = %.6e\n", c.l2_deviation);
  std::printf("max |F_pde - F_oracle|  = %.6e\n", c.linf_diff);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized viscoelastic flow solver and convergence diagnostics"};
  app.require_subcommand(1);

  fs::path run_config, family_config, analyze_root;
  std::string run_out, family_out;
  bool no_report = false;

  auto* run = app.add_subcommand("run", "Integrate a single configuration");
  run->add_option("config", run_config, "key=value config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", run_out, "Override output_dir");

  auto* family = app.add_subcommand("family", "Run a parameter sweep and write the report");
  family->add_option("config", family_config, "key=value config file with one sweep.*_list")
      ->required()
      ->check(CLI::ExistingFile);
  family->add_option("-o,--output", family_out, "Override output_dir");
  family->add_flag("--no-report", no_report, "Skip the report bundle");

  auto* analyze = app.add_subcommand("analyze", "Regenerate the report of a family directory");
  analyze->add_option("dir", analyze_root, "Family output directory")->required();

  RunConfig oracle_cfg;
  oracle_cfg.n = 128;
  oracle_cfg.t_end = 0.1;
  oracle_cfg.init.variant = InitVariant::TaylorGreen;
  FlowMapOptions options;
  auto* oracle = app.add_subcommand("oracle", "Compare PDE-evolved F with the Lagrangian flow map");
  oracle->add_option("-n", oracle_cfg.n, "Grid size")->capture_default_str();
  oracle->add_option("--dt", oracle_cfg.dt, "Time step")->capture_default_str();
  oracle->add_option("-t,--time", oracle_cfg.t_end, "End time")->capture_default_str();
  oracle->add_option("--amplitude", oracle_cfg.init.amplitude, "Taylor-Green amplitude")->capture_default_str();
  oracle->add_option("--mu", oracle_cfg.params.mu, "Viscosity")->capture_default_str();
  oracle->add_option("--substeps", options.substeps, "RK4 steps per velocity interval")->capture_default_str();
  oracle->add_option("--refine", options.refine, "Spectral up-sampling before interpolation")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_config, run_out);
    if (*family) return cmd_family(family_config, family_out, !no_report);
    if (*analyze) return cmd_analyze(analyze_root);
    if (*oracle) return cmd_oracle(oracle_cfg, options);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArtifacts;
  }
  return kExitOk;
}
