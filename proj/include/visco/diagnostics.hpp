#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "visco/dynamics.hpp"
#include "visco/spectral.hpp"

namespace visco {

// ---------------------------------------------------------------------------
// Energies

struct EnergyReport {
  double kinetic = 0.0;        ///< (1/2) int |u|^2
  double elastic = 0.0;        ///< (1/2) int |F-I|^2
  double delta_elastic = 0.0;  ///< (delta/2) int |F-I|^4
  /// int mu|grad u|^2 + eta|grad F|^2 + 2 delta eta (|F-I|^2 |grad F|^2 + |F-I|^2 |grad|F-I||^2)
  double dissipation_rate = 0.0;
  double dissipation_mu = 0.0;
  double dissipation_eta = 0.0;
  double dissipation_delta = 0.0;
  /// Exact d/dt of total(): the delta term of |F-I|^2|grad|F-I||^2 enters with
  /// weight 4 delta eta, and the stress work int grad u : (S - sigma) is added,
  /// with S = (G + 2 delta |G|^2 G) F^T the stress conjugate to the energy.
  double energy_rate = 0.0;

  double total() const { return kinetic + elastic + delta_elastic; }
};

EnergyReport energy_report(const State& state, const ModelParams& params);

// ---------------------------------------------------------------------------
// Constraints

struct ConstraintReport {
  double res_divFT = 0.0;       ///< ||div F^T||_L2
  double res_piola = 0.0;       ///< max_i ||F_l2 d_l F_i1 - F_l1 d_l F_i2||_L2
  double res_detF = 0.0;        ///< ||det F - 1||_L2
  double res_detF_linf = 0.0;   ///< ||det F - 1||_inf
  double moment_drift = 0.0;    ///< |int (F - I) - initial moment| (Frobenius)
  double tr_tau_min = 0.0;      ///< min tr(F F^T)
};

/// int (F - I) dx as a matrix.
Mat2 moment(const MatrixField2& F);

ConstraintReport constraint_residuals(const State& state, const Mat2& initial_moment = {});

// ---------------------------------------------------------------------------
// Pointwise identities

/// ||div(F F^T) - grad Pi1 - div [[Pi2, Pi3], [Pi3, -Pi2]]||_L2 where the left side
/// is assembled by the product rule from spectral derivatives of F and the right
/// side from spectral derivatives of the Pi fields. Round-off for resolved F.
double pi_identity_residual(const State& state);

/// ||dt tau + u.grad tau - grad u tau - tau grad u^T||_L2 with tau = F F^T, a
/// centered difference in time and spatial terms averaged over the two states.
/// Throws Error(WindowMismatch) unless next follows prev on the same grid.
double tau_evolution_residual(const State& prev, const State& next);

// ---------------------------------------------------------------------------
// Effective viscous flux

struct FluxSet {
  MatrixField2 G;
  ScalarField G1, G1_tilde, G1_hat, G2, G3;

  explicit FluxSet(const Grid2& g) : G(g), G1(g), G1_tilde(g), G1_hat(g), G2(g), G3(g) {}
};

/// Pi decomposition of the elastic stress of the given delta (delta = 0: F F^T).
struct PiFields {
  ScalarField pi1, pi2, pi3;
};
PiFields pi_fields(const MatrixField2& F, double delta = 0.0);

/// G = mu grad u - (-Delta)^{-1} grad P div sigma and the five scalar variants,
/// with sigma the elastic stress for params.delta. For mu = 1, delta = 0 these are
/// exactly the classical definitions.
FluxSet effective_flux(const State& state, const ModelParams& params = {});

/// Delta G - grad P(dt u + u.grad u) with dt u from rhs() (instantaneous).
MatrixField2 flux_identity_defect(const State& state, const ModelParams& params = {});
/// Same identity with dt u from a centered difference of prev and next.
MatrixField2 flux_identity_defect(const State& prev, const State& state, const State& next,
                                  const ModelParams& params = {});

/// L2 norms of the defects above.
double flux_identity_residual(const State& state, const ModelParams& params = {});
double flux_identity_residual(const State& prev, const State& state, const State& next,
                              const ModelParams& params = {});

/// Curl-free part of the stress balance and its rewriting in the Pi variables.
struct PressureForms {
  ScalarField A;  ///< (-Delta)^{-1} div [grad P - div sigma]
  ScalarField B;  ///< P_a - Pi1 + (-Delta)^{-1}[(d1^2 - d2^2) Pi2 + 2 d1 d2 Pi3]
};
/// A = -B + constant; P_a is the total pressure with its mask average removed.
PressureForms pressure_forms(const State& state, const BallMask& mask, const ModelParams& params = {});

// ---------------------------------------------------------------------------
// Renormalized transport

/// Pass as k for the untruncated b(F) = |F|.
inline constexpr double kNoTruncation = std::numeric_limits<double>::infinity();

/// L2 residual of dt T_k(|F|) + u.grad T_k(|F|) - grad u : F F^T T_k'(|F|)/|F| by a
/// centered difference between prev and next, excluding points within h of the
/// kink |F| = k in either state.
double renorm_residual(const State& prev, const State& next, double k);

// ---------------------------------------------------------------------------
// Space-time norms over snapshot series

struct IntegrabilityReport {
  double norm_F_L3 = 0.0;
  double norm_trtau_L32 = 0.0;
  double norm_Pa_L32 = 0.0;
  double norm_E_L4 = 0.0;
};

IntegrabilityReport integrability_report(std::span<const State> snapshots, const BallMask& mask, double t0,
                                         double t1, const ModelParams& params = {});

struct PerturbationReport {
  double linf_E = 0.0;
  double linf_E11mE22 = 0.0;
  double linf_E12pE21 = 0.0;
  double bound_margin = 0.0;  ///< min over the grid of rhs - lhs of perturbation_bound
};

PerturbationReport perturbation_report(const State& state);

struct DetFUniformReport {
  double sup_L2_detF_minus_1 = 0.0;
  double sqrt_eta_gradL2 = 0.0;
};

/// Throws Error(EmptyWindow) for an empty series.
DetFUniformReport detf_uniform_report(std::span<const State> snapshots, const ModelParams& params);

// ---------------------------------------------------------------------------
// Time series

struct DiagnosticsRecord {
  double t = 0.0;
  EnergyReport energy;
  ConstraintReport constraints;
  double flux_G = 0.0, flux_G1 = 0.0, flux_G1_tilde = 0.0, flux_G1_hat = 0.0, flux_G2 = 0.0, flux_G3 = 0.0;
  double perturb_linf_E11mE22 = 0.0, perturb_linf_E12pE21 = 0.0;
  std::vector<double> renorm;  ///< one per k; zero when no previous state was supplied
};

/// prev, when given, is the previous recorded state used for the renormalized residuals.
DiagnosticsRecord measure(const State& state, const ModelParams& params, const Mat2& initial_moment,
                          const State* prev, std::span<const double> k_list);

/// Fixed leading columns of the CSV time series.
const std::vector<std::string>& diagnostics_base_columns();
std::string renorm_column(double k);
std::vector<std::string> diagnostics_columns(std::span<const double> k_list);

/// One header line plus one row per record, values printed with 17 significant digits.
void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticsRecord> rows, std::span<const double> k_list);

struct DiagnosticsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Throws Error(MissingArtifacts) when the column does not exist.
  std::size_t column(const std::string& name) const;
};

/// Throws Error(IoError) if the header deviates from the documented columns.
DiagnosticsTable read_diagnostics_csv(std::istream& in);
DiagnosticsTable read_diagnostics_csv(const std::filesystem::path& path);

/// Formats a double with 17 significant digits.
std::string format_g17(double v);

}  // namespace visco
