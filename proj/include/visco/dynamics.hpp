#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "visco/field.hpp"
#include "visco/grid.hpp"

namespace visco {

struct ModelParams {
  double mu = 1.0;
  double eta = 0.0;
  double delta = 0.0;

  /// Throws Error(InvalidArgument) unless mu > 0, eta >= 0, delta >= 0.
  void validate() const;
};

struct State {
  double t = 0.0;
  VectorField2 u;
  MatrixField2 F;

  explicit State(const Grid2& grid) : u(grid), F(grid) {}
  const Grid2& grid() const { return u.grid(); }
};

enum class InitVariant { Equilibrium, TaylorGreen, WarmStart };

std::string to_string(InitVariant v);
/// Accepts "equilibrium", "taylor_green", "warm_start"; throws Error(ConfigError).
InitVariant parse_init_variant(const std::string& name);

struct InitSpec {
  InitVariant variant = InitVariant::Equilibrium;
  double amplitude = 1.0;  // taylor_green
  int modes = 1;           // taylor_green
  double stream_amplitude = 0.5;  // warm_start: max |u| of the prescribed flow
  double warm_time = 0.2;         // warm_start
  std::uint64_t seed = 0;
};

/// Initial state satisfying div u = 0, div F^T = 0 and det F = 1. For warm_start
/// the velocity is the prescribed flow that generated F. Throws
/// Error(ConstraintViolation) if warm_start cannot reach |det F - 1| <= 1e-6.
State init(const InitSpec& spec, const Grid2& grid);

/// Divergence-free velocity (-d2 psi, d1 psi) of a stream function.
VectorField2 velocity_from_stream(const ScalarField& psi);

/// I + [[-d2 phi1, -d2 phi2], [d1 phi1, d1 phi2]]: every column is divergence free,
/// so div F^T = 0 holds to round-off.
MatrixField2 curl_potential_F(const ScalarField& phi1, const ScalarField& phi2);

/// Random band-limited stream function with modes |m1|, |m2| <= max_mode.
ScalarField random_stream(const Grid2& grid, int max_mode, std::uint64_t seed);

/// F F^T + delta |F-I|^2 [(F-I) F^T + F (F-I)^T], dealiased.
MatrixField2 elastic_stress(const MatrixField2& F, double delta);

struct Rhs {
  VectorField2 du;
  MatrixField2 dF;
};

/// Time derivative of the regularized system with the pressure removed by
/// Leray projection. Nonlinear products are dealiased.
Rhs rhs(const State& state, const ModelParams& params);

inline constexpr double kDefaultCfl = 0.5;

/// Largest dt accepted by step() for this velocity.
double max_stable_dt(const State& state, double cfl = kDefaultCfl);

/// One integrating-factor SSP-RK3 step. Throws Error(CflViolation) when
/// dt > cfl h / max(1, |u|_inf) and Error(NonFinite) if the result is not finite.
State step(const State& state, double dt, const ModelParams& params, double cfl = kDefaultCfl);

/// dF/dt = -u.grad F + grad u F with u frozen, integrated by SSP-RK3 in n_steps.
MatrixField2 transport_F(const MatrixField2& F, const VectorField2& u, double duration, int n_steps);

struct Pressure {
  ScalarField P_hat;  ///< P - Pi1, zero mean
  ScalarField P;      ///< zero mean
};

/// Pressure for the elastic stress of the given delta; delta = 0 uses F F^T.
Pressure pressure(const State& state, double delta = 0.0);

struct VelocitySnapshot {
  double t = 0.0;
  VectorField2 u;
};

struct FlowMapOptions {
  int substeps = 4;  ///< RK4 steps per snapshot interval
  int refine = 1;    ///< spectral up-sampling factor applied before bilinear interpolation
};

/// Lagrangian estimate of F(t1) from F(t0) = I on the points of seed_grid: each seed
/// is traced back by RK4 through the velocity snapshots (bilinear in space, linear
/// in time) to its label A(y), and F = (grad A)^{-1} with centered differences.
/// Throws Error(EmptyWindow) if the snapshots do not cover [t0, t1].
MatrixField2 flow_map_oracle(std::span<const VelocitySnapshot> snapshots, double t0, double t1,
                             const Grid2& seed_grid, const FlowMapOptions& options = {});

/// Periodic bilinear interpolation of a sampled field at an arbitrary point.
double bilinear(const std::vector<double>& values, const Grid2& grid, double x1, double x2);

}  // namespace visco
