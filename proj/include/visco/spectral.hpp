#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "visco/field.hpp"
#include "visco/grid.hpp"

namespace visco {

// ---------------------------------------------------------------------------
// Operators on spectra (r2c layout of a Grid2). Used by the solver, which keeps
// its state in Fourier space.

/// i k_axis f_hat, axis 1 or 2.
Spectrum deriv_hat(const Grid2& g, const Spectrum& f, int axis);
/// -|k|^2 f_hat.
Spectrum laplacian_hat(const Grid2& g, const Spectrum& f);
/// f_hat / |k|^2 with the mean mode set to zero, i.e. (-Delta)^{-1}.
Spectrum inv_laplacian_hat(const Grid2& g, const Spectrum& f);
/// Zero all modes outside the 2/3 mask, in place.
void dealias_hat(const Grid2& g, Spectrum& f);
/// Leray projection of (v1, v2) in place; the mean mode passes through.
void leray_hat(const Grid2& g, Spectrum& v1, Spectrum& v2);

// ---------------------------------------------------------------------------
// Physical-space operators.

ScalarField deriv(const ScalarField& f, int axis);
ScalarField laplacian(const ScalarField& f);
/// (-Delta)^{-1} f in the zero-mean gauge: laplacian(result) = -(f - mean f).
ScalarField inv_laplacian(const ScalarField& f);

VectorField2 leray_project(const VectorField2& v);

/// Component j is sum_i d_i F_ij.
VectorField2 div_matT(const MatrixField2& F);
/// Component i is sum_j d_j M_ij.
VectorField2 div_mat(const MatrixField2& M);
ScalarField div(const VectorField2& v);
/// d2 v1 - d1 v2.
ScalarField curl(const VectorField2& v);

VectorField2 grad(const ScalarField& f);
/// (grad u)_ij = d_j u_i.
MatrixField2 grad(const VectorField2& u);

template <std::size_t C>
Field<C> dealias(const Field<C>& f) {
  Field<C> out(f.grid());
  const Grid2& g = f.grid();
  for (std::size_t c = 0; c < C; ++c) {
    Spectrum s = g.forward(f.comp(c));
    dealias_hat(g, s);
    g.inverse(s, out.comp(c));
  }
  return out;
}

/// Spectral interpolation onto another grid of the same box. Modes beyond the
/// coarser Nyquist frequency, and the Nyquist modes themselves, are dropped.
std::vector<double> resample(std::span<const double> values, const Grid2& from, const Grid2& to);

template <std::size_t C>
Field<C> resample(const Field<C>& f, const Grid2& to) {
  if (f.grid().length() != to.length()) throw Error(Errc::GridMismatch, "resample: box lengths differ");
  Field<C> out(to);
  for (std::size_t c = 0; c < C; ++c) out.comp(c) = resample(f.comp(c), f.grid(), to);
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature and norms. Integrals use the grid rule h^2 sum, which is exact for
// resolved trigonometric polynomials.

template <std::size_t C>
double integral_sq(const Field<C>& f) {
  double s = 0.0;
  for (std::size_t c = 0; c < C; ++c)
    for (double v : f.comp(c)) s += v * v;
  const double h = f.grid().spacing();
  return s * h * h;
}

/// sqrt of the integral of the pointwise Euclidean/Frobenius norm squared.
template <std::size_t C>
double l2_norm(const Field<C>& f) {
  return std::sqrt(integral_sq(f));
}

/// max over points and components of |value|.
template <std::size_t C>
double linf_norm(const Field<C>& f) {
  double m = 0.0;
  for (std::size_t c = 0; c < C; ++c)
    for (double v : f.comp(c)) m = std::max(m, std::abs(v));
  return m;
}

double integral(const ScalarField& f);
double mean(const ScalarField& f);

/// Indicator of a periodic disk.
struct BallMask {
  double cx = 0.0, cy = 0.0;
  double radius = 0.0;
  ScalarField indicator;

  BallMask(const Grid2& grid, double cx, double cy, double radius);
  /// Disk of the given radius about the box center; radius <= 0 selects L/4.
  static BallMask centered(const Grid2& grid, double radius = 0.0);

  const Grid2& grid() const { return indicator.grid(); }
  /// Quadrature area h^2 * (number of interior points).
  double area() const;
  bool contains(std::size_t p) const { return indicator[p] != 0.0; }
};

/// f - mean(f) over the whole box.
ScalarField mean_zero(const ScalarField& f);
/// f - (average of f over the mask). The result is defined on the whole box.
ScalarField mean_zero(const ScalarField& f, const BallMask& mask);

struct TimedField {
  double t = 0.0;
  ScalarField f;
};

/// ||f||_{L^p(mask x (t0, t1))}: grid quadrature in space, trapezoid rule over
/// the snapshots with t in [t0, t1]. A lone snapshot gets unit time weight.
/// Throws Error(EmptyWindow) when no snapshot lies in the window.
double local_lp_norm(std::span<const TimedField> series, const BallMask& mask, double p, double t0, double t1);

/// Smooth radial bump exp(1 - 1/(1 - (r/a)^2)) for r < a, zero outside; value 1 at r = 0.
double smooth_bump(double r, double a);

}  // namespace visco
