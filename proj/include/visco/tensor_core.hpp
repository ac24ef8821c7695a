#pragma once

// Pointwise 2x2 matrix algebra used throughout the solver and diagnostics.
// Everything here is a pure function on value types.

#include <algorithm>
#include <array>
#include <cmath>

namespace visco {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm_sq() const { return x * x + y * y; }
};

struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
  static Mat2 rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c, -s, s, c};
  }

  double det() const { return a11 * a22 - a12 * a21; }
  double trace() const { return a11 + a22; }
  double frob_sq() const { return a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22; }
  double frob() const { return std::sqrt(frob_sq()); }

  Vec2 row1() const { return {a11, a12}; }
  Vec2 row2() const { return {a21, a22}; }
  Vec2 col1() const { return {a11, a21}; }
  Vec2 col2() const { return {a12, a22}; }

  Mat2 transpose() const { return {a11, a21, a12, a22}; }

  /// det(F) F^{-T}; for det F > 0 this is the cofactor matrix.
  Mat2 cofactor() const { return {a22, -a21, -a12, a11}; }

  Mat2 operator+(const Mat2& o) const { return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22}; }
  Mat2 operator-(const Mat2& o) const { return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22}; }
  Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
  Mat2 operator*(const Mat2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }

  /// Frobenius inner product A:B.
  double ddot(const Mat2& o) const { return a11 * o.a11 + a12 * o.a12 + a21 * o.a21 + a22 * o.a22; }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

/// max-entry distance, used by tests and tolerance checks
inline double max_abs_diff(const Mat2& a, const Mat2& b) {
  return std::max({std::abs(a.a11 - b.a11), std::abs(a.a12 - b.a12),
                   std::abs(a.a21 - b.a21), std::abs(a.a22 - b.a22)});
}

/// Components of tau = F F^T split into trace part pi1 and traceless part (pi2, pi3):
///   tau11 = pi1 + pi2, tau22 = pi1 - pi2, tau12 = tau21 = pi3.
struct PiTriple {
  double pi1 = 0.0, pi2 = 0.0, pi3 = 0.0;

  Mat2 assemble_tau() const { return {pi1 + pi2, pi3, pi3, pi1 - pi2}; }
};

struct StretchDecomp {
  Mat2 rotation;       ///< rows are unit eigenvectors of tau
  double lambda = 1.0;  ///< the eigenvalue <= 1; the other one is 1/lambda

  /// rotation^T diag(lambda, 1/lambda) rotation
  Mat2 reconstruct() const;
};

struct PolarDecomp {
  Mat2 R;
  Mat2 U;
};

struct BoundPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Constant of the column inequality |F|^2 <= C(||F1|^2-|F2|^2| + |F1.F2| + |det F|):
/// the largest of the three case constants 5/3, 8 and 2*sqrt(3).
inline constexpr double kFrobeniusBoundConstant = 8.0;

/// Constant of |E|^2 <= C(|E11-E22|^2 + |E12+E21|^2 + |det E|), certified by brute force.
inline constexpr double kPerturbationBoundConstant = 16.0;

/// Default tolerance on |det tau - 1| accepted by eigen_stretch.
inline constexpr double kDefaultDetTolerance = 1e-6;

PiTriple pi_decompose(const Mat2& F);

/// Traceless part of F F^T, i.e. [[pi2, pi3], [pi3, -pi2]].
Mat2 hopf_traceless(const Mat2& F);

/// T_k(z) = min(z, k), the piecewise-linear truncation.
double truncate_tk(double z, double k);

/// Derivative of T_k, taken as 0 at the kink z == k.
double truncate_tk_derivative(double z, double k);

BoundPair frobenius_bound(const Mat2& F);

BoundPair perturbation_bound(const Mat2& E);

/// Throws Error(NotSPD) or Error(DetOutOfGauge).
StretchDecomp eigen_stretch(const Mat2& tau, double tol_det = kDefaultDetTolerance);

/// F = R U with R orthogonal and U symmetric positive definite. Throws Error(Singular)
/// when det F <= 0.
PolarDecomp polar(const Mat2& F);

}  // namespace visco
