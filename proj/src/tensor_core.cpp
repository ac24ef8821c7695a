#include "visco/tensor_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "visco/error.hpp"

namespace visco {

Mat2 StretchDecomp::reconstruct() const {
  const Mat2 d = Mat2::diag(lambda, 1.0 / lambda);
  return rotation.transpose() * d * rotation;
}

PiTriple pi_decompose(const Mat2& F) {
  // rows of F are the columns of F^T
  const Vec2 r1 = F.row1(), r2 = F.row2();
  const double n1 = r1.norm_sq(), n2 = r2.norm_sq();
  return {0.5 * (n1 + n2), 0.5 * (n1 - n2), r1.dot(r2)};
}

Mat2 hopf_traceless(const Mat2& F) {
  const PiTriple p = pi_decompose(F);
  return {p.pi2, p.pi3, p.pi3, -p.pi2};
}

double truncate_tk(double z, double k) { return std::min(z, k); }

double truncate_tk_derivative(double z, double k) { return z < k ? 1.0 : 0.0; }

BoundPair frobenius_bound(const Mat2& F) {
  const Vec2 c1 = F.col1(), c2 = F.col2();
  const double rhs = kFrobeniusBoundConstant *
                     (std::abs(c1.norm_sq() - c2.norm_sq()) + std::abs(c1.dot(c2)) + std::abs(F.det()));
  return {F.frob_sq(), rhs};
}

BoundPair perturbation_bound(const Mat2& E) {
  const double d = E.a11 - E.a22;
  const double s = E.a12 + E.a21;
  return {E.frob_sq(), kPerturbationBoundConstant * (d * d + s * s + std::abs(E.det()))};
}

namespace {

// Unit eigenvector of the symmetric matrix tau for eigenvalue ev, normalized so
// that its first nonzero component is positive.
Vec2 unit_eigenvector(const Mat2& tau, double ev) {
  // (tau - ev I) v = 0; pick the better conditioned of the two row equations.
  const double a = tau.a11 - ev, b = tau.a12, d = tau.a22 - ev;
  Vec2 v;
  if (std::abs(a) + std::abs(b) >= std::abs(b) + std::abs(d)) {
    v = {-b, a};
  } else {
    v = {d, -b};
  }
  const double nrm = std::sqrt(v.norm_sq());
  v.x /= nrm;
  v.y /= nrm;
  constexpr double tiny = 1e-300;
  if (v.x < -tiny || (std::abs(v.x) <= tiny && v.y < 0.0)) {
    v.x = -v.x;
    v.y = -v.y;
  }
  return v;
}

}  // namespace

StretchDecomp eigen_stretch(const Mat2& tau, double tol_det) {
  const double mean = 0.5 * tau.trace();
  const double half_gap = std::hypot(0.5 * (tau.a11 - tau.a22), 0.5 * (tau.a12 + tau.a21));
  const double lo = mean - half_gap;
  const double hi = mean + half_gap;
  if (!(lo > 0.0)) {
    throw Error(Errc::NotSPD, "eigen_stretch: smallest eigenvalue " + std::to_string(lo) + " <= 0");
  }
  const double det = tau.det();
  if (std::abs(det - 1.0) > tol_det) {
    throw Error(Errc::DetOutOfGauge, "eigen_stretch: |det tau - 1| = " + std::to_string(std::abs(det - 1.0)));
  }

  StretchDecomp out;
  // within the det gauge lambda = 1/hi; lo itself loses digits to cancellation
  out.lambda = std::min(1.0, 1.0 / hi);
  if (half_gap <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, mean)) {
    out.rotation = Mat2::identity();
    return out;
  }
  const Vec2 v_hi = unit_eigenvector(tau, hi);
  Vec2 v_lo{-v_hi.y, v_hi.x};
  if (v_lo.x < 0.0 || (v_lo.x == 0.0 && v_lo.y < 0.0)) {
    v_lo = {-v_lo.x, -v_lo.y};
  }
  out.rotation = {v_lo.x, v_lo.y, v_hi.x, v_hi.y};
  return out;
}

PolarDecomp polar(const Mat2& F) {
  const double det = F.det();
  if (!(det > 0.0)) {
    throw Error(Errc::Singular, "polar: det F = " + std::to_string(det) + " <= 0");
  }
  // F + cof(F) is a positive multiple of the rotation factor in two dimensions.
  const Mat2 s = F + F.cofactor();
  const double scale = std::hypot(s.a11, s.a21);
  PolarDecomp out;
  out.R = s * (1.0 / scale);
  Mat2 U = out.R.transpose() * F;
  const double off = 0.5 * (U.a12 + U.a21);
  U.a12 = off;
  U.a21 = off;
  out.U = U;
  return out;
}

}  // namespace visco
