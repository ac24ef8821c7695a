#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "visco/error.hpp"
#include "visco/tensor_core.hpp"

using namespace visco;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Mat2 random_mat(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return {d(rng), d(rng), d(rng), d(rng)};
}

// shear * diag(s, 1/s) * rotation, always unimodular
Mat2 random_unimodular(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> sh(-3.0, 3.0), st(0.2, 5.0), th(0.0, 2.0 * std::numbers::pi);
  const Mat2 shear{1.0, sh(rng), 0.0, 1.0};
  const double s = st(rng);
  return shear * Mat2::diag(s, 1.0 / s) * Mat2::rotation(th(rng));
}

}  // namespace

TEST(PiDecompose, Identity) {
  const PiTriple p = pi_decompose(Mat2::identity());
  EXPECT_DOUBLE_EQ(p.pi1, 1.0);
  EXPECT_DOUBLE_EQ(p.pi2, 0.0);
  EXPECT_DOUBLE_EQ(p.pi3, 0.0);
}

TEST(PiDecompose, DiagonalStretch) {
  // rows (2, 0) and (0, 0.5): |r1|^2 = 4, |r2|^2 = 0.25
  const PiTriple p = pi_decompose(Mat2::diag(2.0, 0.5));
  EXPECT_DOUBLE_EQ(p.pi1, 0.5 * (4.0 + 0.25));
  EXPECT_DOUBLE_EQ(p.pi2, 0.5 * (4.0 - 0.25));
  EXPECT_DOUBLE_EQ(p.pi3, 0.0);
}

TEST(PiDecompose, UnitShearUsesRows) {
  // rows (1, 1) and (0, 1): norms 2 and 1, dot 1
  const PiTriple p = pi_decompose({1.0, 1.0, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(p.pi1, 1.5);
  EXPECT_DOUBLE_EQ(p.pi2, 0.5);
  EXPECT_DOUBLE_EQ(p.pi3, 1.0);
}

TEST(PiDecompose, ReassemblesTauOnRandomMatrices) {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 100000; ++it) {
    const Mat2 F = random_mat(rng, -10.0, 10.0);
    const Mat2 tau = F * F.transpose();
    const Mat2 back = pi_decompose(F).assemble_tau();
    ASSERT_LE(max_abs_diff(tau, back), 4.0 * kEps * tau.frob());
  }
}

TEST(PiDecompose, UnimodularChain) {
  std::mt19937_64 rng(12);
  for (int it = 0; it < 20000; ++it) {
    const Mat2 F = random_unimodular(rng);
    const PiTriple p = pi_decompose(F);
    ASSERT_GE(p.pi1, 1.0 - 1e-12);
    const double det_tau = p.pi1 * p.pi1 - p.pi2 * p.pi2 - p.pi3 * p.pi3;
    ASSERT_NEAR(det_tau, 1.0, 1e-10 * p.pi1 * p.pi1);
  }
}

TEST(PiDecompose, PositiveSemidefinite) {
  std::mt19937_64 rng(13);
  for (int it = 0; it < 50000; ++it) {
    const PiTriple p = pi_decompose(random_mat(rng, -5.0, 5.0));
    ASSERT_GE(p.pi1, 0.0);
    ASSERT_GE(p.pi1 * p.pi1 * (1.0 + 1e-12), p.pi2 * p.pi2 + p.pi3 * p.pi3);
  }
}

TEST(HopfTraceless, KnownValues) {
  EXPECT_EQ(max_abs_diff(hopf_traceless(Mat2::identity()), Mat2{}), 0.0);
  const Mat2 h = hopf_traceless(Mat2::diag(2.0, 0.5));
  EXPECT_DOUBLE_EQ(h.a11, 1.875);
  EXPECT_DOUBLE_EQ(h.a22, -1.875);
  EXPECT_DOUBLE_EQ(h.a12, 0.0);
  for (double th : {0.3, 1.0, 2.5}) {
    EXPECT_LE(max_abs_diff(hopf_traceless(Mat2::rotation(th)), Mat2{}), 4.0 * kEps);
  }
}

TEST(HopfTraceless, SymmetricAndTracelessMatchesDefinition) {
  std::mt19937_64 rng(14);
  for (int it = 0; it < 20000; ++it) {
    const Mat2 F = random_mat(rng, -4.0, 4.0);
    const Mat2 h = hopf_traceless(F);
    const Mat2 tau = F * F.transpose();
    const Mat2 ref = tau - Mat2::identity() * (0.5 * tau.trace());
    ASSERT_EQ(h.a12, h.a21);
    ASSERT_EQ(h.trace(), 0.0);
    ASSERT_LE(max_abs_diff(h, ref), 8.0 * kEps * tau.frob());
  }
}

TEST(Truncation, Branches) {
  EXPECT_EQ(truncate_tk(3.0, 5.0), 3.0);
  EXPECT_EQ(truncate_tk(7.0, 5.0), 5.0);
  for (double k : {0.5, 1.0, 16.0}) EXPECT_EQ(truncate_tk(0.0, k), 0.0);
  EXPECT_EQ(truncate_tk_derivative(2.0, 3.0), 1.0);
  EXPECT_EQ(truncate_tk_derivative(3.0, 3.0), 0.0);
  EXPECT_EQ(truncate_tk_derivative(4.0, 3.0), 0.0);
}

TEST(Truncation, CubicPairInequality) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> z(0.0, 20.0), kk(0.1, 10.0);
  for (int it = 0; it < 200000; ++it) {
    const double a = z(rng), b = z(rng), k = kk(rng);
    const double d = truncate_tk(a, k) - truncate_tk(b, k);
    const double lhs = std::abs(d * d * d);
    const double rhs = (a * a - b * b) * d;
    ASSERT_LE(lhs, rhs + 1e-12 * (1.0 + std::abs(rhs)));
  }
}

TEST(Truncation, ConcaveMonotoneLipschitz) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> z(0.0, 10.0);
  for (int it = 0; it < 50000; ++it) {
    double a = z(rng), b = z(rng);
    if (a > b) std::swap(a, b);
    const double k = 3.0;
    ASSERT_LE(truncate_tk(a, k), truncate_tk(b, k));
    ASSERT_LE(truncate_tk(b, k) - truncate_tk(a, k), b - a + 1e-15);
    ASSERT_GE(truncate_tk(0.5 * (a + b), k), 0.5 * (truncate_tk(a, k) + truncate_tk(b, k)) - 1e-15);
  }
}

TEST(FrobeniusBound, KnownValues) {
  BoundPair b = frobenius_bound(Mat2::identity());
  EXPECT_DOUBLE_EQ(b.lhs, 2.0);
  EXPECT_DOUBLE_EQ(b.rhs, 8.0);
  b = frobenius_bound(Mat2::diag(2.0, 0.5));
  EXPECT_DOUBLE_EQ(b.lhs, 4.25);
  EXPECT_DOUBLE_EQ(b.rhs, 38.0);
}

TEST(FrobeniusBound, RandomSweepHolds) {
  std::mt19937_64 rng(17);
  for (int it = 0; it < 1000000; ++it) {
    const BoundPair b = frobenius_bound(random_mat(rng, -10.0, 10.0));
    ASSERT_LE(b.lhs, b.rhs * (1.0 + 1e-14));
  }
}

TEST(FrobeniusBound, DominantColumnCase) {
  std::mt19937_64 rng(18);
  int hits = 0;
  for (int it = 0; it < 200000; ++it) {
    const Mat2 F = random_mat(rng, -10.0, 10.0);
    const double n1 = F.col1().norm_sq(), n2 = F.col2().norm_sq();
    if (n1 < 4.0 * n2) continue;
    ++hits;
    ASSERT_LE(F.frob_sq(), (5.0 / 3.0) * (n1 - n2) * (1.0 + 1e-14));
  }
  EXPECT_GT(hits, 1000);
}

TEST(PerturbationBound, KnownValues) {
  BoundPair b = perturbation_bound(Mat2{});
  EXPECT_EQ(b.lhs, 0.0);
  EXPECT_EQ(b.rhs, 0.0);
  const double e = 0.01;
  b = perturbation_bound(Mat2::diag(e, -e));
  EXPECT_DOUBLE_EQ(b.lhs, 2.0 * e * e);
  EXPECT_DOUBLE_EQ(b.rhs, kPerturbationBoundConstant * (4.0 * e * e + e * e));
}

TEST(PerturbationBound, RandomSweepHolds) {
  std::mt19937_64 rng(19);
  double worst = 0.0;  // largest lhs / (rhs / C) seen
  for (int it = 0; it < 1000000; ++it) {
    const BoundPair b = perturbation_bound(random_mat(rng, -1.0, 1.0));
    ASSERT_LE(b.lhs, b.rhs * (1.0 + 1e-14));
    if (b.rhs > 0.0) worst = std::max(worst, b.lhs / (b.rhs / kPerturbationBoundConstant));
  }
  // the smallest admissible constant is 2; the sweep should get close
  EXPECT_LE(worst, 2.0 + 1e-12);
  EXPECT_GT(worst, 1.9);
}

TEST(EigenStretch, Identity) {
  const StretchDecomp d = eigen_stretch(Mat2::identity());
  EXPECT_EQ(d.lambda, 1.0);
  EXPECT_EQ(max_abs_diff(d.rotation, Mat2::identity()), 0.0);
}

TEST(EigenStretch, Diagonal) {
  const StretchDecomp d = eigen_stretch(Mat2::diag(4.0, 0.25));
  EXPECT_DOUBLE_EQ(d.lambda, 0.25);
  EXPECT_LE(max_abs_diff(d.reconstruct(), Mat2::diag(4.0, 0.25)), 10.0 * kEps * 4.0);
}

TEST(EigenStretch, RotatedRoundTrip) {
  const double th = std::numbers::pi / 6.0;
  const Mat2 R = Mat2::rotation(th);
  const Mat2 tau = R.transpose() * Mat2::diag(1.0 / 9.0, 9.0) * R;
  const StretchDecomp d = eigen_stretch(tau);
  EXPECT_NEAR(d.lambda, 1.0 / 9.0, 1e-15);
  // rows agree with those of R up to sign
  EXPECT_NEAR(std::abs(d.rotation.row1().dot(R.row1())), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(d.rotation.row2().dot(R.row2())), 1.0, 1e-14);
  EXPECT_LE(max_abs_diff(d.reconstruct(), tau), 10.0 * kEps * tau.frob());
}

TEST(EigenStretch, RandomRoundTripAndOrthogonality) {
  std::mt19937_64 rng(20);
  for (int it = 0; it < 100000; ++it) {
    const Mat2 F = random_unimodular(rng);
    Mat2 tau = F * F.transpose();
    tau.a21 = tau.a12;
    if (std::abs(tau.det() - 1.0) > kDefaultDetTolerance) continue;
    const StretchDecomp d = eigen_stretch(tau);
    ASSERT_GT(d.lambda, 0.0);
    ASSERT_LE(d.lambda, 1.0);
    ASSERT_LE(max_abs_diff(d.rotation.transpose() * d.rotation, Mat2::identity()), 4.0 * kEps);
    ASSERT_LE(max_abs_diff(d.reconstruct(), tau), 10.0 * kEps * tau.frob());
    ASSERT_GE(d.rotation.a11 + (d.rotation.a11 == 0.0 ? d.rotation.a12 : 0.0), 0.0);
  }
}

TEST(EigenStretch, Errors) {
  try {
    eigen_stretch(Mat2::diag(2.0, -0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotSPD);
  }
  try {
    eigen_stretch(Mat2::diag(2.0, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DetOutOfGauge);
  }
}

TEST(Polar, KnownCases) {
  PolarDecomp d = polar(Mat2::identity());
  EXPECT_LE(max_abs_diff(d.R, Mat2::identity()), kEps);
  EXPECT_LE(max_abs_diff(d.U, Mat2::identity()), kEps);
  const Mat2 R = Mat2::rotation(0.7);
  d = polar(R);
  EXPECT_LE(max_abs_diff(d.R, R), 4.0 * kEps);
  EXPECT_LE(max_abs_diff(d.U, Mat2::identity()), 4.0 * kEps);
}

TEST(Polar, ShearRoundTrip) {
  const Mat2 F{1.0, 1.0, 0.0, 1.0};
  const PolarDecomp d = polar(F);
  EXPECT_LE(max_abs_diff(d.R * d.U, F), 1e-14);
  EXPECT_LE(max_abs_diff(d.U * d.U, F.transpose() * F), 1e-14);
  EXPECT_LE(max_abs_diff(d.R.transpose() * d.R, Mat2::identity()), 1e-15);
  EXPECT_GT(d.U.det(), 0.0);
  EXPECT_GT(d.U.a11, 0.0);
}

TEST(Polar, RandomRoundTrip) {
  std::mt19937_64 rng(21);
  for (int it = 0; it < 50000; ++it) {
    Mat2 F = random_mat(rng, -3.0, 3.0);
    if (F.det() <= 0.1) continue;
    const PolarDecomp d = polar(F);
    ASSERT_LE(max_abs_diff(d.R * d.U, F), 1e-13 * F.frob());
    ASSERT_LE(max_abs_diff(d.R.transpose() * d.R, Mat2::identity()), 1e-14);
    ASSERT_EQ(d.U.a12, d.U.a21);
    ASSERT_GT(d.U.trace(), 0.0);
    ASSERT_GT(d.U.det(), 0.0);
  }
}

TEST(Polar, RejectsNonPositiveDeterminant) {
  try {
    polar(Mat2::diag(1.0, -1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Singular);
  }
}
