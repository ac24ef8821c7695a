#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "visco/error.hpp"
#include "visco/spectral.hpp"

using namespace visco;

namespace {

constexpr double kPi = std::numbers::pi;

// Sum of random Fourier modes with |m_i| <= max_mode, evaluated pointwise.
ScalarField random_trig(const Grid2& g, int max_mode, std::uint64_t seed, double offset = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ScalarField f(g);
  const auto n = static_cast<std::size_t>(g.n());
  const double kap = 2.0 * kPi / g.length();
  std::vector<std::array<double, 4>> modes;
  for (int a = -max_mode; a <= max_mode; ++a)
    for (int b = 0; b <= max_mode; ++b)
      if (a != 0 || b != 0) modes.push_back({double(a), double(b), nd(rng), nd(rng)});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = offset;
      for (const auto& m : modes) {
        const double ph = kap * (m[0] * g.coord(i) + m[1] * g.coord(j));
        v += m[2] * std::cos(ph) + m[3] * std::sin(ph);
      }
      f[i * n + j] = v;
    }
  return f;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) m = std::max(m, std::abs(a[p] - b[p]));
  return m;
}

template <std::size_t C>
double max_diff(const Field<C>& a, const Field<C>& b) {
  double m = 0.0;
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t p = 0; p < a.size(); ++p) m = std::max(m, std::abs(a.comp(c)[p] - b.comp(c)[p]));
  return m;
}

}  // namespace

TEST(Grid2, Validation) {
  EXPECT_THROW(Grid2(6), Error);
  EXPECT_THROW(Grid2(48), Error);
  EXPECT_THROW(Grid2(4), Error);
  EXPECT_THROW(Grid2(16, -1.0), Error);
  const Grid2 g(16);
  EXPECT_EQ(g.size(), 256u);
  EXPECT_EQ(g.half(), 9u);
  EXPECT_TRUE(g == Grid2(16));
  EXPECT_FALSE(g == Grid2(32));
}

TEST(Grid2, DealiasMask) {
  const Grid2 g(32);
  for (std::size_t a = 0; a < 32; ++a)
    for (std::size_t b = 0; b < g.half(); ++b) {
      const bool expect = std::abs(g.mode1(a)) <= 10 && g.mode2(b) <= 10;
      ASSERT_EQ(g.keep(a, b), expect);
    }
}

TEST(Grid2, ForwardInverseRoundTripAndMean) {
  const Grid2 g(32, 3.0);
  const ScalarField f = random_trig(g, 5, 1, 2.5);
  const Spectrum s = g.forward(f.values());
  EXPECT_NEAR(s[0].real(), mean(f), 1e-14);
  EXPECT_NEAR(s[0].real(), 2.5, 1e-13);
  const auto back = g.inverse(s);
  for (std::size_t p = 0; p < f.size(); ++p) ASSERT_NEAR(back[p], f[p], 1e-13);
}

TEST(Deriv, SineAndConstant) {
  const double L = 3.0;
  const Grid2 g(32, L);
  ScalarField f(g), expect(g), c(g);
  const auto n = static_cast<std::size_t>(g.n());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      f[i * n + j] = std::sin(2 * kPi * g.coord(i) / L);
      expect[i * n + j] = (2 * kPi / L) * std::cos(2 * kPi * g.coord(i) / L);
    }
  c.fill(4.2);
  EXPECT_LE(max_diff(deriv(f, 1), expect), 1e-13);
  EXPECT_LE(linf_norm(deriv(f, 2)), 1e-13);
  EXPECT_LE(linf_norm(deriv(c, 1)), 1e-13);
  EXPECT_LE(linf_norm(deriv(c, 2)), 1e-13);
  EXPECT_THROW(deriv(f, 3), Error);
}

TEST(Deriv, MixedPartialsCommute) {
  const Grid2 g(32);
  const ScalarField f = random_trig(g, 6, 2);
  EXPECT_LE(max_diff(deriv(deriv(f, 1), 2), deriv(deriv(f, 2), 1)), 1e-11);
}

TEST(Deriv, MatchesFiniteDifferences) {
  const Grid2 g(256);
  const ScalarField f = random_trig(g, 3, 3);
  const ScalarField d = deriv(f, 2);
  const auto n = static_cast<std::size_t>(g.n());
  const double h = g.spacing();
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double fd = (f[i * n + (j + 1) % n] - f[i * n + (j + n - 1) % n]) / (2 * h);
      err = std::max(err, std::abs(fd - d[i * n + j]));
    }
  EXPECT_LE(err, 1e-2 * linf_norm(d));
}

TEST(Laplacian, IsSumOfSecondDerivatives) {
  const Grid2 g(32);
  const ScalarField f = random_trig(g, 6, 4);
  ScalarField sum = deriv(deriv(f, 1), 1);
  sum += deriv(deriv(f, 2), 2);
  EXPECT_LE(max_diff(laplacian(f), sum), 1e-10);
}

TEST(InvLaplacian, CosineMode) {
  const Grid2 g(32);
  ScalarField f(g), expect(g);
  const auto n = static_cast<std::size_t>(g.n());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      f[i * n + j] = std::cos(3 * g.coord(i) + 2 * g.coord(j));
      expect[i * n + j] = f[i * n + j] / 13.0;
    }
  EXPECT_LE(max_diff(inv_laplacian(f), expect), 1e-15);
  ScalarField c(g);
  c.fill(3.0);
  EXPECT_LE(linf_norm(inv_laplacian(c)), 1e-15);
}

TEST(InvLaplacian, RoundTrip) {
  const Grid2 g(64, 5.0);
  const ScalarField f = random_trig(g, 8, 5, 1.7);
  const ScalarField back = laplacian(inv_laplacian(f));
  const ScalarField mz = mean_zero(f);
  ScalarField res = back + mz;
  EXPECT_LE(linf_norm(res), 1e-12 * linf_norm(f));
  EXPECT_NEAR(mean(inv_laplacian(f)), 0.0, 1e-14);
}

TEST(Leray, AnnihilatesGradientsKeepsCurls) {
  const Grid2 g(32);
  const ScalarField q = random_trig(g, 6, 6);
  EXPECT_LE(linf_norm(leray_project(grad(q))), 1e-12);
  VectorField2 v(g);
  const ScalarField dq1 = deriv(q, 1), dq2 = deriv(q, 2);
  v.comp(0) = dq2.values();
  for (std::size_t p = 0; p < v.size(); ++p) v.comp(0)[p] = -dq2[p];
  v.comp(1) = dq1.values();
  EXPECT_LE(max_diff(leray_project(v), v), 1e-12);
}

TEST(Leray, IdempotentDivergenceFreeHelmholtz) {
  const Grid2 g(32);
  VectorField2 v(g);
  v.comp(0) = random_trig(g, 7, 7, 0.3).values();
  v.comp(1) = random_trig(g, 7, 8, -0.2).values();
  const VectorField2 pv = leray_project(v);
  EXPECT_LE(max_diff(leray_project(pv), pv), 1e-12);
  EXPECT_LE(linf_norm(div(pv)), 1e-11);
  // v - Pv is a gradient plus the (unchanged) mean, so it is curl free
  VectorField2 rest = v - pv;
  EXPECT_LE(linf_norm(curl(rest)), 1e-11);
  double m0 = 0.0;
  for (double x : pv.comp(0)) m0 += x;
  EXPECT_NEAR(m0 / double(pv.size()), 0.3, 1e-13);
}

TEST(Div, MatrixDivergenceConventions) {
  const Grid2 g(32);
  const ScalarField a = random_trig(g, 4, 9), b = random_trig(g, 4, 10);
  MatrixField2 F(g);
  F.entry(0, 0) = a.values();
  F.entry(1, 1) = b.values();
  F.entry(0, 1) = b.values();
  // div_matT_j = d1 F1j + d2 F2j ; div_mat_i = d1 Fi1 + d2 Fi2
  const VectorField2 dt = div_matT(F), dm = div_mat(F);
  const ScalarField a1 = deriv(a, 1), b1 = deriv(b, 1), b2 = deriv(b, 2);
  for (std::size_t p = 0; p < g.size(); ++p) {
    ASSERT_NEAR(dt.comp(0)[p], a1[p], 1e-11);
    ASSERT_NEAR(dt.comp(1)[p], b1[p] + b2[p], 1e-11);
    ASSERT_NEAR(dm.comp(0)[p], a1[p] + b2[p], 1e-11);
    ASSERT_NEAR(dm.comp(1)[p], b2[p], 1e-11);
  }
  EXPECT_LE(linf_norm(div_matT(identity_field(g))), 1e-15);
}

TEST(Curl, SignConvention) {
  const Grid2 g(16);
  VectorField2 v(g);
  const auto n = static_cast<std::size_t>(g.n());
  // v = (x2-periodic sin x2, 0): d2 v1 = cos x2
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v.comp(0)[i * n + j] = std::sin(g.coord(j));
  const ScalarField c = curl(v);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ASSERT_NEAR(c[i * n + j], std::cos(g.coord(j)), 1e-14);
}

TEST(Operators, Linearity) {
  const Grid2 g(32);
  const ScalarField f = random_trig(g, 5, 11), h = random_trig(g, 5, 12);
  const double a = 1.3, b = -0.4;
  const ScalarField comb = f * a + h * b;
  EXPECT_LE(max_diff(deriv(comb, 1), deriv(f, 1) * a + deriv(h, 1) * b), 1e-11);
  EXPECT_LE(max_diff(inv_laplacian(comb), inv_laplacian(f) * a + inv_laplacian(h) * b), 1e-12);
  EXPECT_LE(linf_norm(deriv(ScalarField(g), 2)), 0.0);
}

TEST(Norms, Parseval) {
  const Grid2 g(32, 2.0);
  const ScalarField f = random_trig(g, 6, 13, 0.5);
  const Spectrum s = g.forward(f.values());
  double modes = 0.0;
  for (std::size_t a = 0; a < 32; ++a)
    for (std::size_t b = 0; b < g.half(); ++b) {
      const double w = (b == 0 || b == 16) ? 1.0 : 2.0;
      modes += w * std::norm(s[a * g.half() + b]);
    }
  const double area = g.length() * g.length();
  EXPECT_NEAR(l2_norm(f) * l2_norm(f), area * modes, 1e-12 * area * modes);
}

TEST(Dealias, ProductsOfResolvedFieldsAreExact) {
  const Grid2 g(32);
  // modes up to n/3 = 10 in each factor
  const ScalarField a = random_trig(g, 5, 14), b = random_trig(g, 5, 15);
  ScalarField prod(g);
  for (std::size_t p = 0; p < g.size(); ++p) prod[p] = a[p] * b[p];
  // product has modes up to 10: untouched by the mask
  EXPECT_LE(max_diff(dealias(prod), prod), 1e-12);
  // a high mode is removed
  ScalarField hi(g);
  const auto n = static_cast<std::size_t>(g.n());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) hi[i * n + j] = std::cos(12 * g.coord(i));
  EXPECT_LE(linf_norm(dealias(hi)), 1e-14);
}

TEST(Resample, UpAndDownAreExactForResolvedFields) {
  const Grid2 coarse(32), fine(128);
  const ScalarField f = random_trig(coarse, 7, 16, 0.25);
  const ScalarField up = resample(f, fine);
  const ScalarField direct = random_trig(fine, 7, 16, 0.25);
  EXPECT_LE(max_diff(up, direct), 1e-12);
  EXPECT_LE(max_diff(resample(up, coarse), f), 1e-12);
  EXPECT_THROW(resample(f, Grid2(64, 1.0)), Error);
}

TEST(BallMask, IndicatorAndArea) {
  const Grid2 g(256);
  const BallMask m = BallMask::centered(g);
  EXPECT_DOUBLE_EQ(m.radius, g.length() / 4.0);
  const double exact = kPi * m.radius * m.radius;
  EXPECT_NEAR(m.area(), exact, 0.01 * exact);
  const auto n = static_cast<std::size_t>(g.n());
  for (std::size_t i = 0; i < n; i += 7)
    for (std::size_t j = 0; j < n; j += 5) {
      const double dx = g.coord(i) - m.cx, dy = g.coord(j) - m.cy;
      ASSERT_EQ(m.contains(i * n + j), dx * dx + dy * dy <= m.radius * m.radius);
    }
}

TEST(BallMask, PeriodicDistance) {
  const Grid2 g(64);
  const BallMask m(g, 0.0, 0.0, 0.5);
  const auto n = static_cast<std::size_t>(g.n());
  EXPECT_TRUE(m.contains(0));
  EXPECT_TRUE(m.contains((n - 1) * n + (n - 1)));  // wraps around the corner
}

TEST(MeanZero, BoxAndBall) {
  const Grid2 g(64);
  ScalarField c(g);
  c.fill(2.0);
  const BallMask m = BallMask::centered(g);
  EXPECT_LE(linf_norm(mean_zero(c, m)), 1e-15);
  EXPECT_LE(linf_norm(mean_zero(c)), 1e-15);
  // piecewise field: 5 inside the ball, x1 outside -> ball average 5
  ScalarField f(g);
  const auto n = static_cast<std::size_t>(g.n());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) f[i * n + j] = m.contains(i * n + j) ? 5.0 : g.coord(i);
  const ScalarField z = mean_zero(f, m);
  for (std::size_t p = 0; p < f.size(); ++p) ASSERT_NEAR(z[p], f[p] - 5.0, 1e-14);
  EXPECT_LE(max_diff(mean_zero(z, m), z), 1e-14);
  EXPECT_NEAR(mean(mean_zero(f)), 0.0, 1e-13);
}

TEST(LocalLpNorm, ConstantsAndEmpty) {
  const Grid2 g(64);
  const BallMask m = BallMask::centered(g);
  ScalarField one(g);
  one.fill(1.0);
  std::vector<TimedField> series;
  for (int k = 0; k <= 4; ++k) series.push_back({0.25 * k, one});
  const double A = m.area();
  for (double p : {1.0, 1.5, 3.0})
    EXPECT_NEAR(local_lp_norm(series, m, p, 0.0, 1.0), std::pow(A * 1.0, 1.0 / p), 1e-13);
  std::vector<TimedField> zeros{{0.0, ScalarField(g)}, {1.0, ScalarField(g)}};
  EXPECT_EQ(local_lp_norm(zeros, m, 2.0, 0.0, 1.0), 0.0);
  try {
    local_lp_norm(series, m, 2.0, 5.0, 6.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyWindow);
  }
  EXPECT_NEAR(local_lp_norm(std::span(series).subspan(0, 1), m, 2.0, 0.0, 0.0), std::sqrt(A), 1e-13);
}

TEST(LocalLpNorm, SeparableAgainstDenseQuadrature) {
  const Grid2 g(64);
  const BallMask m = BallMask::centered(g);
  const ScalarField gx = random_trig(g, 3, 17, 0.1);
  auto h = [](double t) { return 1.0 + t - 0.5 * t * t; };
  const double p = 1.5;
  double space = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q)
    if (m.contains(q)) space += std::pow(std::abs(gx[q]), p);
  space *= g.spacing() * g.spacing();
  // time factor by composite Simpson with many panels
  double time = 0.0;
  const int N = 2000;
  for (int k = 0; k <= N; ++k) {
    const double t = double(k) / N, w = (k == 0 || k == N) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    time += w * std::pow(h(t), p);
  }
  time /= 3.0 * N;
  const double oracle = std::pow(space * time, 1.0 / p);
  double prev_err = 1.0;
  for (int steps : {8, 32, 128}) {
    std::vector<TimedField> series;
    for (int k = 0; k <= steps; ++k) {
      const double t = double(k) / steps;
      series.push_back({t, gx * h(t)});
    }
    const double err = std::abs(local_lp_norm(series, m, p, 0.0, 1.0) - oracle) / oracle;
    EXPECT_LT(err, prev_err);
    prev_err = err;
  }
  EXPECT_LT(prev_err, 1e-5);
}

TEST(SmoothBump, Shape) {
  EXPECT_DOUBLE_EQ(smooth_bump(0.0, 1.0), 1.0);
  EXPECT_EQ(smooth_bump(1.0, 1.0), 0.0);
  EXPECT_EQ(smooth_bump(2.0, 1.0), 0.0);
  EXPECT_GT(smooth_bump(0.5, 1.0), smooth_bump(0.9, 1.0));
  EXPECT_LT(smooth_bump(0.999, 1.0), 1e-100);
}
