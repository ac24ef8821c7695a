#include "visco/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "visco/error.hpp"

namespace visco {

namespace {

constexpr Complex kI{0.0, 1.0};

template <class Fn>
void for_modes(const Grid2& g, Fn&& fn) {
  const auto n = static_cast<std::size_t>(g.n());
  const std::size_t half = g.half();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < half; ++b) fn(a, b, a * half + b);
}

ScalarField from_spectrum(const Grid2& g, const Spectrum& s) {
  ScalarField out(g);
  g.inverse(s, out.values());
  return out;
}

}  // namespace

Spectrum deriv_hat(const Grid2& g, const Spectrum& f, int axis) {
  if (axis != 1 && axis != 2) throw Error(Errc::InvalidArgument, "deriv: axis must be 1 or 2");
  Spectrum out(f.size());
  for_modes(g, [&](std::size_t a, std::size_t b, std::size_t s) {
    out[s] = kI * (axis == 1 ? g.k1(a) : g.k2(b)) * f[s];
  });
  return out;
}

Spectrum laplacian_hat(const Grid2& g, const Spectrum& f) {
  Spectrum out(f.size());
  for_modes(g, [&](std::size_t a, std::size_t b, std::size_t s) { out[s] = -g.ksq(a, b) * f[s]; });
  return out;
}

Spectrum inv_laplacian_hat(const Grid2& g, const Spectrum& f) {
  Spectrum out(f.size());
  for_modes(g, [&](std::size_t a, std::size_t b, std::size_t s) {
    const double k2 = g.ksq(a, b);
    out[s] = k2 > 0.0 ? f[s] / k2 : Complex{};
  });
  return out;
}

void dealias_hat(const Grid2& g, Spectrum& f) {
  for (std::size_t s = 0; s < f.size(); ++s)
    if (!g.keep(s)) f[s] = 0.0;
}

void leray_hat(const Grid2& g, Spectrum& v1, Spectrum& v2) {
  for_modes(g, [&](std::size_t a, std::size_t b, std::size_t s) {
    const double k1 = g.k1(a), k2 = g.k2(b);
    const double kk = k1 * k1 + k2 * k2;
    if (kk == 0.0) return;
    const Complex kv = (k1 * v1[s] + k2 * v2[s]) / kk;
    v1[s] -= k1 * kv;
    v2[s] -= k2 * kv;
  });
}

ScalarField deriv(const ScalarField& f, int axis) {
  const Grid2& g = f.grid();
  return from_spectrum(g, deriv_hat(g, g.forward(f.values()), axis));
}

ScalarField laplacian(const ScalarField& f) {
  const Grid2& g = f.grid();
  return from_spectrum(g, laplacian_hat(g, g.forward(f.values())));
}

ScalarField inv_laplacian(const ScalarField& f) {
  const Grid2& g = f.grid();
  return from_spectrum(g, inv_laplacian_hat(g, g.forward(f.values())));
}

VectorField2 leray_project(const VectorField2& v) {
  const Grid2& g = v.grid();
  Spectrum s1 = g.forward(v.comp(0)), s2 = g.forward(v.comp(1));
  leray_hat(g, s1, s2);
  VectorField2 out(g);
  g.inverse(s1, out.comp(0));
  g.inverse(s2, out.comp(1));
  return out;
}

VectorField2 div_matT(const MatrixField2& F) {
  const Grid2& g = F.grid();
  VectorField2 out(g);
  for (std::size_t j = 0; j < 2; ++j) {
    const Spectrum a = deriv_hat(g, g.forward(F.entry(0, j)), 1);
    const Spectrum b = deriv_hat(g, g.forward(F.entry(1, j)), 2);
    Spectrum sum(a.size());
    for (std::size_t s = 0; s < sum.size(); ++s) sum[s] = a[s] + b[s];
    g.inverse(sum, out.comp(j));
  }
  return out;
}

VectorField2 div_mat(const MatrixField2& M) {
  const Grid2& g = M.grid();
  VectorField2 out(g);
  for (std::size_t i = 0; i < 2; ++i) {
    const Spectrum a = deriv_hat(g, g.forward(M.entry(i, 0)), 1);
    const Spectrum b = deriv_hat(g, g.forward(M.entry(i, 1)), 2);
    Spectrum sum(a.size());
    for (std::size_t s = 0; s < sum.size(); ++s) sum[s] = a[s] + b[s];
    g.inverse(sum, out.comp(i));
  }
  return out;
}

ScalarField div(const VectorField2& v) {
  const Grid2& g = v.grid();
  const Spectrum a = deriv_hat(g, g.forward(v.comp(0)), 1);
  const Spectrum b = deriv_hat(g, g.forward(v.comp(1)), 2);
  Spectrum sum(a.size());
  for (std::size_t s = 0; s < sum.size(); ++s) sum[s] = a[s] + b[s];
  return from_spectrum(g, sum);
}

ScalarField curl(const VectorField2& v) {
  const Grid2& g = v.grid();
  const Spectrum a = deriv_hat(g, g.forward(v.comp(0)), 2);
  const Spectrum b = deriv_hat(g, g.forward(v.comp(1)), 1);
  Spectrum diff(a.size());
  for (std::size_t s = 0; s < diff.size(); ++s) diff[s] = a[s] - b[s];
  return from_spectrum(g, diff);
}

VectorField2 grad(const ScalarField& f) {
  const Grid2& g = f.grid();
  const Spectrum s = g.forward(f.values());
  VectorField2 out(g);
  g.inverse(deriv_hat(g, s, 1), out.comp(0));
  g.inverse(deriv_hat(g, s, 2), out.comp(1));
  return out;
}

MatrixField2 grad(const VectorField2& u) {
  const Grid2& g = u.grid();
  MatrixField2 out(g);
  for (std::size_t i = 0; i < 2; ++i) {
    const Spectrum s = g.forward(u.comp(i));
    g.inverse(deriv_hat(g, s, 1), out.entry(i, 0));
    g.inverse(deriv_hat(g, s, 2), out.entry(i, 1));
  }
  return out;
}

std::vector<double> resample(std::span<const double> values, const Grid2& from, const Grid2& to) {
  if (values.size() != from.size()) throw Error(Errc::GridMismatch, "resample: sample count does not match grid");
  if (from == to) return {values.begin(), values.end()};
  const Spectrum src = from.forward(values);
  Spectrum dst(to.spectral_size());
  const int limit = std::min(from.n(), to.n()) / 2;
  const auto nt = static_cast<std::size_t>(to.n());
  for (std::size_t a = 0; a < nt; ++a) {
    const int m1 = to.mode1(a);
    if (std::abs(m1) >= limit) continue;
    const std::size_t as = m1 >= 0 ? static_cast<std::size_t>(m1) : static_cast<std::size_t>(from.n() + m1);
    for (std::size_t b = 0; b < to.half(); ++b) {
      if (to.mode2(b) >= limit) break;
      dst[a * to.half() + b] = src[as * from.half() + b];
    }
  }
  return to.inverse(dst);
}

double integral(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  const double h = f.grid().spacing();
  return s * h * h;
}

double mean(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s / static_cast<double>(f.size());
}

BallMask::BallMask(const Grid2& grid, double cx_, double cy_, double radius_)
    : cx(cx_), cy(cy_), radius(radius_), indicator(grid) {
  if (!(radius > 0.0)) throw Error(Errc::InvalidArgument, "BallMask: radius must be positive");
  const double L = grid.length();
  const auto n = static_cast<std::size_t>(grid.n());
  auto periodic = [L](double d) {
    d = std::fmod(std::abs(d), L);
    return std::min(d, L - d);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = periodic(grid.coord(i) - cx);
    for (std::size_t j = 0; j < n; ++j) {
      const double dy = periodic(grid.coord(j) - cy);
      indicator[i * n + j] = (dx * dx + dy * dy <= radius * radius) ? 1.0 : 0.0;
    }
  }
}

BallMask BallMask::centered(const Grid2& grid, double radius) {
  const double L = grid.length();
  return BallMask(grid, 0.5 * L, 0.5 * L, radius > 0.0 ? radius : 0.25 * L);
}

double BallMask::area() const { return integral(indicator); }

ScalarField mean_zero(const ScalarField& f) {
  ScalarField out = f;
  const double m = mean(f);
  for (double& v : out.values()) v -= m;
  return out;
}

ScalarField mean_zero(const ScalarField& f, const BallMask& mask) {
  if (!(f.grid() == mask.grid())) throw Error(Errc::GridMismatch, "mean_zero: mask on a different grid");
  double s = 0.0, count = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) {
    if (mask.contains(p)) {
      s += f[p];
      count += 1.0;
    }
  }
  ScalarField out = f;
  if (count == 0.0) return out;
  const double m = s / count;
  for (double& v : out.values()) v -= m;
  return out;
}

double local_lp_norm(std::span<const TimedField> series, const BallMask& mask, double p, double t0, double t1) {
  if (!(p >= 1.0)) throw Error(Errc::InvalidArgument, "local_lp_norm: p must be >= 1");
  const double tol = 1e-12 * std::max(1.0, std::abs(t1));
  std::vector<std::pair<double, double>> samples;  // (t, spatial integral)
  for (const TimedField& tf : series) {
    if (tf.t < t0 - tol || tf.t > t1 + tol) continue;
    if (!(tf.f.grid() == mask.grid())) throw Error(Errc::GridMismatch, "local_lp_norm: mask on a different grid");
    double s = 0.0;
    for (std::size_t q = 0; q < tf.f.size(); ++q)
      if (mask.contains(q)) s += std::pow(std::abs(tf.f[q]), p);
    const double h = tf.f.grid().spacing();
    samples.emplace_back(tf.t, s * h * h);
  }
  if (samples.empty()) throw Error(Errc::EmptyWindow, "local_lp_norm: no snapshot in the time window");
  std::sort(samples.begin(), samples.end());
  double total = 0.0;
  if (samples.size() == 1) {
    total = samples.front().second;
  } else {
    for (std::size_t i = 1; i < samples.size(); ++i)
      total += 0.5 * (samples[i].first - samples[i - 1].first) * (samples[i].second + samples[i - 1].second);
  }
  return std::pow(total, 1.0 / p);
}

double smooth_bump(double r, double a) {
  const double x = r / a;
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

}  // namespace visco
