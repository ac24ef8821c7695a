#include "visco/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "visco/error.hpp"
#include "visco/spectral.hpp"

namespace visco {

namespace {

constexpr Complex kI{0.0, 1.0};

// u1, u2, F11, F12, F21, F22 in Fourier space
using Spec6 = std::array<Spectrum, 6>;

Spec6 to_spec(const State& s) {
  const Grid2& g = s.grid();
  Spec6 out;
  for (std::size_t c = 0; c < 2; ++c) out[c] = g.forward(s.u.comp(c));
  for (std::size_t c = 0; c < 4; ++c) out[2 + c] = g.forward(s.F.comp(c));
  for (auto& sp : out) dealias_hat(g, sp);
  return out;
}

void from_spec(const Grid2& g, const Spec6& v, State& s) {
  for (std::size_t c = 0; c < 2; ++c) g.inverse(v[c], s.u.comp(c));
  for (std::size_t c = 0; c < 4; ++c) g.inverse(v[2 + c], s.F.comp(c));
}

std::vector<double> inverse_deriv(const Grid2& g, const Spectrum& f, int axis) {
  return g.inverse(deriv_hat(g, f, axis));
}

Mat2 stress_at(const Mat2& F, double delta) {
  const Mat2 tau = F * F.transpose();
  if (delta == 0.0) return tau;
  const Mat2 G = F - Mat2::identity();
  return tau + (G * F.transpose() + F * G.transpose()) * (delta * G.frob_sq());
}

// Nonlinear part of the right-hand side: Leray-projected advection plus stress
// divergence for u, advection plus stretching for F. All products are masked.
Spec6 nonlinear(const Grid2& g, const Spec6& v, double delta) {
  const std::size_t np = g.size();
  std::array<std::vector<double>, 2> u;
  std::array<std::array<std::vector<double>, 2>, 2> gu;  // gu[i][l] = d_l u_i
  for (std::size_t i = 0; i < 2; ++i) {
    u[i] = g.inverse(v[i]);
    for (int l = 0; l < 2; ++l) gu[i][static_cast<std::size_t>(l)] = inverse_deriv(g, v[i], l + 1);
  }
  std::array<std::vector<double>, 4> F;
  std::array<std::array<std::vector<double>, 2>, 4> gF;  // gF[c][l] = d_l F_c
  for (std::size_t c = 0; c < 4; ++c) {
    F[c] = g.inverse(v[2 + c]);
    for (int l = 0; l < 2; ++l) gF[c][static_cast<std::size_t>(l)] = inverse_deriv(g, v[2 + c], l + 1);
  }

  std::array<std::vector<double>, 2> conv;
  std::array<std::vector<double>, 3> sig;  // s11, s12, s22
  std::array<std::vector<double>, 4> nf;
  for (auto& a : conv) a.resize(np);
  for (auto& a : sig) a.resize(np);
  for (auto& a : nf) a.resize(np);

  for (std::size_t p = 0; p < np; ++p) {
    const double u1 = u[0][p], u2 = u[1][p];
    conv[0][p] = u1 * gu[0][0][p] + u2 * gu[0][1][p];
    conv[1][p] = u1 * gu[1][0][p] + u2 * gu[1][1][p];
    const Mat2 Fp{F[0][p], F[1][p], F[2][p], F[3][p]};
    const Mat2 s = stress_at(Fp, delta);
    sig[0][p] = s.a11;
    sig[1][p] = 0.5 * (s.a12 + s.a21);
    sig[2][p] = s.a22;
    const Mat2 Gu{gu[0][0][p], gu[0][1][p], gu[1][0][p], gu[1][1][p]};
    const Mat2 stretch = Gu * Fp;
    const std::array<double, 4> st{stretch.a11, stretch.a12, stretch.a21, stretch.a22};
    for (std::size_t c = 0; c < 4; ++c) nf[c][p] = st[c] - (u1 * gF[c][0][p] + u2 * gF[c][1][p]);
  }

  Spec6 out;
  std::array<Spectrum, 2> ch;
  std::array<Spectrum, 3> sh;
  for (std::size_t i = 0; i < 2; ++i) ch[i] = g.forward(conv[i]);
  for (std::size_t i = 0; i < 3; ++i) sh[i] = g.forward(sig[i]);
  const auto n = static_cast<std::size_t>(g.n());
  const std::size_t half = g.half();
  out[0].assign(g.spectral_size(), Complex{});
  out[1].assign(g.spectral_size(), Complex{});
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < half; ++b) {
      const std::size_t s = a * half + b;
      if (!g.keep(s)) continue;
      const double k1 = g.k1(a), k2 = g.k2(b);
      out[0][s] = -ch[0][s] + kI * (k1 * sh[0][s] + k2 * sh[1][s]);
      out[1][s] = -ch[1][s] + kI * (k1 * sh[1][s] + k2 * sh[2][s]);
    }
  }
  leray_hat(g, out[0], out[1]);
  for (std::size_t c = 0; c < 4; ++c) {
    out[2 + c] = g.forward(nf[c]);
    dealias_hat(g, out[2 + c]);
  }
  return out;
}

bool all_finite(const State& s) {
  for (std::size_t c = 0; c < 2; ++c)
    for (double v : s.u.comp(c))
      if (!std::isfinite(v)) return false;
  for (std::size_t c = 0; c < 4; ++c)
    for (double v : s.F.comp(c))
      if (!std::isfinite(v)) return false;
  return true;
}

// exp(-nu |k|^2 tau) per mode
std::vector<double> decay(const Grid2& g, double nu, double tau) {
  std::vector<double> e(g.spectral_size());
  const auto n = static_cast<std::size_t>(g.n());
  const std::size_t half = g.half();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < half; ++b) e[a * half + b] = std::exp(-nu * g.ksq(a, b) * tau);
  return e;
}

}  // namespace

void ModelParams::validate() const {
  if (!(mu > 0.0) || !(eta >= 0.0) || !(delta >= 0.0) || !std::isfinite(mu) || !std::isfinite(eta) ||
      !std::isfinite(delta)) {
    throw Error(Errc::InvalidArgument, "model parameters need mu > 0, eta >= 0, delta >= 0");
  }
}

std::string to_string(InitVariant v) {
  switch (v) {
    case InitVariant::Equilibrium: return "equilibrium";
    case InitVariant::TaylorGreen: return "taylor_green";
    case InitVariant::WarmStart: return "warm_start";
  }
  return "unknown";
}

InitVariant parse_init_variant(const std::string& name) {
  if (name == "equilibrium") return InitVariant::Equilibrium;
  if (name == "taylor_green") return InitVariant::TaylorGreen;
  if (name == "warm_start") return InitVariant::WarmStart;
  throw Error(Errc::ConfigError, "unknown init variant '" + name + "'");
}

VectorField2 velocity_from_stream(const ScalarField& psi) {
  const Grid2& g = psi.grid();
  const Spectrum s = g.forward(psi.values());
  VectorField2 u(g);
  g.inverse(deriv_hat(g, s, 2), u.comp(0));
  g.inverse(deriv_hat(g, s, 1), u.comp(1));
  for (double& v : u.comp(0)) v = -v;
  return u;
}

MatrixField2 curl_potential_F(const ScalarField& phi1, const ScalarField& phi2) {
  const Grid2& g = phi1.grid();
  MatrixField2 F = identity_field(g);
  const VectorField2 c1 = velocity_from_stream(phi1);
  const VectorField2 c2 = velocity_from_stream(phi2);
  for (std::size_t p = 0; p < g.size(); ++p) {
    F.comp(0)[p] += c1.comp(0)[p];
    F.comp(2)[p] += c1.comp(1)[p];
    F.comp(1)[p] += c2.comp(0)[p];
    F.comp(3)[p] += c2.comp(1)[p];
  }
  return F;
}

ScalarField random_stream(const Grid2& grid, int max_mode, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double kappa = 2.0 * std::numbers::pi / grid.length();
  struct Mode {
    int m1, m2;
    double c, s;
  };
  std::vector<Mode> modes;
  for (int m2 = 0; m2 <= max_mode; ++m2) {
    for (int m1 = -max_mode; m1 <= max_mode; ++m1) {
      if (m2 == 0 && m1 <= 0) continue;
      const double w = 1.0 / static_cast<double>(m1 * m1 + m2 * m2);
      const double c = normal(rng) * w;
      const double s = normal(rng) * w;
      modes.push_back({m1, m2, c, s});
    }
  }
  ScalarField psi(grid);
  const auto n = static_cast<std::size_t>(grid.n());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x1 = grid.coord(i), x2 = grid.coord(j);
      double v = 0.0;
      for (const Mode& m : modes) {
        const double ph = kappa * (m.m1 * x1 + m.m2 * x2);
        v += m.c * std::cos(ph) + m.s * std::sin(ph);
      }
      psi[i * n + j] = v;
    }
  }
  return psi;
}

MatrixField2 elastic_stress(const MatrixField2& F, double delta) {
  MatrixField2 out(F.grid());
  for (std::size_t p = 0; p < F.size(); ++p) {
    Mat2 s = stress_at(F.at(p), delta);
    const double off = 0.5 * (s.a12 + s.a21);
    s.a12 = off;
    s.a21 = off;
    out.set(p, s);
  }
  return dealias(out);
}

Rhs rhs(const State& state, const ModelParams& params) {
  params.validate();
  const Grid2& g = state.grid();
  const Spec6 v = to_spec(state);
  Spec6 N = nonlinear(g, v, params.delta);
  Rhs out{VectorField2(g), MatrixField2(g)};
  const auto n = static_cast<std::size_t>(g.n());
  const std::size_t half = g.half();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < half; ++b) {
      const std::size_t s = a * half + b;
      const double k2 = g.ksq(a, b);
      for (std::size_t c = 0; c < 6; ++c) N[c][s] -= (c < 2 ? params.mu : params.eta) * k2 * v[c][s];
    }
  }
  for (std::size_t c = 0; c < 2; ++c) g.inverse(N[c], out.du.comp(c));
  for (std::size_t c = 0; c < 4; ++c) g.inverse(N[2 + c], out.dF.comp(c));
  return out;
}

double max_stable_dt(const State& state, double cfl) {
  return cfl * state.grid().spacing() / std::max(1.0, linf_norm(state.u));
}

State step(const State& state, double dt, const ModelParams& params, double cfl) {
  params.validate();
  if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "step: dt must be positive");
  const double limit = max_stable_dt(state, cfl);
  if (dt > limit) {
    throw Error(Errc::CflViolation,
                "dt = " + std::to_string(dt) + " exceeds the CFL limit " + std::to_string(limit));
  }
  const Grid2& g = state.grid();
  const std::size_t ns = g.spectral_size();

  // Three-stage third-order SSP method with abscissas (0, 2/3, 2/3), so every
  // integrating factor exp(-nu |k|^2 tau) has tau >= 0.
  const std::array<double, 2> nu{params.mu, params.eta};
  std::array<std::vector<double>, 2> e_full, e_two, e_one;
  for (std::size_t r = 0; r < 2; ++r) {
    e_full[r] = decay(g, nu[r], dt);
    e_two[r] = decay(g, nu[r], 2.0 * dt / 3.0);
    e_one[r] = decay(g, nu[r], dt / 3.0);
  }
  auto kind = [](std::size_t c) { return c < 2 ? std::size_t{0} : std::size_t{1}; };

  const Spec6 v0 = to_spec(state);
  const Spec6 n0 = nonlinear(g, v0, params.delta);
  Spec6 v1;
  for (std::size_t c = 0; c < 6; ++c) {
    const auto& e2 = e_two[kind(c)];
    v1[c].resize(ns);
    for (std::size_t s = 0; s < ns; ++s) v1[c][s] = e2[s] * (v0[c][s] + (2.0 / 3.0) * dt * n0[c][s]);
  }
  const Spec6 n1 = nonlinear(g, v1, params.delta);
  Spec6 v2;
  for (std::size_t c = 0; c < 6; ++c) {
    const auto& e2 = e_two[kind(c)];
    v2[c].resize(ns);
    for (std::size_t s = 0; s < ns; ++s)
      v2[c][s] = e2[s] * (v0[c][s] + (2.0 / 9.0) * dt * n0[c][s]) + (4.0 / 9.0) * dt * n1[c][s];
  }
  const Spec6 n2 = nonlinear(g, v2, params.delta);
  Spec6 v3;
  for (std::size_t c = 0; c < 6; ++c) {
    const auto& ef = e_full[kind(c)];
    const auto& e1 = e_one[kind(c)];
    v3[c].resize(ns);
    for (std::size_t s = 0; s < ns; ++s)
      v3[c][s] = ef[s] * (v0[c][s] + 0.25 * dt * n0[c][s]) +
                 e1[s] * dt * ((3.0 / 16.0) * n1[c][s] + (9.0 / 16.0) * n2[c][s]);
  }

  State out(g);
  out.t = state.t + dt;
  from_spec(g, v3, out);
  if (!all_finite(out)) throw Error(Errc::NonFinite, "non-finite value after step at t = " + std::to_string(out.t));
  return out;
}

MatrixField2 transport_F(const MatrixField2& F0, const VectorField2& u, double duration, int n_steps) {
  if (n_steps < 1) throw Error(Errc::InvalidArgument, "transport_F: n_steps must be >= 1");
  const Grid2& g = F0.grid();
  const std::size_t np = g.size();
  std::array<Spectrum, 2> uh{g.forward(u.comp(0)), g.forward(u.comp(1))};
  std::array<std::array<std::vector<double>, 2>, 2> gu;
  for (std::size_t i = 0; i < 2; ++i) {
    dealias_hat(g, uh[i]);
    for (int l = 0; l < 2; ++l) gu[i][static_cast<std::size_t>(l)] = inverse_deriv(g, uh[i], l + 1);
  }
  const std::array<std::vector<double>, 2> uu{g.inverse(uh[0]), g.inverse(uh[1])};

  auto rate = [&](const std::array<Spectrum, 4>& Fh) {
    std::array<std::vector<double>, 4> Fp;
    std::array<std::array<std::vector<double>, 2>, 4> gF;
    for (std::size_t c = 0; c < 4; ++c) {
      Fp[c] = g.inverse(Fh[c]);
      for (int l = 0; l < 2; ++l) gF[c][static_cast<std::size_t>(l)] = inverse_deriv(g, Fh[c], l + 1);
    }
    std::array<std::vector<double>, 4> nf;
    for (auto& a : nf) a.resize(np);
    for (std::size_t p = 0; p < np; ++p) {
      const Mat2 Fm{Fp[0][p], Fp[1][p], Fp[2][p], Fp[3][p]};
      const Mat2 Gu{gu[0][0][p], gu[0][1][p], gu[1][0][p], gu[1][1][p]};
      const Mat2 st = Gu * Fm;
      const std::array<double, 4> sv{st.a11, st.a12, st.a21, st.a22};
      for (std::size_t c = 0; c < 4; ++c) nf[c][p] = sv[c] - (uu[0][p] * gF[c][0][p] + uu[1][p] * gF[c][1][p]);
    }
    std::array<Spectrum, 4> out;
    for (std::size_t c = 0; c < 4; ++c) {
      out[c] = g.forward(nf[c]);
      dealias_hat(g, out[c]);
    }
    return out;
  };

  std::array<Spectrum, 4> Fh;
  for (std::size_t c = 0; c < 4; ++c) {
    Fh[c] = g.forward(F0.comp(c));
    dealias_hat(g, Fh[c]);
  }
  const double dt = duration / n_steps;
  const std::size_t ns = g.spectral_size();
  for (int it = 0; it < n_steps; ++it) {
    const auto k0 = rate(Fh);
    std::array<Spectrum, 4> a;
    for (std::size_t c = 0; c < 4; ++c) {
      a[c].resize(ns);
      for (std::size_t s = 0; s < ns; ++s) a[c][s] = Fh[c][s] + dt * k0[c][s];
    }
    const auto k1 = rate(a);
    std::array<Spectrum, 4> b;
    for (std::size_t c = 0; c < 4; ++c) {
      b[c].resize(ns);
      for (std::size_t s = 0; s < ns; ++s) b[c][s] = 0.75 * Fh[c][s] + 0.25 * (a[c][s] + dt * k1[c][s]);
    }
    const auto k2 = rate(b);
    for (std::size_t c = 0; c < 4; ++c)
      for (std::size_t s = 0; s < ns; ++s)
        Fh[c][s] = (1.0 / 3.0) * Fh[c][s] + (2.0 / 3.0) * (b[c][s] + dt * k2[c][s]);
  }
  MatrixField2 F(g);
  for (std::size_t c = 0; c < 4; ++c) g.inverse(Fh[c], F.comp(c));
  return F;
}

State init(const InitSpec& spec, const Grid2& grid) {
  State s(grid);
  s.F = identity_field(grid);
  switch (spec.variant) {
    case InitVariant::Equilibrium:
      break;
    case InitVariant::TaylorGreen: {
      if (spec.modes < 1) throw Error(Errc::InvalidArgument, "taylor_green: modes must be >= 1");
      const double kappa = 2.0 * std::numbers::pi * spec.modes / grid.length();
      const auto n = static_cast<std::size_t>(grid.n());
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double x1 = kappa * grid.coord(i), x2 = kappa * grid.coord(j);
          s.u.comp(0)[i * n + j] = spec.amplitude * std::cos(x1) * std::sin(x2);
          s.u.comp(1)[i * n + j] = -spec.amplitude * std::sin(x1) * std::cos(x2);
        }
      }
      break;
    }
    case InitVariant::WarmStart: {
      if (!(spec.warm_time >= 0.0)) throw Error(Errc::InvalidArgument, "warm_start: warm_time must be >= 0");
      VectorField2 u = velocity_from_stream(random_stream(grid, 2, spec.seed));
      const double umax = linf_norm(u);
      if (umax > 0.0) u *= spec.stream_amplitude / umax;
      s.u = u;
      if (spec.warm_time == 0.0) break;
      const double dt0 = kDefaultCfl * grid.spacing() / std::max(1.0, linf_norm(u));
      int steps = std::max(1, static_cast<int>(std::ceil(spec.warm_time / dt0)));
      constexpr double kTol = 1e-6;
      double err = 0.0;
      for (int attempt = 0; attempt < 8; ++attempt, steps *= 2) {
        MatrixField2 F = transport_F(identity_field(grid), u, spec.warm_time, steps);
        err = 0.0;
        for (std::size_t p = 0; p < F.size(); ++p) err = std::max(err, std::abs(F.at(p).det() - 1.0));
        if (err <= kTol) {
          s.F = std::move(F);
          return s;
        }
      }
      throw Error(Errc::ConstraintViolation,
                  "warm_start: |det F - 1|_inf = " + std::to_string(err) + " after sub-step refinement");
    }
  }
  return s;
}

Pressure pressure(const State& state, double delta) {
  const Grid2& g = state.grid();
  const std::size_t np = g.size();
  std::array<std::vector<double>, 3> uu;  // u1u1, u1u2, u2u2
  std::array<std::vector<double>, 3> pi;
  for (auto& a : uu) a.resize(np);
  for (auto& a : pi) a.resize(np);
  for (std::size_t p = 0; p < np; ++p) {
    const double u1 = state.u.comp(0)[p], u2 = state.u.comp(1)[p];
    uu[0][p] = u1 * u1;
    uu[1][p] = u1 * u2;
    uu[2][p] = u2 * u2;
    const Mat2 sg = stress_at(state.F.at(p), delta);
    pi[0][p] = 0.5 * (sg.a11 + sg.a22);
    pi[1][p] = 0.5 * (sg.a11 - sg.a22);
    pi[2][p] = 0.5 * (sg.a12 + sg.a21);
  }
  std::array<Spectrum, 3> uh, ph;
  for (std::size_t c = 0; c < 3; ++c) {
    uh[c] = g.forward(uu[c]);
    ph[c] = g.forward(pi[c]);
    dealias_hat(g, uh[c]);
    dealias_hat(g, ph[c]);
  }
  Spectrum rhs_hat(g.spectral_size());
  const auto n = static_cast<std::size_t>(g.n());
  const std::size_t half = g.half();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < half; ++b) {
      const std::size_t s = a * half + b;
      const double k1 = g.k1(a), k2 = g.k2(b);
      const Complex divdiv = -(k1 * k1 * uh[0][s] + 2.0 * k1 * k2 * uh[1][s] + k2 * k2 * uh[2][s]);
      const Complex q = (k2 * k2 - k1 * k1) * ph[1][s] - 2.0 * k1 * k2 * ph[2][s];
      rhs_hat[s] = -divdiv + q;
    }
  }
  Spectrum phat = inv_laplacian_hat(g, rhs_hat);
  for (auto& c : phat) c = -c;
  Pressure out{ScalarField(g), ScalarField(g)};
  g.inverse(phat, out.P_hat.values());
  Spectrum pfull = phat;
  for (std::size_t s = 1; s < pfull.size(); ++s) pfull[s] += ph[0][s];
  g.inverse(pfull, out.P.values());
  return out;
}

double bilinear(const std::vector<double>& values, const Grid2& grid, double x1, double x2) {
  const int n = grid.n();
  const double h = grid.spacing();
  const double L = grid.length();
  x1 = std::fmod(x1, L);
  if (x1 < 0.0) x1 += L;
  x2 = std::fmod(x2, L);
  if (x2 < 0.0) x2 += L;
  const double s1 = x1 / h, s2 = x2 / h;
  int i0 = static_cast<int>(std::floor(s1));
  int j0 = static_cast<int>(std::floor(s2));
  const double f1 = s1 - i0, f2 = s2 - j0;
  i0 %= n;
  j0 %= n;
  const int i1 = (i0 + 1) % n, j1 = (j0 + 1) % n;
  auto at = [&](int i, int j) { return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + j]; };
  return (1.0 - f1) * ((1.0 - f2) * at(i0, j0) + f2 * at(i0, j1)) + f1 * ((1.0 - f2) * at(i1, j0) + f2 * at(i1, j1));
}

MatrixField2 flow_map_oracle(std::span<const VelocitySnapshot> snapshots, double t0, double t1,
                             const Grid2& seed_grid, const FlowMapOptions& options) {
  if (snapshots.empty()) throw Error(Errc::EmptyWindow, "flow_map_oracle: no velocity snapshots");
  if (!(t1 >= t0)) throw Error(Errc::InvalidArgument, "flow_map_oracle: t1 < t0");
  if (options.substeps < 1 || options.refine < 1)
    throw Error(Errc::InvalidArgument, "flow_map_oracle: substeps and refine must be >= 1");
  std::vector<const VelocitySnapshot*> snaps;
  for (const auto& s : snapshots) snaps.push_back(&s);
  std::sort(snaps.begin(), snaps.end(), [](auto* a, auto* b) { return a->t < b->t; });
  const double tol = 1e-12 * std::max(1.0, std::abs(t1));
  if (snaps.front()->t > t0 + tol || snaps.back()->t < t1 - tol) {
    throw Error(Errc::EmptyWindow, "flow_map_oracle: snapshots do not cover the time window");
  }
  for (const auto* s : snaps)
    if (s->u.grid().length() != seed_grid.length())
      throw Error(Errc::GridMismatch, "flow_map_oracle: snapshot box differs from the seed grid");

  const Grid2& vg0 = snaps.front()->u.grid();
  const Grid2 vgrid = options.refine == 1 ? vg0 : Grid2(vg0.n() * options.refine, vg0.length());
  auto prepare = [&](const VelocitySnapshot* s) {
    return options.refine == 1 ? s->u : resample(s->u, vgrid);
  };

  const std::size_t ns = seed_grid.size();
  const auto n = static_cast<std::size_t>(seed_grid.n());
  std::vector<double> x1(ns), x2(ns);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      x1[i * n + j] = seed_grid.coord(i);
      x2[i * n + j] = seed_grid.coord(j);
    }

  // trace the seeds backwards through the snapshot intervals overlapping [t0, t1]
  std::size_t k = snaps.size() - 1;
  while (k > 0 && snaps[k - 1]->t >= t1) --k;
  VectorField2 ub = prepare(snaps[k]);
  double tb = snaps[k]->t;
  while (k > 0 && tb > t0) {
    VectorField2 ua = prepare(snaps[k - 1]);
    const double ta = snaps[k - 1]->t;
    const double lo = std::max(ta, t0), hi = std::min(tb, t1);
    if (hi > lo && tb > ta) {
      auto vel = [&](double px, double py, double t, double& v1, double& v2) {
        const double w = (t - ta) / (tb - ta);
        v1 = (1.0 - w) * bilinear(ua.comp(0), vgrid, px, py) + w * bilinear(ub.comp(0), vgrid, px, py);
        v2 = (1.0 - w) * bilinear(ua.comp(1), vgrid, px, py) + w * bilinear(ub.comp(1), vgrid, px, py);
      };
      const double h = -(hi - lo) / options.substeps;
      for (std::size_t q = 0; q < ns; ++q) {
        double px = x1[q], py = x2[q];
        for (int m = 0; m < options.substeps; ++m) {
          const double t = hi + m * h;
          double a1, a2, b1, b2, c1, c2, d1, d2;
          vel(px, py, t, a1, a2);
          vel(px + 0.5 * h * a1, py + 0.5 * h * a2, t + 0.5 * h, b1, b2);
          vel(px + 0.5 * h * b1, py + 0.5 * h * b2, t + 0.5 * h, c1, c2);
          vel(px + h * c1, py + h * c2, t + h, d1, d2);
          px += h / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1);
          py += h / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2);
        }
        x1[q] = px;
        x2[q] = py;
      }
    }
    ub = std::move(ua);
    tb = ta;
    --k;
  }

  // F = (I + centered differences of the periodic back-displacement)^{-1}
  MatrixField2 F(seed_grid);
  const double hs = seed_grid.spacing();
  auto disp1 = [&](std::size_t i, std::size_t j) { return x1[i * n + j] - seed_grid.coord(i); };
  auto disp2 = [&](std::size_t i, std::size_t j) { return x2[i * n + j] - seed_grid.coord(j); };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t jp = (j + 1) % n, jm = (j + n - 1) % n;
      const Mat2 back{1.0 + (disp1(ip, j) - disp1(im, j)) / (2.0 * hs), (disp1(i, jp) - disp1(i, jm)) / (2.0 * hs),
                      (disp2(ip, j) - disp2(im, j)) / (2.0 * hs), 1.0 + (disp2(i, jp) - disp2(i, jm)) / (2.0 * hs)};
      F.set(i * n + j, back.cofactor().transpose() * (1.0 / back.det()));
    }
  }
  return F;
}

}  // namespace visco
