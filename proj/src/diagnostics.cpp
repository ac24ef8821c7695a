#include "visco/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "visco/error.hpp"

namespace visco {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

using Plane = std::vector<double>;

// d[c][l] = d_l of component c, spectral.
template <std::size_t C>
std::array<std::array<Plane, 2>, C> gradients(const Field<C>& f) {
  const Grid2& g = f.grid();
  std::array<std::array<Plane, 2>, C> d;
  for (std::size_t c = 0; c < C; ++c) {
    const Spectrum s = g.forward(f.comp(c));
    for (int l = 0; l < 2; ++l) d[c][l] = g.inverse(deriv_hat(g, s, l + 1));
  }
  return d;
}

Mat2 grad_F_at(const std::array<std::array<Plane, 2>, 4>& gF, int l, std::size_t p) {
  return {gF[0][l][p], gF[1][l][p], gF[2][l][p], gF[3][l][p]};
}

Mat2 grad_u_at(const std::array<std::array<Plane, 2>, 2>& gu, std::size_t p) {
  return {gu[0][0][p], gu[0][1][p], gu[1][0][p], gu[1][1][p]};
}

double quad(const Grid2& g, double sum) { return sum * g.spacing() * g.spacing(); }

double l2_of(const Grid2& g, const Plane& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(quad(g, s));
}

Mat2 symmetric_stress(const Mat2& F, double delta) {
  const Mat2 G = F - Mat2::identity();
  Mat2 s = F * F.transpose();
  if (delta != 0.0) s = s + (G * F.transpose() + F * G.transpose()) * (delta * G.frob_sq());
  const double off = 0.5 * (s.a12 + s.a21);
  s.a12 = off;
  s.a21 = off;
  return s;
}

void require_sequence(const State& a, const State& b, const char* what) {
  if (!(a.grid() == b.grid())) throw Error(Errc::WindowMismatch, std::string(what) + ": states on different grids");
  if (!(b.t > a.t)) throw Error(Errc::WindowMismatch, std::string(what) + ": times must increase");
}

// Spectra of the dealiased stress Pi fields.
std::array<Spectrum, 3> pi_hat(const MatrixField2& F, double delta) {
  const Grid2& g = F.grid();
  std::array<Plane, 3> pi;
  for (auto& a : pi) a.resize(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Mat2 s = symmetric_stress(F.at(p), delta);
    pi[0][p] = 0.5 * (s.a11 + s.a22);
    pi[1][p] = 0.5 * (s.a11 - s.a22);
    pi[2][p] = s.a12;
  }
  std::array<Spectrum, 3> out;
  for (std::size_t c = 0; c < 3; ++c) {
    out[c] = g.forward(pi[c]);
    dealias_hat(g, out[c]);
  }
  return out;
}

// (d1^2 - d2^2) Pi2 + 2 d1 d2 Pi3 and 2 d1 d2 Pi2 + (d2^2 - d1^2) Pi3.
std::pair<Spectrum, Spectrum> pi_second_derivatives(const Grid2& g, const std::array<Spectrum, 3>& ph) {
  Spectrum q(g.spectral_size()), r(g.spectral_size());
  const auto n = static_cast<std::size_t>(g.n());
  const std::size_t half = g.half();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < half; ++b) {
      const std::size_t s = a * half + b;
      const double k1 = g.k1(a), k2 = g.k2(b);
      q[s] = (k2 * k2 - k1 * k1) * ph[1][s] - 2.0 * k1 * k2 * ph[2][s];
      r[s] = -2.0 * k1 * k2 * ph[1][s] + (k1 * k1 - k2 * k2) * ph[2][s];
    }
  }
  return {q, r};
}

// Dealiased u.grad u.
VectorField2 convection(const VectorField2& u) {
  const auto gu = gradients(u);
  VectorField2 c(u.grid());
  for (std::size_t p = 0; p < u.size(); ++p) {
    const double u1 = u.comp(0)[p], u2 = u.comp(1)[p];
    for (std::size_t i = 0; i < 2; ++i) c.comp(i)[p] = u1 * gu[i][0][p] + u2 * gu[i][1][p];
  }
  return dealias(c);
}

// Delta G - grad P a, where a stands for dt u + u.grad u.
MatrixField2 flux_defect(const State& state, const VectorField2& dudt, const ModelParams& params) {
  const Grid2& g = state.grid();
  VectorField2 a = dudt + convection(state.u);
  a = leray_project(a);
  const MatrixField2 ga = grad(a);
  const FluxSet flux = effective_flux(state, params);
  MatrixField2 out(g);
  for (std::size_t c = 0; c < 4; ++c) {
    const Spectrum lap = laplacian_hat(g, g.forward(flux.G.comp(c)));
    g.inverse(lap, out.comp(c));
    for (std::size_t p = 0; p < g.size(); ++p) out.comp(c)[p] -= ga.comp(c)[p];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

EnergyReport energy_report(const State& state, const ModelParams& params) {
  const Grid2& g = state.grid();
  const auto gu = gradients(state.u);
  const auto gF = gradients(state.F);
  const double d = params.delta;
  double kin = 0.0, el = 0.0, del = 0.0, dmu = 0.0, deta = 0.0, dG2 = 0.0, dGG = 0.0, work = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec2 u = state.u.at(p);
    const Mat2 F = state.F.at(p);
    const Mat2 G = F - Mat2::identity();
    const double g2 = G.frob_sq();
    kin += u.norm_sq();
    el += g2;
    del += g2 * g2;
    const Mat2 Du = grad_u_at(gu, p);
    dmu += Du.frob_sq();
    double gradF2 = 0.0, gdotg2 = 0.0;
    for (int l = 0; l < 2; ++l) {
      const Mat2 dF = grad_F_at(gF, l, p);
      gradF2 += dF.frob_sq();
      const double gd = G.ddot(dF);
      gdotg2 += gd * gd;
    }
    deta += gradF2;
    dG2 += g2 * gradF2;
    dGG += gdotg2;
    const Mat2 S = (G * (1.0 + 2.0 * d * g2)) * F.transpose();
    work += Du.ddot(S - symmetric_stress(F, d));
  }
  EnergyReport r;
  r.kinetic = 0.5 * quad(g, kin);
  r.elastic = 0.5 * quad(g, el);
  r.delta_elastic = 0.5 * d * quad(g, del);
  r.dissipation_mu = params.mu * quad(g, dmu);
  r.dissipation_eta = params.eta * quad(g, deta);
  r.dissipation_delta = 2.0 * d * params.eta * (quad(g, dG2) + quad(g, dGG));
  r.dissipation_rate = r.dissipation_mu + r.dissipation_eta + r.dissipation_delta;
  r.energy_rate = -(r.dissipation_mu + r.dissipation_eta + 2.0 * d * params.eta * quad(g, dG2) +
                    4.0 * d * params.eta * quad(g, dGG)) +
                  quad(g, work);
  return r;
}

Mat2 moment(const MatrixField2& F) {
  Mat2 m;
  double* out[4] = {&m.a11, &m.a12, &m.a21, &m.a22};
  const double id[4] = {1.0, 0.0, 0.0, 1.0};
  for (std::size_t c = 0; c < 4; ++c) {
    double s = 0.0;
    for (double v : F.comp(c)) s += v - id[c];
    *out[c] = quad(F.grid(), s);
  }
  return m;
}

ConstraintReport constraint_residuals(const State& state, const Mat2& initial_moment) {
  const Grid2& g = state.grid();
  const auto gF = gradients(state.F);
  ConstraintReport r;
  r.res_divFT = l2_norm(div_matT(state.F));
  std::array<Plane, 2> piola{Plane(g.size()), Plane(g.size())};
  Plane det(g.size());
  r.tr_tau_min = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Mat2 F = state.F.at(p);
    for (std::size_t i = 0; i < 2; ++i) {
      double s = 0.0;
      for (int l = 0; l < 2; ++l) {
        const double Fl1 = state.F.entry(l, 0)[p], Fl2 = state.F.entry(l, 1)[p];
        s += Fl2 * gF[2 * i][l][p] - Fl1 * gF[2 * i + 1][l][p];
      }
      piola[i][p] = s;
    }
    det[p] = F.det() - 1.0;
    r.res_detF_linf = std::max(r.res_detF_linf, std::abs(det[p]));
    r.tr_tau_min = std::min(r.tr_tau_min, F.frob_sq());
  }
  r.res_piola = std::max(l2_of(g, piola[0]), l2_of(g, piola[1]));
  r.res_detF = l2_of(g, det);
  r.moment_drift = (moment(state.F) - initial_moment).frob();
  return r;
}

double pi_identity_residual(const State& state) {
  const Grid2& g = state.grid();
  const MatrixField2& F = state.F;
  const auto gF = gradients(F);
  VectorField2 lhs(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    for (std::size_t i = 0; i < 2; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 2; ++k)
          s += gF[2 * i + k][j][p] * F.entry(j, k)[p] + F.entry(i, k)[p] * gF[2 * j + k][j][p];
      lhs.comp(i)[p] = s;
    }
  }
  lhs = dealias(lhs);
  const auto ph = pi_hat(F, 0.0);
  Spectrum r1(g.spectral_size()), r2(g.spectral_size());
  const Spectrum d1p1 = deriv_hat(g, ph[0], 1), d2p1 = deriv_hat(g, ph[0], 2);
  const Spectrum d1p2 = deriv_hat(g, ph[1], 1), d2p2 = deriv_hat(g, ph[1], 2);
  const Spectrum d1p3 = deriv_hat(g, ph[2], 1), d2p3 = deriv_hat(g, ph[2], 2);
  for (std::size_t s = 0; s < r1.size(); ++s) {
    r1[s] = d1p1[s] + d1p2[s] + d2p3[s];
    r2[s] = d2p1[s] + d1p3[s] - d2p2[s];
  }
  const Plane rhs1 = g.inverse(r1), rhs2 = g.inverse(r2);
  double sum = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double a = lhs.comp(0)[p] - rhs1[p], b = lhs.comp(1)[p] - rhs2[p];
    sum += a * a + b * b;
  }
  return std::sqrt(quad(g, sum));
}

double tau_evolution_residual(const State& prev, const State& next) {
  require_sequence(prev, next, "tau_evolution_residual");
  const Grid2& g = prev.grid();
  const double dt = next.t - prev.t;
  std::array<Plane, 4> res;
  for (auto& r : res) r.assign(g.size(), 0.0);
  for (const State* s : {&prev, &next}) {
    const double sign = s == &prev ? -1.0 : 1.0;
    const auto gu = gradients(s->u);
    const auto gF = gradients(s->F);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Mat2 F = s->F.at(p);
      const Mat2 tau = F * F.transpose();
      const Mat2 Du = grad_u_at(gu, p);
      const Vec2 u = s->u.at(p);
      Mat2 adv;
      for (int l = 0; l < 2; ++l) {
        const Mat2 dF = grad_F_at(gF, l, p);
        const Mat2 dtau = dF * F.transpose() + F * dF.transpose();
        adv = adv + dtau * (l == 0 ? u.x : u.y);
      }
      const Mat2 spatial = adv - Du * tau - tau * Du.transpose();
      const Mat2 r = tau * (sign / dt) + spatial * 0.5;
      res[0][p] += r.a11;
      res[1][p] += r.a12;
      res[2][p] += r.a21;
      res[3][p] += r.a22;
    }
  }
  double sum = 0.0;
  for (const auto& r : res)
    for (double v : r) sum += v * v;
  return std::sqrt(quad(g, sum));
}

PiFields pi_fields(const MatrixField2& F, double delta) {
  const Grid2& g = F.grid();
  const auto ph = pi_hat(F, delta);
  PiFields out{ScalarField(g), ScalarField(g), ScalarField(g)};
  g.inverse(ph[0], out.pi1.values());
  g.inverse(ph[1], out.pi2.values());
  g.inverse(ph[2], out.pi3.values());
  return out;
}

FluxSet effective_flux(const State& state, const ModelParams& params) {
  const Grid2& g = state.grid();
  const double mu = params.mu;
  FluxSet out(g);

  const MatrixField2 sigma = elastic_stress(state.F, params.delta);
  std::array<Spectrum, 4> sh;
  for (std::size_t c = 0; c < 4; ++c) sh[c] = g.forward(sigma.comp(c));
  Spectrum w1(g.spectral_size()), w2(g.spectral_size());
  {
    const Spectrum a = deriv_hat(g, sh[0], 1), b = deriv_hat(g, sh[1], 2);
    const Spectrum c = deriv_hat(g, sh[2], 1), d = deriv_hat(g, sh[3], 2);
    for (std::size_t s = 0; s < w1.size(); ++s) {
      w1[s] = a[s] + b[s];
      w2[s] = c[s] + d[s];
    }
  }
  leray_hat(g, w1, w2);
  const MatrixField2 gu = grad(state.u);
  const Spectrum* w[2] = {&w1, &w2};
  for (std::size_t i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const Plane corr = g.inverse(inv_laplacian_hat(g, deriv_hat(g, *w[i], j + 1)));
      Plane& G = out.G.comp(2 * i + static_cast<std::size_t>(j));
      for (std::size_t p = 0; p < g.size(); ++p) G[p] = mu * gu.comp(2 * i + static_cast<std::size_t>(j))[p] - corr[p];
    }
  }

  const auto ph = pi_hat(state.F, params.delta);
  const auto [q, r] = pi_second_derivatives(g, ph);
  const Plane invq = g.inverse(inv_laplacian_hat(g, q));
  const Plane invr = g.inverse(inv_laplacian_hat(g, r));
  const Plane pi2 = g.inverse(ph[1]), pi3 = g.inverse(ph[2]);
  const ScalarField omega = curl(state.u);
  const ScalarField p_hat = pressure(state, params.delta).P_hat;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double w = mu * omega[p];
    const double shear = gu.comp(1)[p] + gu.comp(2)[p];   // d1 u2 + d2 u1
    const double strain = gu.comp(0)[p] - gu.comp(3)[p];  // d1 u1 - d2 u2
    out.G1[p] = w - invr[p];
    out.G1_tilde[p] = kSqrt2 * w + invq[p];
    out.G1_hat[p] = kSqrt2 * w - p_hat[p];
    out.G2[p] = mu * (kSqrt2 * shear + strain) + pi2[p];
    out.G3[p] = mu * (shear - kSqrt2 * strain) + pi3[p];
  }
  return out;
}

MatrixField2 flux_identity_defect(const State& state, const ModelParams& params) {
  return flux_defect(state, rhs(state, params).du, params);
}

MatrixField2 flux_identity_defect(const State& prev, const State& state, const State& next,
                                  const ModelParams& params) {
  require_sequence(prev, state, "flux_identity_defect");
  require_sequence(state, next, "flux_identity_defect");
  VectorField2 dudt = next.u - prev.u;
  dudt *= 1.0 / (next.t - prev.t);
  return flux_defect(state, dudt, params);
}

double flux_identity_residual(const State& state, const ModelParams& params) {
  return l2_norm(flux_identity_defect(state, params));
}

double flux_identity_residual(const State& prev, const State& state, const State& next,
                              const ModelParams& params) {
  return l2_norm(flux_identity_defect(prev, state, next, params));
}

PressureForms pressure_forms(const State& state, const BallMask& mask, const ModelParams& params) {
  const Grid2& g = state.grid();
  if (!(mask.grid() == g)) throw Error(Errc::GridMismatch, "pressure_forms: mask on a different grid");
  const ScalarField P = pressure(state, params.delta).P;
  const VectorField2 divs = div_mat(elastic_stress(state.F, params.delta));
  VectorField2 f = grad(P);
  f -= divs;
  PressureForms out{inv_laplacian(div(f)), mean_zero(P, mask)};
  const auto ph = pi_hat(state.F, params.delta);
  const auto qr = pi_second_derivatives(g, ph);
  const Plane invq = g.inverse(inv_laplacian_hat(g, qr.first));
  const Plane pi1 = g.inverse(ph[0]);
  for (std::size_t p = 0; p < g.size(); ++p) out.B[p] += invq[p] - pi1[p];
  return out;
}

double renorm_residual(const State& prev, const State& next, double k) {
  require_sequence(prev, next, "renorm_residual");
  const Grid2& g = prev.grid();
  const double h = g.spacing();
  const double dt = next.t - prev.t;
  Plane res(g.size(), 0.0);
  std::vector<char> excluded(g.size(), 0);
  for (const State* s : {&prev, &next}) {
    const double sign = s == &prev ? -1.0 : 1.0;
    const auto gu = gradients(s->u);
    const auto gF = gradients(s->F);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Mat2 F = s->F.at(p);
      const double z = F.frob();
      if (std::abs(z - k) <= h) excluded[p] = 1;
      const double b = truncate_tk(z, k);
      const double dT = truncate_tk_derivative(z, k);
      double transport = 0.0, source = 0.0;
      if (dT != 0.0) {
        const Vec2 u = s->u.at(p);
        const double g1 = F.ddot(grad_F_at(gF, 0, p)) / z;
        const double g2 = F.ddot(grad_F_at(gF, 1, p)) / z;
        transport = dT * (u.x * g1 + u.y * g2);
        source = dT * grad_u_at(gu, p).ddot(F * F.transpose()) / z;
      }
      res[p] += sign * b / dt + 0.5 * (transport - source);
    }
  }
  double sum = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p)
    if (!excluded[p]) sum += res[p] * res[p];
  return std::sqrt(quad(g, sum));
}

IntegrabilityReport integrability_report(std::span<const State> snapshots, const BallMask& mask, double t0,
                                         double t1, const ModelParams& params) {
  std::vector<TimedField> f, trtau, pa, e;
  for (const State& s : snapshots) {
    const Grid2& g = s.grid();
    ScalarField nf(g), nt(g), ne(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Mat2 F = s.F.at(p);
      nf[p] = F.frob();
      nt[p] = F.frob_sq();
      ne[p] = (F - Mat2::identity()).frob();
    }
    f.push_back({s.t, std::move(nf)});
    trtau.push_back({s.t, std::move(nt)});
    e.push_back({s.t, std::move(ne)});
    pa.push_back({s.t, mean_zero(pressure(s, params.delta).P, mask)});
  }
  IntegrabilityReport r;
  r.norm_F_L3 = local_lp_norm(f, mask, 3.0, t0, t1);
  r.norm_trtau_L32 = local_lp_norm(trtau, mask, 1.5, t0, t1);
  r.norm_Pa_L32 = local_lp_norm(pa, mask, 1.5, t0, t1);
  r.norm_E_L4 = local_lp_norm(e, mask, 4.0, t0, t1);
  return r;
}

PerturbationReport perturbation_report(const State& state) {
  PerturbationReport r;
  r.bound_margin = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < state.F.size(); ++p) {
    const Mat2 E = state.F.at(p) - Mat2::identity();
    r.linf_E = std::max(r.linf_E, E.frob());
    r.linf_E11mE22 = std::max(r.linf_E11mE22, std::abs(E.a11 - E.a22));
    r.linf_E12pE21 = std::max(r.linf_E12pE21, std::abs(E.a12 + E.a21));
    const BoundPair b = perturbation_bound(E);
    r.bound_margin = std::min(r.bound_margin, b.rhs - b.lhs);
  }
  return r;
}

DetFUniformReport detf_uniform_report(std::span<const State> snapshots, const ModelParams& params) {
  if (snapshots.empty()) throw Error(Errc::EmptyWindow, "detf_uniform_report: no snapshots");
  DetFUniformReport r;
  std::vector<std::pair<double, double>> grad_sq;
  for (const State& s : snapshots) {
    const Grid2& g = s.grid();
    const auto gF = gradients(s.F);
    double d2 = 0.0, gd2 = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Mat2 F = s.F.at(p);
      const double d = F.det() - 1.0;
      d2 += d * d;
      for (int l = 0; l < 2; ++l) {
        const Mat2 dF = grad_F_at(gF, l, p);
        const double gd = dF.ddot(F.cofactor());
        gd2 += gd * gd;
      }
    }
    r.sup_L2_detF_minus_1 = std::max(r.sup_L2_detF_minus_1, std::sqrt(quad(g, d2)));
    grad_sq.emplace_back(s.t, quad(g, gd2));
  }
  double integral_t = grad_sq.front().second;
  if (grad_sq.size() > 1) {
    integral_t = 0.0;
    for (std::size_t m = 1; m < grad_sq.size(); ++m)
      integral_t += 0.5 * (grad_sq[m].first - grad_sq[m - 1].first) * (grad_sq[m].second + grad_sq[m - 1].second);
  }
  r.sqrt_eta_gradL2 = std::sqrt(params.eta) * std::sqrt(integral_t);
  return r;
}

// ---------------------------------------------------------------------------

DiagnosticsRecord measure(const State& state, const ModelParams& params, const Mat2& initial_moment,
                          const State* prev, std::span<const double> k_list) {
  DiagnosticsRecord rec;
  rec.t = state.t;
  rec.energy = energy_report(state, params);
  rec.constraints = constraint_residuals(state, initial_moment);
  const FluxSet flux = effective_flux(state, params);
  rec.flux_G = l2_norm(flux.G);
  rec.flux_G1 = l2_norm(flux.G1);
  rec.flux_G1_tilde = l2_norm(flux.G1_tilde);
  rec.flux_G1_hat = l2_norm(flux.G1_hat);
  rec.flux_G2 = l2_norm(flux.G2);
  rec.flux_G3 = l2_norm(flux.G3);
  const PerturbationReport pr = perturbation_report(state);
  rec.perturb_linf_E11mE22 = pr.linf_E11mE22;
  rec.perturb_linf_E12pE21 = pr.linf_E12pE21;
  for (double k : k_list) rec.renorm.push_back(prev ? renorm_residual(*prev, state, k) : 0.0);
  return rec;
}

const std::vector<std::string>& diagnostics_base_columns() {
  static const std::vector<std::string> cols = {
      "t",           "kinetic",       "elastic",          "delta_elastic",        "dissipation_rate",
      "dissipation_mu", "dissipation_eta", "dissipation_delta", "energy_rate",      "res_divFT",
      "res_piola",   "res_detF",      "res_detF_linf",    "moment_drift",         "tr_tau_min",
      "flux_G",      "flux_G1",       "flux_G1_tilde",    "flux_G1_hat",          "flux_G2",
      "flux_G3",     "perturb_linf_E11mE22", "perturb_linf_E12pE21"};
  return cols;
}

std::string renorm_column(double k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "renorm_k%g", k);
  return buf;
}

std::vector<std::string> diagnostics_columns(std::span<const double> k_list) {
  std::vector<std::string> cols = diagnostics_base_columns();
  for (double k : k_list) cols.push_back(renorm_column(k));
  return cols;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticsRecord> rows,
                           std::span<const double> k_list) {
  const auto cols = diagnostics_columns(k_list);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const DiagnosticsRecord& r : rows) {
    if (r.renorm.size() != k_list.size())
      throw Error(Errc::InvalidArgument, "write_diagnostics_csv: record does not match k list");
    const auto& e = r.energy;
    const auto& c = r.constraints;
    std::vector<double> v = {r.t,
                             e.kinetic,
                             e.elastic,
                             e.delta_elastic,
                             e.dissipation_rate,
                             e.dissipation_mu,
                             e.dissipation_eta,
                             e.dissipation_delta,
                             e.energy_rate,
                             c.res_divFT,
                             c.res_piola,
                             c.res_detF,
                             c.res_detF_linf,
                             c.moment_drift,
                             c.tr_tau_min,
                             r.flux_G,
                             r.flux_G1,
                             r.flux_G1_tilde,
                             r.flux_G1_hat,
                             r.flux_G2,
                             r.flux_G3,
                             r.perturb_linf_E11mE22,
                             r.perturb_linf_E12pE21};
    v.insert(v.end(), r.renorm.begin(), r.renorm.end());
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_g17(v[i]);
    out << '\n';
  }
}

std::size_t DiagnosticsTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(Errc::MissingArtifacts, "diagnostics: no column " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

DiagnosticsTable read_diagnostics_csv(std::istream& in) {
  DiagnosticsTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::IoError, "diagnostics csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.columns = split_csv(line);
  const auto& base = diagnostics_base_columns();
  if (table.columns.size() < base.size() || !std::equal(base.begin(), base.end(), table.columns.begin()))
    throw Error(Errc::IoError, "diagnostics csv: unexpected header");
  for (std::size_t c = base.size(); c < table.columns.size(); ++c)
    if (table.columns[c].rfind("renorm_k", 0) != 0)
      throw Error(Errc::IoError, "diagnostics csv: unexpected column " + table.columns[c]);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != table.columns.size())
      throw Error(Errc::IoError, "diagnostics csv: wrong cell count on line " + std::to_string(lineno));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size())
        throw Error(Errc::IoError, "diagnostics csv: bad number '" + cell + "' on line " + std::to_string(lineno));
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

DiagnosticsTable read_diagnostics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingArtifacts, "cannot open " + path.string());
  return read_diagnostics_csv(in);
}

}  // namespace visco
