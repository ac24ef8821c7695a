#include "visco/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "visco/snapshot_io.hpp"

namespace visco {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Single runs

State integrate(const RunConfig& cfg, const StepObserver& observe) {
  cfg.validate();
  const Grid2 g(cfg.n, cfg.length);
  State s = init(cfg.init, g);
  if (observe) observe(s, 0);
  const long steps = cfg.step_count();
  for (long m = 1; m <= steps; ++m) {
    const double t_next = m == steps ? cfg.t_end : static_cast<double>(m) * cfg.dt;
    s = step(s, t_next - s.t, cfg.params, cfg.cfl);
    s.t = t_next;
    if (observe) observe(s, m);
  }
  return s;
}

namespace {

bool on_cadence(long m, long steps, int every) { return m == 0 || m == steps || (every > 0 && m % every == 0); }

std::string snapshot_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%08ld.vel2", step);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

}  // namespace

RunSeries simulate(const RunConfig& cfg) {
  RunSeries out{cfg, {}};
  const long steps = cfg.step_count();
  integrate(cfg, [&](const State& s, long m) {
    if (on_cadence(m, steps, cfg.snapshot_every)) out.snapshots.push_back(s);
  });
  return out;
}

RunOutcome run_simulation(const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = cfg.output_dir;
  const fs::path snaps = dir / "snapshots";
  fs::create_directories(snaps);
  for (const auto& entry : fs::directory_iterator(snaps))
    if (entry.path().extension() == ".vel2") fs::remove(entry.path());

  RunOutcome out;
  write_text(dir / "config.txt", to_config_text(cfg));
  out.files.emplace_back("config.txt");

  const long steps = cfg.step_count();
  std::vector<DiagnosticsRecord> rows;
  std::unique_ptr<State> prev;
  Mat2 moment0;
  auto flush_csv = [&] {
    std::ofstream csv(dir / "diagnostics.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw Error(Errc::IoError, "cannot write " + (dir / "diagnostics.csv").string());
    write_diagnostics_csv(csv, rows, cfg.analysis.k_list);
  };
  try {
    integrate(cfg, [&](const State& s, long m) {
      if (m == 0) moment0 = moment(s.F);
      if (on_cadence(m, steps, cfg.snapshot_every)) {
        const fs::path rel = fs::path("snapshots") / snapshot_name(m);
        write_snapshot(dir / rel, s, cfg.params);
        out.files.push_back(rel);
      }
      if (on_cadence(m, steps, cfg.diagnostics_every)) {
        rows.push_back(measure(s, cfg.params, moment0, prev.get(), cfg.analysis.k_list));
        prev = std::make_unique<State>(s);
      }
      out.steps = m;
      out.t_final = s.t;
    });
  } catch (...) {
    flush_csv();
    throw;
  }
  flush_csv();
  out.files.emplace_back("diagnostics.csv");
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RunSeries load_run(const fs::path& dir) {
  const fs::path cfg_path = dir / "config.txt";
  if (!fs::exists(cfg_path)) throw Error(Errc::MissingArtifacts, "missing " + cfg_path.string());
  RunSeries run{run_config_from(parse_config_file(cfg_path)), {}};
  const fs::path snaps = dir / "snapshots";
  if (!fs::is_directory(snaps)) throw Error(Errc::MissingArtifacts, "missing " + snaps.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(snaps))
    if (entry.path().extension() == ".vel2") files.push_back(entry.path());
  if (files.empty()) throw Error(Errc::MissingArtifacts, "no snapshots in " + snaps.string());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) run.snapshots.push_back(read_snapshot(f).state);
  return run;
}

OracleComparison compare_flow_map(const RunConfig& cfg, const FlowMapOptions& options) {
  std::vector<VelocitySnapshot> velocity;
  const State last = integrate(cfg, [&](const State& s, long) { velocity.push_back({s.t, s.u}); });
  const MatrixField2 oracle = flow_map_oracle(velocity, 0.0, last.t, last.grid(), options);
  MatrixField2 diff(last.grid()), dev(last.grid());
  for (std::size_t p = 0; p < diff.size(); ++p) {
    diff.set(p, last.F.at(p) - oracle.at(p));
    dev.set(p, last.F.at(p) - Mat2::identity());
  }
  return {l2_norm(diff), l2_norm(dev), linf_norm(diff)};
}

// ---------------------------------------------------------------------------
// Families

int worker_count(const RunFamily& family) {
  int w = family.workers > 0 ? family.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("VISCO_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) w = std::min<long>(w, cap);
  }
  return std::max(1, std::min<int>(w, static_cast<int>(family.values.size())));
}

std::string sha256_hex(const fs::path& file) {
  const auto bytes = read_file_bytes(file);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error(Errc::IoError, "sha256 failed for " + file.string());
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

std::string family_config_text(const RunFamily& f) {
  std::string text = to_config_text(f.base);
  text += "family.workers=" + std::to_string(f.workers) + "\n";
  text += sweep_key(f.kind) + "=";
  for (std::size_t i = 0; i < f.values.size(); ++i) text += (i ? "," : "") + format_g17(f.values[i]);
  return text + "\n";
}

}  // namespace

RunFamily load_family_config(const fs::path& root) {
  const fs::path path = root / "family.cfg";
  if (!fs::exists(path)) throw Error(Errc::MissingArtifacts, "missing " + path.string());
  RunFamily f = run_family_from(parse_config_file(path));
  f.base.output_dir = root;
  return f;
}

std::vector<RunRecord> run_family(const RunFamily& family) {
  family.validate();
  const fs::path root = family.base.output_dir;
  fs::create_directories(root);
  write_text(root / "family.cfg", family_config_text(family));

  const std::vector<RunConfig> runs = family.runs();
  std::vector<RunRecord> records(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      RunRecord& r = records[i];
      r.index = i;
      try {
        r.outcome = run_simulation(runs[i]);
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < worker_count(family); ++w) pool.emplace_back(worker);
  }

  nlohmann::json manifest;
  manifest["sweep"] = to_string(family.kind);
  manifest["values"] = family.values;
  manifest["reference"] = family.reference_index();
  manifest["runs"] = nlohmann::json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunRecord& r = records[i];
    nlohmann::json j;
    j["index"] = i;
    j["dir"] = runs[i].output_dir.filename().string();
    j["config"] = to_config_text(runs[i]);
    j["status"] = r.ok ? "ok" : "failed";
    if (!r.ok) j["error"] = r.error;
    j["steps"] = r.outcome.steps;
    j["wall_seconds"] = r.outcome.wall_seconds;
    nlohmann::json files = nlohmann::json::array();
    if (r.ok)
      for (const auto& f : r.outcome.files)
        files.push_back({{"path", f.generic_string()}, {"sha256", sha256_hex(runs[i].output_dir / f)}});
    j["files"] = files;
    manifest["runs"].push_back(j);
  }
  write_text(root / "manifest.json", manifest.dump(2) + "\n");
  return records;
}

// ---------------------------------------------------------------------------
// Convergence diagnostics

namespace {

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

struct Pair {
  double t;
  MatrixField2 F;      // run, on the reference grid
  const State* ref;
};

std::vector<Pair> pair_with_reference(const RunSeries& run, const RunSeries& ref, double t0, double t1) {
  std::vector<Pair> out;
  const double tol = 1e-12 * std::max(1.0, std::abs(t1));
  for (const State& s : run.snapshots) {
    if (s.t < t0 - tol || s.t > t1 + tol) continue;
    for (const State& r : ref.snapshots) {
      if (!same_time(s.t, r.t)) continue;
      if (s.grid().length() != r.grid().length()) throw Error(Errc::GridMismatch, "runs use different boxes");
      out.push_back({s.t, s.grid() == r.grid() ? s.F : resample(s.F, r.grid()), &r});
      break;
    }
  }
  if (out.empty()) throw Error(Errc::EmptyWindow, "no snapshot pairs with the reference in the window");
  return out;
}

ScalarField frob_field(const MatrixField2& F) {
  ScalarField out(F.grid());
  for (std::size_t p = 0; p < F.size(); ++p) out[p] = F.at(p).frob();
  return out;
}

void check_reference(std::span<const RunSeries> runs, std::size_t reference, const BallMask& mask) {
  if (reference >= runs.size()) throw Error(Errc::InvalidArgument, "reference index out of range");
  if (runs[reference].snapshots.empty()) throw Error(Errc::EmptyWindow, "reference run has no snapshots");
  if (!(mask.grid() == runs[reference].snapshots.front().grid()))
    throw Error(Errc::GridMismatch, "mask must live on the reference grid");
}

}  // namespace

DefectReport osc_defect(std::span<const RunSeries> runs, std::size_t reference, const BallMask& mask, double t0,
                        double t1, std::span<const double> k_list) {
  check_reference(runs, reference, mask);
  DefectReport rep;
  rep.k_list.assign(k_list.begin(), k_list.end());
  rep.reference = reference;
  for (const RunSeries& run : runs) {
    const auto pairs = pair_with_reference(run, runs[reference], t0, t1);
    std::vector<std::pair<ScalarField, ScalarField>> mods;
    for (const Pair& p : pairs) mods.emplace_back(frob_field(p.F), frob_field(p.ref->F));
    std::vector<double> row;
    for (double k : k_list) {
      std::vector<TimedField> series;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        ScalarField d(mask.grid());
        for (std::size_t q = 0; q < d.size(); ++q)
          d[q] = truncate_tk(mods[i].first[q], k) - truncate_tk(mods[i].second[q], k);
        series.push_back({pairs[i].t, std::move(d)});
      }
      row.push_back(std::pow(local_lp_norm(series, mask, 3.0, t0, t1), 3));
    }
    rep.sup.push_back(row.empty() ? 0.0 : *std::max_element(row.begin(), row.end()));
    rep.values.push_back(std::move(row));
  }
  return rep;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  const double den = m * sxx - sx * sx;
  if (m < 2 || den == 0.0) return 0.0;
  return (m * sxy - sx * sy) / den;
}

StrongConvTable strong_conv(std::span<const RunSeries> runs, std::span<const double> parameters,
                            std::size_t reference, const BallMask& mask, double t0, double t1) {
  check_reference(runs, reference, mask);
  if (parameters.size() != runs.size()) throw Error(Errc::InvalidArgument, "one parameter per run required");
  StrongConvTable tab;
  tab.parameters.assign(parameters.begin(), parameters.end());
  tab.reference = reference;
  for (const RunSeries& run : runs) {
    std::vector<TimedField> series;
    for (const Pair& p : pair_with_reference(run, runs[reference], t0, t1)) {
      ScalarField d(mask.grid());
      for (std::size_t q = 0; q < d.size(); ++q) d[q] = (p.F.at(q) - p.ref->F.at(q)).frob();
      series.push_back({p.t, std::move(d)});
    }
    tab.errors.push_back(local_lp_norm(series, mask, 2.0, t0, t1));
  }
  std::vector<double> px, py;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (i == reference) continue;
    px.push_back(parameters[i]);
    py.push_back(tab.errors[i]);
    order.push_back(i);
  }
  tab.rate = loglog_slope(px, py);
  if (reference == 0) std::reverse(order.begin(), order.end());
  tab.monotone = true;
  for (std::size_t i = 1; i < order.size(); ++i)
    if (!(tab.errors[order[i]] <= tab.errors[order[i - 1]])) tab.monotone = false;
  return tab;
}

double CutoffFn::s(double r) const {
  const double a = 0.5 * cap;
  if (r <= a) return 1.0;
  if (r >= cap) return 0.0;
  const double t = (r - a) / a;
  return 1.0 - t * t * (3.0 - 2.0 * t);
}

double CutoffFn::ds(double r) const {
  const double a = 0.5 * cap;
  if (r <= a || r >= cap) return 0.0;
  const double t = (r - a) / a;
  return -6.0 * t * (1.0 - t) / a;
}

Mat2 CutoffFn::psi(const Mat2& F) const { return F * s(F.frob()); }

double CutoffFn::phi(const Mat2& F) const { return F.frob_sq() * s(F.frob()); }

double time_integral(std::span<const std::pair<double, double>> samples) {
  if (samples.empty()) return 0.0;
  if (samples.size() == 1) return samples.front().second;
  double sum = 0.0;
  for (std::size_t m = 1; m < samples.size(); ++m)
    sum += 0.5 * (samples[m].first - samples[m - 1].first) * (samples[m].second + samples[m - 1].second);
  return sum;
}

PairingReport flux_pairing(const RunSeries& run, std::span<const CutoffFn> cutoffs, const BallMask& mask, double t0,
                           double t1) {
  const ModelParams& params = run.config.params;
  const std::size_t nc = cutoffs.size();
  std::vector<std::vector<std::pair<double, double>>> mat(nc), s_d(nc), s_p(nc), s_pg(nc);
  PairingReport rep;
  const double tol = 1e-12 * std::max(1.0, std::abs(t1));
  int used = 0;
  for (const State& s : run.snapshots) {
    if (s.t < t0 - tol || s.t > t1 + tol) continue;
    ++used;
    if (!(mask.grid() == s.grid())) throw Error(Errc::GridMismatch, "flux_pairing: mask on a different grid");
    const Grid2& g = s.grid();
    const double h2 = g.spacing() * g.spacing();
    const FluxSet flux = effective_flux(s, params);
    const PressureForms pf = pressure_forms(s, mask, params);
    const double meanB = mean(pf.B);
    double diff = 0.0, norm = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double e = pf.A[p] - (meanB - pf.B[p]);
      diff += e * e;
      norm += pf.A[p] * pf.A[p];
    }
    rep.assembly_agreement = std::max(rep.assembly_agreement, norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff * h2));
    for (std::size_t c = 0; c < nc; ++c) {
      double m = 0, a = 0, b = 0, bg = 0;
      for (std::size_t p = 0; p < g.size(); ++p) {
        if (!mask.contains(p)) continue;
        const Mat2 F = s.F.at(p);
        const double phi = cutoffs[c].phi(F);
        m += flux.G.at(p).ddot(cutoffs[c].psi(F));
        a += pf.A[p] * phi;
        b += pf.B[p] * phi;
        bg += (meanB - pf.B[p]) * phi;
      }
      mat[c].emplace_back(s.t, m * h2);
      s_d[c].emplace_back(s.t, a * h2);
      s_p[c].emplace_back(s.t, b * h2);
      s_pg[c].emplace_back(s.t, bg * h2);
    }
  }
  if (used == 0) throw Error(Errc::EmptyWindow, "flux_pairing: no snapshot in the window");
  for (std::size_t c = 0; c < nc; ++c) {
    rep.caps.push_back(cutoffs[c].cap);
    rep.matrix.push_back(time_integral(mat[c]));
    rep.scalar_direct.push_back(time_integral(s_d[c]));
    rep.scalar_pressure.push_back(time_integral(s_p[c]));
    rep.scalar_pressure_gauged.push_back(time_integral(s_pg[c]));
  }
  return rep;
}

}  // namespace visco
