#include "visco/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "visco/diagnostics.hpp"
#include "visco/error.hpp"

namespace visco {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(Errc::ConfigError, key + ": " + what);
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) bad(key, "expected a finite number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) bad(key, "expected an integer, got '" + text + "'");
  return v;
}

const std::set<std::string>& run_keys() {
  static const std::set<std::string> keys = {
      "grid.n",          "grid.length",           "params.mu",          "params.eta",
      "params.delta",    "time.dt",               "time.t_end",         "time.cfl",
      "init.variant",    "init.amplitude",        "init.modes",         "init.stream_amplitude",
      "init.warm_time",  "init.seed",             "output.dir",         "output.snapshot_every",
      "output.diagnostics_every",                 "analysis.k_list",    "analysis.ball_radius",
      "analysis.t0",     "analysis.t1",           "analysis.cutoffs"};
  return keys;
}

RunConfig apply_run_keys(const ConfigMap& kv) {
  RunConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "grid.n") c.n = static_cast<int>(parse_int(key, value));
    else if (key == "grid.length") c.length = parse_real(key, value);
    else if (key == "params.mu") c.params.mu = parse_real(key, value);
    else if (key == "params.eta") c.params.eta = parse_real(key, value);
    else if (key == "params.delta") c.params.delta = parse_real(key, value);
    else if (key == "time.dt") c.dt = parse_real(key, value);
    else if (key == "time.t_end") c.t_end = parse_real(key, value);
    else if (key == "time.cfl") c.cfl = parse_real(key, value);
    else if (key == "init.variant") c.init.variant = parse_init_variant(trim(value));
    else if (key == "init.amplitude") c.init.amplitude = parse_real(key, value);
    else if (key == "init.modes") c.init.modes = static_cast<int>(parse_int(key, value));
    else if (key == "init.stream_amplitude") c.init.stream_amplitude = parse_real(key, value);
    else if (key == "init.warm_time") c.init.warm_time = parse_real(key, value);
    else if (key == "init.seed") {
      const long long s = parse_int(key, value);
      if (s < 0) bad(key, "must be non-negative");
      c.init.seed = static_cast<std::uint64_t>(s);
    } else if (key == "output.dir") c.output_dir = trim(value);
    else if (key == "output.snapshot_every") c.snapshot_every = static_cast<int>(parse_int(key, value));
    else if (key == "output.diagnostics_every") c.diagnostics_every = static_cast<int>(parse_int(key, value));
    else if (key == "analysis.k_list") c.analysis.k_list = parse_real_list(key, value);
    else if (key == "analysis.ball_radius") c.analysis.ball_radius = parse_real(key, value);
    else if (key == "analysis.t0") c.analysis.t0 = parse_real(key, value);
    else if (key == "analysis.t1") c.analysis.t1 = parse_real(key, value);
    else if (key == "analysis.cutoffs") c.analysis.cutoffs = parse_real_list(key, value);
  }
  return c;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, item));
  if (!text.empty() && text.back() == ',') bad(key, "trailing comma");
  return out;
}

long RunConfig::step_count() const {
  const double steps = t_end / dt;
  const double r = std::round(steps);
  if (std::abs(steps - r) <= 1e-9 * std::max(1.0, r)) return static_cast<long>(r);
  return static_cast<long>(std::ceil(steps));
}

void RunConfig::validate() const {
  if (n < 8 || (n & (n - 1)) != 0) bad("grid.n", "must be a power of two >= 8");
  if (!(length > 0.0)) bad("grid.length", "must be positive");
  if (!(params.mu > 0.0)) bad("params.mu", "must be positive");
  if (params.eta < 0.0) bad("params.eta", "must be non-negative");
  if (params.delta < 0.0) bad("params.delta", "must be non-negative");
  if (!(dt > 0.0)) bad("time.dt", "must be positive");
  if (!(t_end > 0.0)) bad("time.t_end", "must be positive");
  if (!(cfl > 0.0)) bad("time.cfl", "must be positive");
  if (init.modes < 1) bad("init.modes", "must be >= 1");
  if (!(init.stream_amplitude > 0.0)) bad("init.stream_amplitude", "must be positive");
  if (!(init.warm_time > 0.0)) bad("init.warm_time", "must be positive");
  if (snapshot_every < 0) bad("output.snapshot_every", "must be >= 0");
  if (diagnostics_every < 1) bad("output.diagnostics_every", "must be >= 1");
  for (double k : analysis.k_list)
    if (!(k > 0.0)) bad("analysis.k_list", "entries must be positive");
  for (double m : analysis.cutoffs)
    if (!(m > 0.0)) bad("analysis.cutoffs", "entries must be positive");
  if (analysis.t0 < 0.0) bad("analysis.t0", "must be non-negative");
  if (analysis.t1 >= 0.0 && analysis.t1 < analysis.t0) bad("analysis.t1", "must not precede analysis.t0");
}

std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::Eta: return "eta";
    case SweepKind::Delta: return "delta";
    case SweepKind::Grid: return "grid";
    case SweepKind::Dt: return "dt";
  }
  return "?";
}

std::string sweep_key(SweepKind k) { return "sweep." + to_string(k) + "_list"; }

void RunFamily::validate() const {
  if (values.empty()) throw Error(Errc::InvalidFamily, sweep_key(kind) + " is empty");
  if (values.size() > 1) {
    const bool up = values[1] > values[0];
    for (std::size_t i = 1; i < values.size(); ++i)
      if ((values[i] > values[i - 1]) != up || values[i] == values[i - 1])
        throw Error(Errc::InvalidFamily, sweep_key(kind) + " must be strictly monotone");
  }
  for (const RunConfig& r : runs()) {
    try {
      r.validate();
    } catch (const Error& e) {
      throw Error(Errc::InvalidFamily, e.what());
    }
  }
}

std::vector<RunConfig> RunFamily::runs() const {
  std::vector<RunConfig> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    RunConfig r = base;
    const double v = values[i];
    switch (kind) {
      case SweepKind::Eta: r.params.eta = v; break;
      case SweepKind::Delta: r.params.delta = v; break;
      case SweepKind::Grid: r.n = static_cast<int>(std::lround(v)); break;
      case SweepKind::Dt: {
        r.dt = v;
        const double scale = base.dt / v;
        r.snapshot_every = static_cast<int>(std::lround(base.snapshot_every * scale));
        r.diagnostics_every = std::max(1, static_cast<int>(std::lround(base.diagnostics_every * scale)));
        break;
      }
    }
    r.output_dir = base.output_dir / ("run_" + std::to_string(i));
    out.push_back(std::move(r));
  }
  return out;
}

std::size_t RunFamily::reference_index() const {
  if (values.empty()) throw Error(Errc::InvalidFamily, sweep_key(kind) + " is empty");
  const auto it = kind == SweepKind::Grid ? std::max_element(values.begin(), values.end())
                                          : std::min_element(values.begin(), values.end());
  return static_cast<std::size_t>(it - values.begin());
}

ConfigMap parse_config(std::istream& in) {
  ConfigMap kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::ConfigError, "line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(Errc::ConfigError, "line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
      throw Error(Errc::ConfigError, "line " + std::to_string(lineno) + ": repeated key " + key);
  }
  return kv;
}

ConfigMap parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open config " + path.string());
  return parse_config(in);
}

RunConfig run_config_from(const ConfigMap& kv) {
  for (const auto& [key, value] : kv)
    if (!run_keys().contains(key)) throw Error(Errc::ConfigError, "unknown key " + key);
  RunConfig c = apply_run_keys(kv);
  c.validate();
  return c;
}

RunFamily run_family_from(const ConfigMap& kv) {
  RunFamily f;
  ConfigMap base;
  int sweeps = 0;
  for (const auto& [key, value] : kv) {
    if (run_keys().contains(key)) {
      base.emplace(key, value);
    } else if (key == "family.workers") {
      const long long w = parse_int(key, value);
      if (w < 0) bad(key, "must be >= 0");
      f.workers = static_cast<int>(w);
    } else if (key.rfind("sweep.", 0) == 0) {
      bool known = false;
      for (SweepKind k : {SweepKind::Eta, SweepKind::Delta, SweepKind::Grid, SweepKind::Dt}) {
        if (key == sweep_key(k)) {
          f.kind = k;
          f.values = parse_real_list(key, value);
          known = true;
        }
      }
      if (!known) throw Error(Errc::ConfigError, "unknown key " + key);
      ++sweeps;
    } else {
      throw Error(Errc::ConfigError, "unknown key " + key);
    }
  }
  if (sweeps != 1) throw Error(Errc::ConfigError, "a family needs exactly one sweep.*_list key");
  f.base = apply_run_keys(base);
  f.base.validate();
  f.validate();
  return f;
}

std::string to_config_text(const RunConfig& c) {
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_g17(v[i]);
    return s;
  };
  std::ostringstream o;
  o << "grid.n=" << c.n << '\n'
    << "grid.length=" << format_g17(c.length) << '\n'
    << "params.mu=" << format_g17(c.params.mu) << '\n'
    << "params.eta=" << format_g17(c.params.eta) << '\n'
    << "params.delta=" << format_g17(c.params.delta) << '\n'
    << "time.dt=" << format_g17(c.dt) << '\n'
    << "time.t_end=" << format_g17(c.t_end) << '\n'
    << "time.cfl=" << format_g17(c.cfl) << '\n'
    << "init.variant=" << to_string(c.init.variant) << '\n'
    << "init.amplitude=" << format_g17(c.init.amplitude) << '\n'
    << "init.modes=" << c.init.modes << '\n'
    << "init.stream_amplitude=" << format_g17(c.init.stream_amplitude) << '\n'
    << "init.warm_time=" << format_g17(c.init.warm_time) << '\n'
    << "init.seed=" << c.init.seed << '\n'
    << "output.dir=" << c.output_dir.string() << '\n'
    << "output.snapshot_every=" << c.snapshot_every << '\n'
    << "output.diagnostics_every=" << c.diagnostics_every << '\n'
    << "analysis.k_list=" << list(c.analysis.k_list) << '\n'
    << "analysis.ball_radius=" << format_g17(c.analysis.ball_radius) << '\n'
    << "analysis.t0=" << format_g17(c.analysis.t0) << '\n'
    << "analysis.t1=" << format_g17(c.analysis.t1) << '\n'
    << "analysis.cutoffs=" << list(c.analysis.cutoffs) << '\n';
  return o.str();
}

}  // namespace visco
