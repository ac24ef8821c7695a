#include "visco/report.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "visco/error.hpp"
#include "visco/harness.hpp"

namespace visco {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunTables {
  json energy, constraints, integrability, pairing;
};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingArtifacts, "missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::IoError, path.string() + ": " + e.what());
  }
}

double column_max(const DiagnosticsTable& t, const std::string& name) {
  const std::size_t c = t.column(name);
  double m = 0.0;
  for (const auto& row : t.rows) m = std::max(m, row[c]);
  return m;
}

double column_min(const DiagnosticsTable& t, const std::string& name) {
  const std::size_t c = t.column(name);
  double m = t.rows.empty() ? 0.0 : t.rows.front()[c];
  for (const auto& row : t.rows) m = std::min(m, row[c]);
  return m;
}

RunTables analyse_run(const RunSeries& run, const DiagnosticsTable& diag, std::size_t index, double parameter,
                      const AnalysisConfig& an, double t0, double t1) {
  RunTables out;
  const std::size_t ct = diag.column("t"), ck = diag.column("kinetic"), ce = diag.column("elastic"),
                    cd = diag.column("delta_elastic"), cr = diag.column("energy_rate");
  double e_first = 0.0, e_last = 0.0, max_increase = 0.0, max_budget = 0.0;
  for (std::size_t m = 0; m < diag.rows.size(); ++m) {
    const auto& row = diag.rows[m];
    const double e = row[ck] + row[ce] + row[cd];
    if (m == 0) e_first = e;
    if (m > 0) {
      const auto& prev = diag.rows[m - 1];
      const double ep = prev[ck] + prev[ce] + prev[cd];
      max_increase = std::max(max_increase, e - ep);
      const double budget = e - ep - 0.5 * (row[ct] - prev[ct]) * (row[cr] + prev[cr]);
      max_budget = std::max(max_budget, std::abs(budget));
    }
    e_last = e;
  }
  out.energy = {{"run", index},
                {"parameter", parameter},
                {"t_final", diag.rows.empty() ? 0.0 : diag.rows.back()[ct]},
                {"energy_initial", e_first},
                {"energy_final", e_last},
                {"max_energy_increase", max_increase},
                {"max_budget_residual", max_budget}};
  out.constraints = {{"run", index},
                     {"parameter", parameter},
                     {"max_res_divFT", column_max(diag, "res_divFT")},
                     {"max_res_piola", column_max(diag, "res_piola")},
                     {"max_res_detF", column_max(diag, "res_detF")},
                     {"max_res_detF_linf", column_max(diag, "res_detF_linf")},
                     {"max_moment_drift", column_max(diag, "moment_drift")},
                     {"min_tr_tau", column_min(diag, "tr_tau_min")}};

  const Grid2& g = run.snapshots.front().grid();
  const BallMask mask = BallMask::centered(g, an.ball_radius);
  const IntegrabilityReport ir = integrability_report(run.snapshots, mask, t0, t1, run.config.params);
  out.integrability = {{"run", index},
                       {"parameter", parameter},
                       {"norm_F_L3", ir.norm_F_L3},
                       {"norm_trtau_L32", ir.norm_trtau_L32},
                       {"norm_Pa_L32", ir.norm_Pa_L32},
                       {"norm_E_L4", ir.norm_E_L4}};

  std::vector<CutoffFn> cutoffs;
  for (double m : an.cutoffs) cutoffs.push_back({m});
  const PairingReport pr = flux_pairing(run, cutoffs, mask, t0, t1);
  out.pairing = json::array();
  for (std::size_t c = 0; c < pr.caps.size(); ++c)
    out.pairing.push_back({{"run", index},
                           {"parameter", parameter},
                           {"cap", pr.caps[c]},
                           {"matrix", pr.matrix[c]},
                           {"scalar_direct", pr.scalar_direct[c]},
                           {"scalar_pressure", pr.scalar_pressure[c]},
                           {"scalar_pressure_gauged", pr.scalar_pressure_gauged[c]},
                           {"assembly_agreement", pr.assembly_agreement}});
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
}

// Rows of objects with the given keys, in that column order.
std::string table_csv(const json& rows, const std::vector<std::string>& keys) {
  std::ostringstream o;
  for (std::size_t i = 0; i < keys.size(); ++i) o << (i ? "," : "") << keys[i];
  o << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const json& v = row.at(keys[i]);
      o << (i ? "," : "");
      if (v.is_number_float()) o << format_g17(v.get<double>());
      else if (v.is_boolean()) o << (v.get<bool>() ? 1 : 0);
      else o << v.dump();
    }
    o << '\n';
  }
  return o.str();
}

}  // namespace

fs::path write_report(const fs::path& root) {
  const RunFamily family = load_family_config(root);
  const json manifest = read_json(root / "manifest.json");
  const std::vector<RunConfig> configs = family.runs();
  const std::size_t ref = family.reference_index();
  const AnalysisConfig& an = family.base.analysis;
  const double t0 = an.t0, t1 = family.base.window_end();

  std::vector<bool> ok(configs.size(), false);
  const auto& mruns = manifest.at("runs");
  for (const auto& r : mruns) {
    const std::size_t i = r.at("index").get<std::size_t>();
    if (i < ok.size()) ok[i] = r.at("status") == "ok";
  }

  std::vector<RunSeries> runs(configs.size());
  std::vector<DiagnosticsTable> diags(configs.size());
  std::vector<RunTables> tables(configs.size());
  std::vector<std::string> errors(configs.size());
  {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < configs.size(); i = next++) {
        if (!ok[i]) continue;
        try {
          const fs::path dir = root / ("run_" + std::to_string(i));
          runs[i] = load_run(dir);
          diags[i] = read_diagnostics_csv(dir / "diagnostics.csv");
          tables[i] = analyse_run(runs[i], diags[i], i, family.values[i], an, t0, t1);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    std::vector<std::jthread> pool;
    for (int w = 0; w < worker_count(family); ++w) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) throw Error(Errc::MissingArtifacts, "run_" + std::to_string(i) + ": " + errors[i]);

  json report;
  report["schema"] = kReportSchema;
  report["reference_proxy"] =
      "the reference run (smallest parameter or finest grid) stands in for the unobtainable weak limit";
  report["family"] = {{"sweep", to_string(family.kind)},
                      {"values", family.values},
                      {"reference", ref},
                      {"window", {t0, t1}},
                      {"k_list", an.k_list},
                      {"cutoffs", an.cutoffs}};
  report["runs"] = json::array();
  report["energy"] = json::array();
  report["constraints"] = json::array();
  report["integrability"] = json::array();
  report["pairing"] = json::array();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    report["runs"].push_back({{"index", i},
                              {"parameter", family.values[i]},
                              {"n", configs[i].n},
                              {"dt", configs[i].dt},
                              {"eta", configs[i].params.eta},
                              {"delta", configs[i].params.delta},
                              {"status", ok[i] ? "ok" : "failed"}});
    if (!ok[i]) continue;
    report["energy"].push_back(tables[i].energy);
    report["constraints"].push_back(tables[i].constraints);
    report["integrability"].push_back(tables[i].integrability);
    for (const auto& p : tables[i].pairing) report["pairing"].push_back(p);
  }

  std::vector<RunSeries> good;
  std::vector<double> params;
  std::vector<std::size_t> index;
  std::size_t good_ref = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (!ok[i]) continue;
    if (i == ref) good_ref = good.size();
    good.push_back(runs[i]);
    params.push_back(family.values[i]);
    index.push_back(i);
  }
  report["defect"] = nullptr;
  report["strong_conv"] = nullptr;
  if (ok[ref]) {
    const BallMask mask = BallMask::centered(runs[ref].snapshots.front().grid(), an.ball_radius);
    const DefectReport dr = osc_defect(good, good_ref, mask, t0, t1, an.k_list);
    json rows = json::array();
    for (std::size_t r = 0; r < good.size(); ++r)
      rows.push_back({{"run", index[r]}, {"parameter", params[r]}, {"values", dr.values[r]}, {"sup", dr.sup[r]}});
    report["defect"] = {{"k_list", an.k_list}, {"rows", rows}};
    const StrongConvTable sc = strong_conv(good, params, good_ref, mask, t0, t1);
    json srows = json::array();
    for (std::size_t r = 0; r < good.size(); ++r)
      srows.push_back({{"run", index[r]}, {"parameter", params[r]}, {"error", sc.errors[r]}});
    report["strong_conv"] = {{"rate", sc.rate}, {"monotone", sc.monotone}, {"rows", srows}};
  }

  const fs::path out = root / "report";
  fs::create_directories(out);
  const std::string text = report.dump(2) + "\n";
  validate_report_text(text);
  write_file(out / "report.json", text);
  write_file(out / "energy.csv",
             table_csv(report["energy"], {"run", "parameter", "t_final", "energy_initial", "energy_final",
                                          "max_energy_increase", "max_budget_residual"}));
  write_file(out / "constraints.csv",
             table_csv(report["constraints"], {"run", "parameter", "max_res_divFT", "max_res_piola", "max_res_detF",
                                               "max_res_detF_linf", "max_moment_drift", "min_tr_tau"}));
  write_file(out / "integrability.csv",
             table_csv(report["integrability"],
                       {"run", "parameter", "norm_F_L3", "norm_trtau_L32", "norm_Pa_L32", "norm_E_L4"}));
  write_file(out / "pairing.csv", table_csv(report["pairing"], {"run", "parameter", "cap", "matrix", "scalar_direct",
                                                                "scalar_pressure", "scalar_pressure_gauged",
                                                                "assembly_agreement"}));
  if (!report["defect"].is_null()) {
    std::ostringstream o;
    o << "run,parameter";
    for (double k : an.k_list) o << ",k" << format_g17(k);
    o << ",sup\n";
    for (const auto& row : report["defect"]["rows"]) {
      o << row["run"].dump() << ',' << format_g17(row["parameter"].get<double>());
      for (const auto& v : row["values"]) o << ',' << format_g17(v.get<double>());
      o << ',' << format_g17(row["sup"].get<double>()) << '\n';
    }
    write_file(out / "defect.csv", o.str());
    write_file(out / "strong_conv.csv", table_csv(report["strong_conv"]["rows"], {"run", "parameter", "error"}));
  }
  return out / "report.json";
}

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(Errc::IoError, "report schema: " + what); }

const json& need(const json& obj, const std::string& key) {
  if (!obj.is_object() || !obj.contains(key)) schema("missing key " + key);
  return obj.at(key);
}

void need_numbers(const json& obj, const std::vector<std::string>& keys) {
  for (const auto& k : keys)
    if (!need(obj, k).is_number()) schema(k + " must be a number");
}

void need_rows(const json& arr, const std::string& name, const std::vector<std::string>& keys) {
  if (!arr.is_array()) schema(name + " must be an array");
  for (const auto& row : arr) need_numbers(row, keys);
}

}  // namespace

void validate_report_text(const std::string& json_text) {
  json r;
  try {
    r = json::parse(json_text);
  } catch (const json::exception& e) {
    schema(e.what());
  }
  if (need(r, "schema") != kReportSchema) schema("unknown schema tag");
  if (!need(r, "reference_proxy").is_string()) schema("reference_proxy must be a string");
  const json& fam = need(r, "family");
  if (!need(fam, "sweep").is_string()) schema("family.sweep must be a string");
  if (!need(fam, "values").is_array() || !need(fam, "k_list").is_array() || !need(fam, "window").is_array())
    schema("family lists malformed");
  need_numbers(fam, {"reference"});
  need_rows(need(r, "runs"), "runs", {"index", "parameter", "n", "dt", "eta", "delta"});
  for (const auto& row : r["runs"])
    if (!need(row, "status").is_string()) schema("runs.status must be a string");
  need_rows(need(r, "energy"), "energy",
            {"run", "parameter", "t_final", "energy_initial", "energy_final", "max_energy_increase",
             "max_budget_residual"});
  need_rows(need(r, "constraints"), "constraints",
            {"run", "parameter", "max_res_divFT", "max_res_piola", "max_res_detF", "max_res_detF_linf",
             "max_moment_drift", "min_tr_tau"});
  need_rows(need(r, "integrability"), "integrability",
            {"run", "parameter", "norm_F_L3", "norm_trtau_L32", "norm_Pa_L32", "norm_E_L4"});
  need_rows(need(r, "pairing"), "pairing",
            {"run", "parameter", "cap", "matrix", "scalar_direct", "scalar_pressure", "scalar_pressure_gauged",
             "assembly_agreement"});
  const json& defect = need(r, "defect");
  if (!defect.is_null()) {
    const std::size_t nk = need(defect, "k_list").size();
    need_rows(need(defect, "rows"), "defect.rows", {"run", "parameter", "sup"});
    for (const auto& row : defect["rows"])
      if (!need(row, "values").is_array() || row["values"].size() != nk) schema("defect values do not match k_list");
  }
  const json& sc = need(r, "strong_conv");
  if (!sc.is_null()) {
    need_numbers(sc, {"rate"});
    if (!need(sc, "monotone").is_boolean()) schema("strong_conv.monotone must be a boolean");
    need_rows(need(sc, "rows"), "strong_conv.rows", {"run", "parameter", "error"});
  }
}

void validate_report_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingArtifacts, "missing " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  validate_report_text(ss.str());
}

}  // namespace visco
