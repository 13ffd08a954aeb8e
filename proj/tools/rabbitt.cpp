// rabbitt: analytic multi-sideband RABBITT phases, synthetic and TDSE delay
// scans, sideband fits and analytic-vs-fit comparisons.
//
// Exit codes: 0 ok, 2 configuration or input error, 3 physics precondition
// violated, 4 numerical failure (including failed band extractions).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rabbitt/config.hpp"
#include "rabbitt/errors.hpp"
#include "rabbitt/fit.hpp"
#include "rabbitt/io.hpp"
#include "rabbitt/phases.hpp"
#include "rabbitt/synth.hpp"
#include "rabbitt/tdse.hpp"
#include "rabbitt/units.hpp"

namespace fs = std::filesystem;
using namespace rabbitt;
using json = nlohmann::ordered_json;
using units::Band;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_precondition = 3;
constexpr int exit_numerical = 4;

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string scale = "desk";
  int threads = 1;
  bool quiet = false;
  bool json_summary = false;
  std::string input;
};

/// Everything a subcommand produces; nothing touches the disk until the
/// computation has finished.
struct Outcome {
  std::vector<std::pair<std::string, std::string>> files;  ///< (name, content)
  std::vector<std::string> failures;
  json summary = json::object();
};

struct Context {
  Options opt;
  config::RunConfig cfg;
  io::Manifest manifest;
};

Context load_context(const Options& opt, const std::string& subcommand) {
  Context ctx;
  ctx.opt = opt;
  json doc = json::object();
  if (!opt.config_path.empty()) {
    const std::string text = io::read_file(opt.config_path);
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("config '" + opt.config_path + "': " + e.what());
    }
  }
  ctx.cfg = config::parse(doc, config::scale_from_name(opt.scale));
  if (opt.seed) ctx.cfg.seed = *opt.seed;
  ctx.manifest.subcommand = subcommand;
  ctx.manifest.seed = ctx.cfg.seed;
  ctx.manifest.scale = opt.scale;
  ctx.manifest.config_hash = io::hex64(io::fnv1a(ctx.cfg.resolved().dump()));
  return ctx;
}

void add_input(io::Manifest& m, const std::string& path, const std::string& content) {
  m.inputs.emplace_back(fs::path(path).filename().string(), io::hex64(io::fnv1a(content)));
}

std::vector<double> harmonic_phases_or_zero(const std::vector<int>& orders, const std::vector<double>& phases) {
  std::vector<double> out = phases;
  out.resize(orders.size(), 0.0);
  return out;
}

// ------------------------------------------------------------------ phases

Outcome cmd_phases(Context& ctx) {
  const auto& a = ctx.cfg.atom;
  const auto& p = ctx.cfg.phases;
  const double omega = units::photon_energy(p.wavelength_nm);
  phases::PhaseOptions po;
  po.antisymmetrize = p.antisymmetrize;
  const auto rows = phases::phase_table(units::ev_to_au(p.energy_min_ev), units::ev_to_au(p.energy_max_ev), omega,
                                        a.ip, a.charge, a.lambda, po);
  if (rows.empty()) throw PreconditionError("phases: no sideband group lies in the requested energy range");
  Outcome out;
  out.files.emplace_back("phase_table.csv", io::phase_table_csv(rows, omega, ctx.manifest));
  out.summary["rows"] = rows.size();
  out.summary["groups"] = rows.size() / 3;
  out.summary["energy_min_ev"] = units::au_to_ev(rows.front().energy);
  out.summary["energy_max_ev"] = units::au_to_ev(rows.back().energy);
  return out;
}

// ------------------------------------------------------------------- synth

Outcome cmd_synth(Context& ctx) {
  const auto& s = ctx.cfg.synth;
  auto scan = synth::synthesize_scan(s.field, s.options);
  const auto& d = s.drift;
  const bool drift = d.additive_linear != 0.0 || d.additive_quadratic != 0.0 || d.scale_linear != 0.0 ||
                     d.scale_quadratic != 0.0;
  if (drift || s.noise_sigma > 0.0) scan = synth::apply_decay_and_noise(scan, d, s.noise_sigma, ctx.cfg.seed);

  io::ScanMetadata meta;
  meta.source = "synth";
  meta.omega = s.field.omega();
  meta.ip = s.options.ip;
  meta.charge = s.options.charge;
  meta.lambda = s.options.lambda;
  for (const auto& h : s.field.harmonics) {
    meta.harmonic_orders.push_back(h.order);
    meta.harmonic_phases.push_back(h.phase);
  }
  meta.model = s.options.model == synth::SidebandModel::one_sideband ? "1sb" : "3sb";

  Outcome out;
  out.files.emplace_back("scan.csv", io::scan_to_csv(scan, ctx.manifest, meta));
  out.files.emplace_back("scan.json", io::scan_to_json(scan, ctx.manifest, meta).dump(1) + "\n");
  out.summary["delays"] = scan.n_delay();
  out.summary["energies"] = scan.n_energy();
  out.summary["groups"] = meta.groups();
  return out;
}

// -------------------------------------------------------------------- tdse

json provenance_json(const tdse::ScanResult& res, const Context& ctx) {
  json j;
  j["format"] = "rabbitt-tdse-provenance";
  j["format_version"] = 1;
  j["manifest"] = ctx.manifest.to_json();
  j["config"] = ctx.cfg.resolved()["tdse"];
  j["setup"] = {{"ground_energy_au", res.setup.ground_energy},
                {"s_wave_corner", res.setup.s_wave_corner},
                {"grid_points", res.setup.grid_points},
                {"basis_sizes", res.setup.basis_sizes}};
  json runs = json::array();
  for (const auto& r : res.runs)
    runs.push_back({{"delay_au", r.delay},
                    {"steps", r.steps},
                    {"t_start_au", r.t_start},
                    {"t_end_au", r.t_end},
                    {"initial_norm", r.initial_norm},
                    {"final_norm", r.final_norm},
                    {"absorbed", r.absorbed},
                    {"bound_population", r.bound_population},
                    {"continuum_population", r.continuum_population},
                    {"closure_error", r.closure_error},
                    {"top_l_population", r.top_l_population}});
  j["runs"] = runs;
  return j;
}

Outcome cmd_tdse(Context& ctx) {
  auto tc = ctx.cfg.tdse;
  tc.threads = ctx.opt.threads;
  const tdse::TdseSolver solver(tc);
  const auto delays = tc.delays();
  const bool quiet = ctx.opt.quiet;
  const auto res = tdse::run_rabbitt_scan(solver, delays, tc.threads, [quiet](std::size_t done, std::size_t total) {
    if (!quiet) std::cerr << "tdse: delay " << done << "/" << total << " done\n";
  });

  io::ScanMetadata meta;
  meta.source = "tdse";
  meta.omega = tc.pulses.omega();
  meta.ip = tdse::hydrogen_ip;
  meta.charge = 1.0;
  meta.lambda = 1;
  meta.harmonic_orders = tc.pulses.harmonic_orders;
  meta.harmonic_phases = harmonic_phases_or_zero(tc.pulses.harmonic_orders, tc.pulses.harmonic_phases);

  Outcome out;
  out.files.emplace_back("scan.csv", io::scan_to_csv(res.scan, ctx.manifest, meta));
  out.files.emplace_back("scan.json", io::scan_to_json(res.scan, ctx.manifest, meta).dump(1) + "\n");
  out.files.emplace_back("tdse_provenance.json", provenance_json(res, ctx).dump(1) + "\n");
  double worst_closure = 0.0;
  for (const auto& r : res.runs) worst_closure = std::max(worst_closure, r.closure_error);
  out.summary["delays"] = res.scan.n_delay();
  out.summary["energies"] = res.scan.n_energy();
  out.summary["ground_energy_au"] = res.setup.ground_energy;
  out.summary["worst_closure_error"] = worst_closure;
  return out;
}

// --------------------------------------------------------------------- fit

Outcome cmd_fit(Context& ctx) {
  const std::string text = io::read_file(ctx.opt.input);
  add_input(ctx.manifest, ctx.opt.input, text);
  const auto loaded = io::load_scan(ctx.opt.input);
  if (!loaded.metadata) throw ConfigError("fit: scan '" + ctx.opt.input + "' carries no metadata line");
  const auto& meta = *loaded.metadata;
  const auto groups = ctx.cfg.fit.groups.empty() ? meta.groups() : ctx.cfg.fit.groups;
  if (groups.empty()) throw PreconditionError("fit: the scan contains no complete sideband group");

  const bool one_sb = meta.model == "1sb";
  const std::vector<Band> bands =
      one_sb ? std::vector<Band>{Band::center} : std::vector<Band>{Band::lower, Band::center, Band::higher};
  const auto fits =
      fit::fit_scan(loaded.scan, groups, meta.omega, meta.ip, units::ev_to_au(ctx.cfg.fit.window_ev), bands);

  std::vector<fit::GroupFits> complete;
  for (const auto& g : fits.groups) {
    bool ok = true;
    for (Band b : bands) ok = ok && g.get(b).has_value();
    if (ok) complete.push_back(g);
  }
  const auto report = one_sb ? fit::center_band_report(complete, meta.omega)
                             : fit::band_phase_report(complete, meta.omega);

  auto report_json = io::fit_report_json(report, fits.groups, fits.failures, ctx.manifest, meta);
  if (ctx.cfg.fit.frequency_scan) {
    json check = json::array();
    const double window = units::ev_to_au(ctx.cfg.fit.window_ev);
    for (const auto& g : complete)
      for (Band b : bands) {
        const auto trace = fit::integrate_window(loaded.scan, g.get(b)->center_energy, window);
        const auto scan = fit::frequency_scan(trace, 4.0 * meta.omega);
        check.push_back({{"q", g.q},
                         {"band", units::band_name(b)},
                         {"best_over_nominal", scan.best_frequency / (4.0 * meta.omega)}});
      }
    report_json["frequency_check"] = check;
  }

  Outcome out;
  out.failures = fits.failures;
  out.files.emplace_back("fit_report.csv", io::fit_report_csv(report, ctx.manifest));
  out.files.emplace_back("fit_report.json", report_json.dump(1) + "\n");
  out.summary["groups_fitted"] = complete.size();
  json groups_json = json::array();
  for (const auto& g : report.groups)
    groups_json.push_back({{"q", g.q},
                           {"center_energy_ev", units::au_to_ev(g.center_energy)},
                           {"delta_hl_as", units::au_to_as(g.delta_hl_delay)}});
  out.summary["groups"] = groups_json;
  return out;
}

// ----------------------------------------------------------------- compare

Outcome cmd_compare(Context& ctx) {
  const std::string text = io::read_file(ctx.opt.input);
  add_input(ctx.manifest, ctx.opt.input, text);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("compare: '" + ctx.opt.input + "': " + e.what());
  }
  const auto [groups, meta] = io::fits_from_report(doc);
  const bool one_sb = meta.model == "1sb";
  const std::vector<Band> bands =
      one_sb ? std::vector<Band>{Band::center} : std::vector<Band>{Band::lower, Band::center, Band::higher};
  phases::PhaseOptions po;
  po.antisymmetrize = ctx.cfg.compare.antisymmetrize;

  Outcome out;
  std::ostringstream csv;
  csv << ctx.manifest.csv_header();
  csv << "q,band,energy_ev,fit_phase_rad,analytic_phase_rad,diff_rad,diff_as,phase_err_rad\n";
  json rows = json::array(), group_rows = json::array();
  for (const auto& g : groups) {
    std::optional<double> fit_l, fit_h, an_l, an_h;
    for (Band b : bands) {
      const auto& f = g.get(b);
      if (!f) {
        out.failures.push_back("group q=" + std::to_string(g.q) + " band " + units::band_name(b) +
                               ": missing from the fit report");
        continue;
      }
      const double atomic =
          one_sb ? phases::atomic_phase_1sb(g.q, meta.omega, meta.ip, meta.charge, meta.lambda, po).phase
                 : phases::atomic_phase_3sb(b, units::SidebandLadder(g.q, meta.omega, meta.ip), meta.charge,
                                            meta.lambda, po)
                       .phase;
      const double analytic = units::wrap_phase(meta.xuv_phase_difference(g.q) + atomic);
      const double diff = units::wrap_phase(f->phase - analytic);
      const double diff_as = units::au_to_as(units::phase_to_delay(diff, meta.omega));
      csv << g.q << ',' << units::band_name(b) << ',' << io::fmt(units::au_to_ev(f->center_energy)) << ','
          << io::fmt(f->phase) << ',' << io::fmt(analytic) << ',' << io::fmt(diff) << ',' << io::fmt(diff_as) << ','
          << io::fmt(f->phase_error) << '\n';
      rows.push_back({{"q", g.q},
                      {"band", units::band_name(b)},
                      {"energy_ev", units::au_to_ev(f->center_energy)},
                      {"fit_phase_rad", f->phase},
                      {"analytic_phase_rad", analytic},
                      {"diff_rad", diff},
                      {"diff_as", diff_as},
                      {"phase_err_rad", f->phase_error}});
      if (b == Band::lower) fit_l = f->phase, an_l = atomic;
      if (b == Band::higher) fit_h = f->phase, an_h = atomic;
    }
    if (fit_l && fit_h) {
      const double fit_hl = units::wrap_phase(*fit_h - *fit_l);
      const double an_hl = units::wrap_phase(*an_h - *an_l);
      const auto to_as = [&](double ph) { return units::au_to_as(units::phase_to_delay(ph, meta.omega)); };
      group_rows.push_back({{"q", g.q},
                            {"center_energy_ev", units::au_to_ev(g.center->center_energy)},
                            {"fit_delta_hl_rad", fit_hl},
                            {"analytic_delta_hl_rad", an_hl},
                            {"fit_delta_hl_as", to_as(fit_hl)},
                            {"analytic_delta_hl_as", to_as(an_hl)}});
    }
  }
  json j;
  j["format"] = "rabbitt-compare";
  j["format_version"] = 1;
  j["manifest"] = ctx.manifest.to_json();
  j["metadata"] = meta.to_json();
  j["rows"] = rows;
  j["groups"] = group_rows;
  j["failures"] = out.failures;
  out.files.emplace_back("compare.csv", csv.str());
  out.files.emplace_back("compare.json", j.dump(1) + "\n");
  out.summary["rows"] = rows;
  return out;
}

// ----------------------------------------------------------------- driver

/// Writes every file or none: on a failed write the files already written in
/// this run are removed again.
std::vector<std::string> write_outputs(const fs::path& dir, const Outcome& out) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir.string() + "'");
  std::vector<std::string> written;
  try {
    for (const auto& [name, content] : out.files) {
      io::write_file_atomic(dir / name, content);
      written.push_back((dir / name).string());
    }
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
  return written;
}

int run(const std::string& subcommand, const Options& opt, Outcome (*fn)(Context&)) {
  if (opt.quiet) set_warning_handler({});
  int code = exit_ok;
  std::string message;
  Outcome out;
  std::vector<std::string> written;
  try {
    Context ctx = load_context(opt, subcommand);
    out = fn(ctx);
    written = write_outputs(opt.out_dir, out);
    if (!out.failures.empty()) code = exit_numerical;
  } catch (const ConfigError& e) {
    code = exit_config, message = e.what();
  } catch (const PreconditionError& e) {
    code = exit_precondition, message = e.what();
  } catch (const NumericalError& e) {
    code = exit_numerical, message = e.what();
  } catch (const std::exception& e) {
    code = exit_numerical, message = e.what();
  }

  for (const auto& f : out.failures) std::cerr << "rabbitt " << subcommand << ": band extraction failed: " << f << '\n';
  if (!message.empty()) std::cerr << "rabbitt " << subcommand << ": error: " << message << '\n';
  if (opt.json_summary) {
    json s;
    s["subcommand"] = subcommand;
    s["status"] = code == exit_ok ? "ok" : "error";
    s["exit_code"] = code;
    if (!message.empty()) s["error"] = message;
    s["outputs"] = written;
    s["failures"] = out.failures;
    s["result"] = out.summary;
    std::cout << s.dump(1) << '\n';
  } else if (!opt.quiet && code == exit_ok) {
    for (const auto& p : written) std::cout << "wrote " << p << '\n';
  }
  return code;
}

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("-c,--config", opt.config_path, "JSON configuration file (schema_version 1)")->check(CLI::ExistingFile);
  sub->add_option("-o,--out", opt.out_dir, "Output directory (created if missing)");
  sub->add_option("--seed", opt.seed, "Random seed (overrides the configuration)");
  sub->add_option("--scale", opt.scale, "Preset scale")->check(CLI::IsMember({"desk", "paper"}));
  sub->add_option("--threads", opt.threads, "Worker threads for TDSE delay scans")->check(CLI::PositiveNumber);
  sub->add_flag("-q,--quiet", opt.quiet, "Suppress progress output and warnings");
  sub->add_flag("--json", opt.json_summary, "Print a machine-readable summary on stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rabbitt: multi-sideband RABBITT phases, delay scans and sideband fits"};
  app.set_version_flag("--version", std::string(io::tool_version));
  app.require_subcommand(1);
  Options opt;

  auto* phases_cmd = app.add_subcommand("phases", "Tabulate analytic atomic phases of every sideband band");
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize a delay scan from the analytic model");
  auto* tdse_cmd = app.add_subcommand("tdse", "Run a hydrogen TDSE delay scan");
  auto* fit_cmd = app.add_subcommand("fit", "Fit sideband oscillations of a delay scan");
  auto* compare_cmd = app.add_subcommand("compare", "Compare fitted phases with the analytic prediction");
  for (auto* sub : {phases_cmd, synth_cmd, tdse_cmd, fit_cmd, compare_cmd}) add_common(sub, opt);
  fit_cmd->add_option("-i,--input", opt.input, "Delay scan (.csv or .json)")->required();
  compare_cmd->add_option("-i,--input", opt.input, "Fit report (fit_report.json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  if (*phases_cmd) return run("phases", opt, cmd_phases);
  if (*synth_cmd) return run("synth", opt, cmd_synth);
  if (*tdse_cmd) return run("tdse", opt, cmd_tdse);
  if (*fit_cmd) return run("fit", opt, cmd_fit);
  return run("compare", opt, cmd_compare);
}
