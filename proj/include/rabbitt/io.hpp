#pragma once

// File formats: DelayScan as long-form CSV and as a JSON container, phase
// tables, fit reports and run manifests. Every file carries the manifest
// (tool version, format version, configuration hash, seed); nothing
// time-dependent is written, so identical inputs give identical bytes.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rabbitt/errors.hpp"
#include "rabbitt/fit.hpp"
#include "rabbitt/phases.hpp"
#include "rabbitt/synth.hpp"
#include "rabbitt/units.hpp"

namespace rabbitt::io {

using json = nlohmann::ordered_json;
using units::Band;

inline constexpr const char* tool_version = "1.0.0";
inline constexpr int scan_format_version = 1;
inline constexpr int report_format_version = 1;

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Manifest {
  std::string subcommand;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string scale = "desk";
  std::vector<std::pair<std::string, std::string>> inputs;  ///< (name, content hash)

  json to_json() const {
    json j;
    j["tool"] = "rabbitt";
    j["version"] = tool_version;
    j["subcommand"] = subcommand;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["scale"] = scale;
    json in = json::array();
    for (const auto& [name, hash] : inputs) in.push_back({{"name", name}, {"hash", hash}});
    j["inputs"] = in;
    return j;
  }

  static Manifest from_json(const json& j) {
    Manifest m;
    m.subcommand = j.value("subcommand", "");
    m.config_hash = j.value("config_hash", "");
    m.seed = j.value("seed", std::uint64_t{0});
    m.scale = j.value("scale", "desk");
    if (j.contains("inputs"))
      for (const auto& e : j["inputs"]) m.inputs.emplace_back(e.value("name", ""), e.value("hash", ""));
    return m;
  }

  /// CSV preamble: one "# key: value" line per field.
  std::string csv_header() const {
    std::ostringstream os;
    os << "# tool: rabbitt " << tool_version << '\n'
       << "# subcommand: " << subcommand << '\n'
       << "# config_hash: " << config_hash << '\n'
       << "# seed: " << seed << '\n'
       << "# scale: " << scale << '\n';
    for (const auto& [name, hash] : inputs) os << "# input: " << name << ' ' << hash << '\n';
    return os.str();
  }
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + p.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Writes through a temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& p, const std::string& content) {
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw ConfigError("failed writing '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ConfigError("cannot move output into '" + p.string() + "'");
  }
}

/// Physical context of a scan needed to analyze it later.
struct ScanMetadata {
  std::string source;  ///< "synth" or "tdse"
  double omega = 0.0;
  double ip = 0.5;
  double charge = 1.0;
  int lambda = 1;
  std::vector<int> harmonic_orders;
  std::vector<double> harmonic_phases;
  std::string model = "3sb";  ///< "3sb" or "1sb"

  json to_json() const {
    return {{"source", source},          {"omega_au", omega},   {"ip_au", ip},
            {"charge", charge},          {"lambda", lambda},    {"harmonic_orders", harmonic_orders},
            {"harmonic_phases", harmonic_phases}, {"model", model}};
  }
  static ScanMetadata from_json(const json& j) {
    ScanMetadata m;
    m.source = j.value("source", "");
    m.omega = j.at("omega_au").get<double>();
    m.ip = j.value("ip_au", 0.5);
    m.charge = j.value("charge", 1.0);
    m.lambda = j.value("lambda", 1);
    m.harmonic_orders = j.value("harmonic_orders", std::vector<int>{});
    m.harmonic_phases = j.value("harmonic_phases", std::vector<double>{});
    m.model = j.value("model", "3sb");
    if (m.model != "3sb" && m.model != "1sb") throw ConfigError("scan metadata: unknown model '" + m.model + "'");
    return m;
  }

  /// Delta phi_XUV = phi_{q+1} - phi_{q-1} for group q (0 if unknown).
  double xuv_phase_difference(int q) const {
    double lo = 0.0, hi = 0.0;
    bool have_lo = false, have_hi = false;
    for (std::size_t i = 0; i < harmonic_orders.size() && i < harmonic_phases.size(); ++i) {
      if (harmonic_orders[i] == q - 1) lo = harmonic_phases[i], have_lo = true;
      if (harmonic_orders[i] == q + 1) hi = harmonic_phases[i], have_hi = true;
    }
    return have_lo && have_hi ? hi - lo : 0.0;
  }

  /// Groups q whose two bounding harmonics are both present.
  std::vector<int> groups() const {
    std::vector<int> out;
    for (int a : harmonic_orders)
      for (int b : harmonic_orders)
        if (b == a + 2 && (a * 2.0 * omega - ip) > 0.0) out.push_back(a + 1);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

// ---------------------------------------------------------------- DelayScan

inline std::string scan_to_csv(const synth::DelayScan& s, const Manifest& m, const ScanMetadata& meta) {
  std::ostringstream os;
  os << m.csv_header();
  os << "# format: rabbitt-delay-scan-csv " << scan_format_version << '\n';
  os << "# metadata: " << meta.to_json().dump() << '\n';
  os << "delay_au,energy_au,delay_fs,energy_ev,signal\n";
  for (std::size_t i = 0; i < s.n_delay(); ++i)
    for (std::size_t k = 0; k < s.n_energy(); ++k)
      os << fmt(s.delays[i]) << ',' << fmt(s.energies[k]) << ',' << fmt(units::au_to_fs(s.delays[i])) << ','
         << fmt(units::au_to_ev(s.energies[k])) << ',' << fmt(s.at(i, k)) << '\n';
  return os.str();
}

struct LoadedScan {
  synth::DelayScan scan;
  std::optional<ScanMetadata> metadata;
  std::optional<Manifest> manifest;
};

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(context + ": cannot parse number '" + s + "'");
  }
}

inline LoadedScan scan_from_csv(const std::string& text) {
  LoadedScan out;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  std::vector<double> delays, energies;
  std::map<std::pair<double, double>, double> values;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# metadata: ";
      if (line.rfind(key, 0) == 0) {
        try {
          out.metadata = ScanMetadata::from_json(json::parse(line.substr(key.size())));
        } catch (const std::exception& e) {
          throw ConfigError(std::string("scan CSV: bad metadata line: ") + e.what());
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line.rfind("delay_au,energy_au", 0) != 0) throw ConfigError("scan CSV: missing column header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    const std::string ctx = "scan CSV line " + std::to_string(line_no);
    if (cells.size() != 5) throw ConfigError(ctx + ": expected 5 columns");
    const double d = parse_double(cells[0], ctx), e = parse_double(cells[1], ctx), v = parse_double(cells[4], ctx);
    if (delays.empty() || delays.back() != d) {
      if (!delays.empty() && !(d > delays.back())) throw ConfigError(ctx + ": delays must be increasing");
      delays.push_back(d);
    }
    if (delays.size() == 1) energies.push_back(e);
    if (!values.emplace(std::make_pair(d, e), v).second) throw ConfigError(ctx + ": duplicate sample");
  }
  if (!header_seen) throw ConfigError("scan CSV: missing column header");
  if (delays.empty()) throw ConfigError("scan CSV: no samples");
  auto& s = out.scan;
  s.delays = delays;
  s.energies = energies;
  s.signal.assign(delays.size() * energies.size(), 0.0);
  if (values.size() != s.signal.size()) throw ConfigError("scan CSV: samples do not form a complete grid");
  for (std::size_t i = 0; i < delays.size(); ++i)
    for (std::size_t k = 0; k < energies.size(); ++k) {
      const auto it = values.find({delays[i], energies[k]});
      if (it == values.end()) throw ConfigError("scan CSV: samples do not form a complete grid");
      s.at(i, k) = it->second;
    }
  s.validate();
  return out;
}

inline json scan_to_json(const synth::DelayScan& s, const Manifest& m, const ScanMetadata& meta) {
  json j;
  j["format"] = "rabbitt-delay-scan";
  j["format_version"] = scan_format_version;
  j["manifest"] = m.to_json();
  j["metadata"] = meta.to_json();
  j["energies_au"] = s.energies;
  j["delays_au"] = s.delays;
  json rows = json::array();
  for (std::size_t i = 0; i < s.n_delay(); ++i)
    rows.push_back(std::vector<double>(s.signal.begin() + i * s.n_energy(), s.signal.begin() + (i + 1) * s.n_energy()));
  j["signal"] = rows;
  return j;
}

inline LoadedScan scan_from_json(const json& j) {
  if (j.value("format", "") != "rabbitt-delay-scan") throw ConfigError("scan JSON: not a rabbitt delay scan");
  if (j.value("format_version", 0) != scan_format_version)
    throw ConfigError("scan JSON: unsupported format version");
  LoadedScan out;
  try {
    out.scan.energies = j.at("energies_au").get<std::vector<double>>();
    out.scan.delays = j.at("delays_au").get<std::vector<double>>();
    for (const auto& row : j.at("signal")) {
      const auto r = row.get<std::vector<double>>();
      if (r.size() != out.scan.energies.size()) throw ConfigError("scan JSON: signal row length mismatch");
      out.scan.signal.insert(out.scan.signal.end(), r.begin(), r.end());
    }
    if (j.contains("metadata")) out.metadata = ScanMetadata::from_json(j["metadata"]);
    if (j.contains("manifest")) out.manifest = Manifest::from_json(j["manifest"]);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scan JSON: ") + e.what());
  }
  out.scan.validate();
  return out;
}

/// Loads a scan from .json or .csv by extension.
inline LoadedScan load_scan(const std::filesystem::path& p) {
  const std::string text = read_file(p);
  if (p.extension() == ".json") {
    try {
      return scan_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
      throw ConfigError("scan JSON '" + p.string() + "': " + e.what());
    }
  }
  return scan_from_csv(text);
}

// -------------------------------------------------------------- phase table

inline std::string phase_table_csv(const std::vector<phases::PhaseTableRow>& rows, double omega, const Manifest& m) {
  std::ostringstream os;
  os << m.csv_header();
  os << "q,band,energy_ev,phase_rad,unwrapped_rad,delay_as,d_eta_rad,cc_sum_rad,pi_offset_rad,terms\n";
  for (const auto& r : rows) {
    double d_eta = 0.0, cc = 0.0, pi = 0.0;
    std::string terms;
    for (const auto& t : r.result.terms) {
      if (t.label == "d_eta")
        d_eta = t.value;
      else if (t.label == "pi_offset")
        pi = t.value;
      else
        cc += t.value;
      if (!terms.empty()) terms += ';';
      terms += t.label + '=' + fmt(t.value);
    }
    os << r.q << ',' << units::band_name(r.band) << ',' << fmt(units::au_to_ev(r.energy)) << ','
       << fmt(r.result.phase) << ',' << fmt(r.result.unwrapped) << ','
       << fmt(units::au_to_as(units::phase_to_delay(r.result.phase, omega))) << ',' << fmt(d_eta) << ','
       << fmt(cc) << ',' << fmt(pi) << ',' << terms << '\n';
  }
  return os.str();
}

// --------------------------------------------------------------- fit report

inline std::string fit_report_csv(const fit::BandPhaseReport& rep, const Manifest& m) {
  std::ostringstream os;
  os << m.csv_header();
  os << "q,band,energy_ev,phase_rad,raw_phase_rad,phase_err_rad,delay_as,delta_vs_center_rad\n";
  for (const auto& r : rep.rows)
    os << r.q << ',' << units::band_name(r.band) << ',' << fmt(units::au_to_ev(r.energy)) << ',' << fmt(r.phase)
       << ',' << fmt(r.raw_phase) << ',' << fmt(r.phase_error) << ',' << fmt(units::au_to_as(r.delay)) << ','
       << fmt(r.delta_vs_center) << '\n';
  return os.str();
}

inline json fit_report_json(const fit::BandPhaseReport& rep, const std::vector<fit::GroupFits>& fits,
                            const std::vector<std::string>& failures, const Manifest& m, const ScanMetadata& meta) {
  json j;
  j["format"] = "rabbitt-fit-report";
  j["format_version"] = report_format_version;
  j["manifest"] = m.to_json();
  j["metadata"] = meta.to_json();
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"q", r.q},
                    {"band", units::band_name(r.band)},
                    {"energy_ev", units::au_to_ev(r.energy)},
                    {"phase_rad", r.phase},
                    {"raw_phase_rad", r.raw_phase},
                    {"phase_err_rad", r.phase_error},
                    {"delay_as", units::au_to_as(r.delay)},
                    {"delta_vs_center_rad", r.delta_vs_center}});
  j["rows"] = rows;
  json groups = json::array();
  for (const auto& g : rep.groups)
    groups.push_back({{"q", g.q},
                      {"center_energy_ev", units::au_to_ev(g.center_energy)},
                      {"delta_lower_rad", g.delta_lower},
                      {"delta_higher_rad", g.delta_higher},
                      {"delta_hl_rad", g.delta_hl},
                      {"delta_hl_as", units::au_to_as(g.delta_hl_delay)}});
  j["groups"] = groups;
  json raw = json::array();
  for (const auto& g : fits)
    for (Band b : {Band::lower, Band::center, Band::higher}) {
      const auto& f = g.get(b);
      if (!f) continue;
      raw.push_back({{"q", g.q},
                     {"band", units::band_name(b)},
                     {"energy_ev", units::au_to_ev(f->center_energy)},
                     {"phase_rad", f->phase},
                     {"phase_err_rad", f->phase_error},
                     {"i0", f->i0},
                     {"i1", f->i1},
                     {"c1", f->c1},
                     {"c2", f->c2},
                     {"residual_rms", f->residual_rms}});
    }
  j["fits"] = raw;
  j["failures"] = failures;
  return j;
}

/// Fits stored in a report, regrouped by q (missing bands stay empty).
inline std::pair<std::vector<fit::GroupFits>, ScanMetadata> fits_from_report(const json& j) {
  if (j.value("format", "") != "rabbitt-fit-report") throw ConfigError("not a rabbitt fit report");
  if (j.value("format_version", 0) != report_format_version)
    throw ConfigError("fit report: unsupported format version");
  try {
    std::map<int, fit::GroupFits> groups;
    for (const auto& r : j.at("fits")) {
      const int q = r.at("q").get<int>();
      auto& g = groups[q];
      g.q = q;
      fit::SidebandFit f;
      f.band = r.at("band").get<std::string>();
      f.center_energy = units::ev_to_au(r.at("energy_ev").get<double>());
      f.phase = r.at("phase_rad").get<double>();
      f.phase_error = r.value("phase_err_rad", 0.0);
      f.i0 = r.value("i0", 0.0);
      f.i1 = r.value("i1", 0.0);
      f.c1 = r.value("c1", 0.0);
      f.c2 = r.value("c2", 0.0);
      f.residual_rms = r.value("residual_rms", 0.0);
      g.get(units::band_from_name(f.band)) = f;
    }
    // groups listed as failed but without any fitted band still count
    for (const auto& fail : j.value("failures", std::vector<std::string>{})) {
      int q = 0;
      if (std::sscanf(fail.c_str(), "group q=%d", &q) == 1 && !groups.count(q)) groups[q].q = q;
    }
    std::vector<fit::GroupFits> out;
    for (auto& [q, g] : groups) out.push_back(g);
    return {out, ScanMetadata::from_json(j.at("metadata"))};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("fit report: ") + e.what());
  }
}

}  // namespace rabbitt::io
