#pragma once

// Run configuration (JSON, schema_version 1). Every section is optional;
// missing keys take the defaults of the chosen scale preset and unknown keys
// are rejected so that typos cannot silently fall back to defaults. The
// resolved configuration (all defaults filled in) is what gets hashed into
// the manifest.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rabbitt/errors.hpp"
#include "rabbitt/synth.hpp"
#include "rabbitt/tdse/scan.hpp"
#include "rabbitt/units.hpp"

namespace rabbitt::config {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

enum class Scale { desk, paper };

inline Scale scale_from_name(const std::string& s) {
  if (s == "desk") return Scale::desk;
  if (s == "paper") return Scale::paper;
  throw ConfigError("unknown scale preset '" + s + "' (expected desk or paper)");
}

inline const char* scale_name(Scale s) { return s == Scale::desk ? "desk" : "paper"; }

/// Reads keys of one JSON object and remembers which were used.
class Section {
 public:
  Section(const json& j, std::string name) : name_(std::move(name)) {
    if (j.is_null()) return;
    if (!j.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
    j_ = j;
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: '" + name_ + "." + key + "' has the wrong type");
    }
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    static const json null_json;
    return j_.contains(key) ? j_.at(key) : null_json;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  /// Throws on keys that were never read.
  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) throw ConfigError("config: unknown key '" + name_ + "." + key + "'");
  }

 private:
  std::string name_;
  json j_ = json::object();
  std::set<std::string> used_;
};

struct AtomConfig {
  double charge = 1.0;
  int lambda = 1;
  double ip = 0.5;  ///< a.u.
};

struct PhasesConfig {
  double wavelength_nm = 800.0;
  double energy_min_ev = 5.0;
  double energy_max_ev = 40.0;
  bool antisymmetrize = false;
};

struct SynthConfig {
  synth::FieldConfig field;
  synth::SynthOptions options;
  synth::DriftModel drift;
  double noise_sigma = 0.0;
};

struct FitConfig {
  double window_ev = 0.25;
  std::vector<int> groups;  ///< empty: every complete group of the scan
  bool frequency_scan = false;
};

struct CompareConfig {
  bool antisymmetrize = false;
};

struct RunConfig {
  Scale scale = Scale::desk;
  std::uint64_t seed = 0;
  AtomConfig atom;
  PhasesConfig phases;
  SynthConfig synth;
  tdse::TdseConfig tdse;
  FitConfig fit;
  CompareConfig compare;

  json resolved() const;
};

inline SynthConfig default_synth(Scale scale) {
  SynthConfig c;
  const std::vector<int> orders = scale == Scale::desk ? std::vector<int>{9, 11, 13}
                                                       : std::vector<int>{5, 7, 9, 11, 13, 15, 17, 19};
  for (int q : orders) c.field.harmonics.push_back({q, 0.0, 1e9});
  c.field.probe_fwhm_fs = 20.0;
  c.field.delays = synth::delay_grid(c.field.omega(), 32, 2.0);
  return c;
}

inline RunConfig defaults(Scale scale) {
  RunConfig c;
  c.scale = scale;
  c.synth = default_synth(scale);
  c.tdse = scale == Scale::desk ? tdse::desk_config() : tdse::paper_config();
  return c;
}

/// Parses a configuration document on top of the preset defaults.
inline RunConfig parse(const json& doc, Scale scale) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig c = defaults(scale);
  Section top(doc, "config");
  const int version = top.get<int>("schema_version", schema_version);
  if (version != schema_version)
    throw ConfigError("config: unsupported schema_version " + std::to_string(version) + " (expected " +
                      std::to_string(schema_version) + ")");
  c.seed = top.get<std::uint64_t>("seed", 0);

  {
    Section s(top.raw("atom"), "atom");
    c.atom.charge = s.get("charge", c.atom.charge);
    c.atom.lambda = s.get("lambda", c.atom.lambda);
    c.atom.ip = units::ev_to_au(s.get("ip_ev", units::au_to_ev(c.atom.ip)));
    s.finish();
    if (!(c.atom.charge >= 0.0)) throw ConfigError("config: atom.charge must be >= 0");
    if (c.atom.lambda < 0) throw ConfigError("config: atom.lambda must be >= 0");
    if (!(c.atom.ip > 0.0)) throw ConfigError("config: atom.ip_ev must be positive");
  }
  {
    Section s(top.raw("phases"), "phases");
    auto& p = c.phases;
    p.wavelength_nm = s.get("wavelength_nm", p.wavelength_nm);
    p.energy_min_ev = s.get("energy_min_ev", p.energy_min_ev);
    p.energy_max_ev = s.get("energy_max_ev", p.energy_max_ev);
    p.antisymmetrize = s.get("antisymmetrize", p.antisymmetrize);
    s.finish();
    if (!(p.energy_max_ev > p.energy_min_ev)) throw ConfigError("config: phases energy range is empty");
  }
  {
    Section s(top.raw("synth"), "synth");
    auto& y = c.synth;
    y.field.probe_wavelength_nm = s.get("wavelength_nm", y.field.probe_wavelength_nm);
    y.field.probe_intensity = s.get("probe_intensity_w_cm2", y.field.probe_intensity);
    y.field.probe_fwhm_fs = s.get("probe_fwhm_fs", y.field.probe_fwhm_fs);
    if (s.has("harmonics")) {
      y.field.harmonics.clear();
      for (const auto& h : s.raw("harmonics")) {
        Section hs(h, "synth.harmonics[]");
        synth::Harmonic harm;
        harm.order = hs.get("order", 0);
        harm.phase = hs.get("phase_rad", 0.0);
        harm.intensity = hs.get("intensity_w_cm2", 1e9);
        hs.finish();
        y.field.harmonics.push_back(harm);
      }
    } else {
      s.raw("harmonics");
    }
    const int count = s.get("delay_count", 32);
    const double periods = s.get("delay_periods", 2.0);
    const double start_fs = s.get("delay_start_fs", 0.0);
    if (count < 2) throw ConfigError("config: synth.delay_count must be >= 2");
    if (!(periods > 0.0)) throw ConfigError("config: synth.delay_periods must be positive");
    y.field.delays = synth::delay_grid(y.field.omega(), count, periods, units::fs_to_au(start_fs));
    y.options.peak_fwhm = units::ev_to_au(s.get("peak_fwhm_ev", units::au_to_ev(y.options.peak_fwhm)));
    const std::string model = s.get<std::string>("model", "3sb");
    if (model == "3sb")
      y.options.model = synth::SidebandModel::three_sideband;
    else if (model == "1sb")
      y.options.model = synth::SidebandModel::one_sideband;
    else
      throw ConfigError("config: synth.model must be 3sb or 1sb");
    y.options.include_higher_order_paths = s.get("higher_order_paths", y.options.include_higher_order_paths);
    y.options.phase_options.antisymmetrize = s.get("antisymmetrize", y.options.phase_options.antisymmetrize);
    y.noise_sigma = s.get("noise_sigma", y.noise_sigma);
    {
      Section d(s.raw("drift"), "synth.drift");
      y.drift.additive_linear = d.get("additive_linear", 0.0);
      y.drift.additive_quadratic = d.get("additive_quadratic", 0.0);
      y.drift.scale_linear = d.get("scale_linear", 0.0);
      y.drift.scale_quadratic = d.get("scale_quadratic", 0.0);
      d.finish();
    }
    s.finish();
    if (!(y.noise_sigma >= 0.0)) throw ConfigError("config: synth.noise_sigma must be >= 0");
    if (!(y.options.peak_fwhm > 0.0)) throw ConfigError("config: synth.peak_fwhm_ev must be positive");
    try {
      y.field.validate();
    } catch (const PreconditionError& e) {
      throw ConfigError(std::string("config: synth: ") + e.what());
    }
  }
  {
    Section s(top.raw("tdse"), "tdse");
    auto& t = c.tdse;
    t.grid.dr = s.get("dr", t.grid.dr);
    t.grid.r_max = s.get("r_max", t.grid.r_max);
    t.grid.absorber_fraction = s.get("absorber_fraction", t.grid.absorber_fraction);
    t.grid.absorber_exponent = s.get("absorber_exponent", t.grid.absorber_exponent);
    t.l_max = s.get("l_max", t.l_max);
    t.dt = s.get("dt", t.dt);
    t.pulses.fundamental_nm = s.get("wavelength_nm", t.pulses.fundamental_nm);
    t.pulses.harmonic_orders = s.get("harmonic_orders", t.pulses.harmonic_orders);
    t.pulses.harmonic_phases = s.get("harmonic_phases_rad", t.pulses.harmonic_phases);
    t.pulses.harmonic_intensity = s.get("harmonic_intensity_w_cm2", t.pulses.harmonic_intensity);
    t.pulses.xuv_fwhm_fs = s.get("xuv_fwhm_fs", t.pulses.xuv_fwhm_fs);
    t.pulses.probe_intensity = s.get("probe_intensity_w_cm2", t.pulses.probe_intensity);
    t.pulses.probe_fwhm_fs = s.get("probe_fwhm_fs", t.pulses.probe_fwhm_fs);
    t.fwhm_margin = s.get("fwhm_margin", t.fwhm_margin);
    t.basis_e_max = s.get("basis_e_max_au", t.basis_e_max);
    t.energy_step_ev = s.get("energy_step_ev", t.energy_step_ev);
    t.energy_min_ev = s.get("energy_min_ev", t.energy_min_ev);
    t.delays_per_scan = s.get("delay_count", t.delays_per_scan);
    t.delay_periods = s.get("delay_periods", t.delay_periods);
    t.center_delays = s.get("center_delays", t.center_delays);
    s.finish();
    t.validate();
    if (t.delays_per_scan < 8.0 * t.delay_periods - 1e-9)
      throw ConfigError("config: tdse needs at least 8 delays per 4 omega period");
  }
  {
    Section s(top.raw("fit"), "fit");
    c.fit.window_ev = s.get("window_ev", c.fit.window_ev);
    c.fit.groups = s.get("groups", c.fit.groups);
    c.fit.frequency_scan = s.get("frequency_scan", c.fit.frequency_scan);
    s.finish();
    if (!(c.fit.window_ev > 0.0)) throw ConfigError("config: fit.window_ev must be positive");
  }
  {
    Section s(top.raw("compare"), "compare");
    c.compare.antisymmetrize = s.get("antisymmetrize", c.compare.antisymmetrize);
    s.finish();
  }
  top.finish();
  c.synth.options.charge = c.atom.charge;
  c.synth.options.lambda = c.atom.lambda;
  c.synth.options.ip = c.atom.ip;
  return c;
}

inline json RunConfig::resolved() const {
  json j;
  j["schema_version"] = schema_version;
  j["scale"] = scale_name(scale);
  j["seed"] = seed;
  j["atom"] = {{"charge", atom.charge}, {"lambda", atom.lambda}, {"ip_au", atom.ip}};
  j["phases"] = {{"wavelength_nm", phases.wavelength_nm},
                 {"energy_min_ev", phases.energy_min_ev},
                 {"energy_max_ev", phases.energy_max_ev},
                 {"antisymmetrize", phases.antisymmetrize}};
  json harm = json::array();
  for (const auto& h : synth.field.harmonics)
    harm.push_back({{"order", h.order}, {"phase_rad", h.phase}, {"intensity_w_cm2", h.intensity}});
  const auto& o = synth.options;
  j["synth"] = {{"wavelength_nm", synth.field.probe_wavelength_nm},
                {"probe_intensity_w_cm2", synth.field.probe_intensity},
                {"probe_fwhm_fs", synth.field.probe_fwhm_fs},
                {"harmonics", harm},
                {"delays_au", synth.field.delays},
                {"peak_fwhm_au", o.peak_fwhm},
                {"model", o.model == synth::SidebandModel::three_sideband ? "3sb" : "1sb"},
                {"higher_order_paths", o.include_higher_order_paths},
                {"antisymmetrize", o.phase_options.antisymmetrize},
                {"noise_sigma", synth.noise_sigma},
                {"drift",
                 {{"additive_linear", synth.drift.additive_linear},
                  {"additive_quadratic", synth.drift.additive_quadratic},
                  {"scale_linear", synth.drift.scale_linear},
                  {"scale_quadratic", synth.drift.scale_quadratic}}}};
  const auto& t = tdse;
  j["tdse"] = {{"dr", t.grid.dr},
               {"r_max", t.grid.r_max},
               {"absorber_fraction", t.grid.absorber_fraction},
               {"absorber_exponent", t.grid.absorber_exponent},
               {"l_max", t.l_max},
               {"dt", t.dt},
               {"wavelength_nm", t.pulses.fundamental_nm},
               {"harmonic_orders", t.pulses.harmonic_orders},
               {"harmonic_phases_rad", t.pulses.harmonic_phases},
               {"harmonic_intensity_w_cm2", t.pulses.harmonic_intensity},
               {"xuv_fwhm_fs", t.pulses.xuv_fwhm_fs},
               {"probe_intensity_w_cm2", t.pulses.probe_intensity},
               {"probe_fwhm_fs", t.pulses.probe_fwhm_fs},
               {"fwhm_margin", t.fwhm_margin},
               {"basis_e_max_au", t.basis_e_max},
               {"energy_step_ev", t.energy_step_ev},
               {"energy_min_ev", t.energy_min_ev},
               {"delay_count", t.delays_per_scan},
               {"delay_periods", t.delay_periods},
               {"center_delays", t.center_delays}};
  j["fit"] = {{"window_ev", fit.window_ev}, {"groups", fit.groups}, {"frequency_scan", fit.frequency_scan}};
  j["compare"] = {{"antisymmetrize", compare.antisymmetrize}};
  return j;
}

}  // namespace rabbitt::config
