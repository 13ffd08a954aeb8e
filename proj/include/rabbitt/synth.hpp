#pragma once

// Perturbative RABBITT spectrogram generator.
//
// Each path contributes E_xuv e^{i phi_q} (E_probe / E_ref)^{n} c_N e^{i arg M}
// e^{i (n_abs - n_emit) omega tau}; the band signal is the squared modulus of
// the coherent sum and every peak is a Gaussian spectral profile. Absolute
// amplitudes are a model (one constant per order); only the phases come from
// the analytic phase engine.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rabbitt/errors.hpp"
#include "rabbitt/phases.hpp"
#include "rabbitt/units.hpp"

namespace rabbitt::synth {

using units::Band;

struct Harmonic {
  int order = 0;             ///< odd multiple of the 2 omega quantum
  double phase = 0.0;        ///< spectral phase phi_q (rad)
  double intensity = 1e9;    ///< W/cm^2
};

struct FieldConfig {
  double probe_wavelength_nm = 800.0;
  double probe_intensity = 1e11;   ///< W/cm^2
  double probe_fwhm_fs = 20.0;
  std::vector<Harmonic> harmonics;
  std::vector<double> delays;      ///< a.u., uniform

  double omega() const { return units::photon_energy(probe_wavelength_nm); }

  void validate() const {
    if (harmonics.size() < 2) throw PreconditionError("FieldConfig: need at least two harmonics");
    for (const auto& h : harmonics) {
      if (h.order <= 0 || h.order % 2 == 0)
        throw PreconditionError("FieldConfig: harmonic orders must be odd positive integers");
      if (!(h.intensity >= 0.0)) throw PreconditionError("FieldConfig: negative harmonic intensity");
    }
    if (!(probe_intensity >= 0.0)) throw PreconditionError("FieldConfig: negative probe intensity");
    if (delays.size() < 2) throw PreconditionError("FieldConfig: need at least two delays");
    const double step = delays[1] - delays[0];
    if (!(step > 0.0)) throw PreconditionError("FieldConfig: delays must increase");
    for (std::size_t i = 1; i < delays.size(); ++i)
      if (std::abs((delays[i] - delays[i - 1]) - step) > 1e-9 * std::abs(step) + 1e-12)
        throw PreconditionError("FieldConfig: delay grid must be uniform");
  }
};

/// Uniform delays covering `periods` oscillation periods of 4 omega with `count` samples.
inline std::vector<double> delay_grid(double omega, int count, double periods, double start = 0.0) {
  if (count < 2 || !(periods > 0.0)) throw PreconditionError("delay_grid: bad parameters");
  const double period = 2.0 * std::numbers::pi / (4.0 * omega);
  std::vector<double> d(count);
  const double step = periods * period / count;
  for (int i = 0; i < count; ++i) d[i] = start + step * i;
  return d;
}

struct DelayScan {
  std::vector<double> energies;  ///< a.u., strictly increasing
  std::vector<double> delays;    ///< a.u.
  std::vector<double> signal;    ///< row-major [delay][energy]

  std::size_t n_energy() const { return energies.size(); }
  std::size_t n_delay() const { return delays.size(); }
  double& at(std::size_t i_delay, std::size_t i_energy) { return signal[i_delay * energies.size() + i_energy]; }
  double at(std::size_t i_delay, std::size_t i_energy) const {
    return signal[i_delay * energies.size() + i_energy];
  }

  void validate() const {
    if (energies.empty() || delays.empty()) throw ConfigError("DelayScan: empty axes");
    if (signal.size() != energies.size() * delays.size())
      throw ConfigError("DelayScan: signal size does not match axes");
    for (std::size_t i = 1; i < energies.size(); ++i)
      if (!(energies[i] > energies[i - 1])) throw ConfigError("DelayScan: energy axis not increasing");
    for (double s : signal)
      if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("DelayScan: signal must be finite and >= 0");
  }
};

enum class SidebandModel { one_sideband, three_sideband };

struct SynthOptions {
  double charge = 1.0;
  int lambda = 1;
  double ip = 0.5;
  double peak_fwhm = units::ev_to_au(0.3);
  SidebandModel model = SidebandModel::three_sideband;
  /// Also add the fourth-order paths E-G and K-M.
  bool include_higher_order_paths = false;
  /// Amplitude constant per perturbative order N (index N, 1..4).
  std::array<double, 5> order_constants = {0.0, 1.0, 1.0, 0.6, 0.3};
  /// Probe intensity at which (E_probe / E_ref) = 1.
  double reference_intensity = 1e11;
  phases::PhaseOptions phase_options{};
  /// Energy axis; if empty a 0.01 eV grid around the comb is used.
  std::vector<double> energies;
};

/// One spectral peak and the paths that populate it.
struct PeakModel {
  std::string name;   ///< "H9", "S10l", ...
  int q = 0;          ///< group order (sidebands) or harmonic order
  bool sideband = false;
  Band band = Band::center;
  double energy = 0.0;
  struct Path {
    int harmonic = 0;
    int order = 1;
    int net_probe = 0;  ///< n_abs - n_emit (in units of the probe quantum)
    double atomic_phase = 0.0;
  };
  std::vector<Path> paths;
};

namespace detail {

inline const Harmonic* find_harmonic(const FieldConfig& cfg, int order) {
  for (const auto& h : cfg.harmonics)
    if (h.order == order) return &h;
  return nullptr;
}

inline PeakModel::Path to_path(const phases::PhotonPath& p, int harmonic, double charge,
                               const phases::PhaseOptions& opt) {
  int net = 0;
  for (int s : p.steps) net += s;
  return {harmonic, p.order(), net, phases::decompose_path_phase(p, charge, opt).unwrapped};
}

}  // namespace detail

/// The peaks (harmonics and sidebands) of the comb and their interfering paths.
inline std::vector<PeakModel> peak_models(const FieldConfig& cfg, const SynthOptions& opt) {
  cfg.validate();
  const double w = cfg.omega();
  std::vector<int> orders;
  for (const auto& h : cfg.harmonics) orders.push_back(h.order);
  std::sort(orders.begin(), orders.end());

  std::vector<PeakModel> peaks;
  for (int order : orders) {
    const double e = order * 2.0 * w - opt.ip;
    if (!(e > 0.0)) continue;
    PeakModel pk;
    pk.name = "H" + std::to_string(order);
    pk.q = order;
    pk.energy = e;
    pk.paths.push_back({order, 1, 0, 0.0});
    peaks.push_back(std::move(pk));
  }

  for (std::size_t i = 0; i + 1 < orders.size(); ++i) {
    if (orders[i + 1] != orders[i] + 2) continue;
    const int q = orders[i] + 1;
    const double h_lower = orders[i] * 2.0 * w - opt.ip;
    if (!(h_lower > 0.0)) continue;
    const units::SidebandLadder ladder(q, w, opt.ip);
    const auto& po = opt.phase_options;

    if (opt.model == SidebandModel::one_sideband) {
      PeakModel pk;
      pk.name = "S" + std::to_string(q);
      pk.q = q;
      pk.sideband = true;
      pk.energy = ladder.center();
      const double w2 = 2.0 * w;
      // one probe quantum of 2 omega counts as two omega quanta in the delay phase
      auto a = detail::to_path(phases::PhotonPath::build("A", opt.lambda, ladder.harmonic_upper(), w2, {-1}),
                               q + 1, opt.charge, po);
      auto b = detail::to_path(phases::PhotonPath::build("B", opt.lambda, ladder.harmonic_lower(), w2, {+1}),
                               q - 1, opt.charge, po);
      a.net_probe *= 2;
      b.net_probe *= 2;
      pk.paths = {a, b};
      peaks.push_back(std::move(pk));
      continue;
    }

    for (Band band : {Band::lower, Band::center, Band::higher}) {
      PeakModel pk;
      pk.name = "S" + std::to_string(q) + std::string(1, units::band_name(band)[0]);
      pk.q = q;
      pk.sideband = true;
      pk.band = band;
      pk.energy = ladder.band(band);
      const auto dom = phases::dominant_paths(band, ladder, opt.lambda);
      pk.paths.push_back(detail::to_path(dom.emission, q + 1, opt.charge, po));
      pk.paths.push_back(detail::to_path(dom.absorption, q - 1, opt.charge, po));
      if (opt.include_higher_order_paths) {
        for (const auto& p : phases::higher_order_paths(band, ladder, opt.lambda))
          pk.paths.push_back(detail::to_path(p, band == Band::lower ? q - 1 : q + 1, opt.charge, po));
      }
      peaks.push_back(std::move(pk));
    }
  }
  return peaks;
}

/// Default energy axis: 0.01 eV bins from one probe quantum below the lowest
/// harmonic peak to one above the highest.
inline std::vector<double> default_energy_axis(const FieldConfig& cfg, const SynthOptions& opt) {
  const double w = cfg.omega();
  int lo = 1 << 30, hi = 0;
  for (const auto& h : cfg.harmonics) {
    lo = std::min(lo, h.order);
    hi = std::max(hi, h.order);
  }
  const double e_lo = std::max(units::ev_to_au(0.01), lo * 2.0 * w - opt.ip - 2.0 * w);
  const double e_hi = hi * 2.0 * w - opt.ip + 2.0 * w;
  const double step = units::ev_to_au(0.01);
  std::vector<double> axis;
  for (double e = e_lo; e <= e_hi; e += step) axis.push_back(e);
  return axis;
}

/// Delay-resolved spectrum whose sidebands oscillate as
/// I0 + I1 cos(4 omega tau - Delta phi_XUV - Delta phi_atom).
inline DelayScan synthesize_scan(const FieldConfig& cfg, const SynthOptions& opt) {
  cfg.validate();
  if (!(opt.peak_fwhm > 0.0)) throw PreconditionError("synthesize_scan: peak width must be positive");
  const double w = cfg.omega();
  const auto peaks = peak_models(cfg, opt);
  bool any_sideband = false;
  for (const auto& p : peaks) any_sideband |= p.sideband;
  if (!any_sideband) throw PreconditionError("synthesize_scan: no sideband group above threshold");

  DelayScan scan;
  scan.energies = opt.energies.empty() ? default_energy_axis(cfg, opt) : opt.energies;
  scan.delays = cfg.delays;
  scan.signal.assign(scan.n_energy() * scan.n_delay(), 0.0);

  const double e_ref = units::field_from_intensity(opt.reference_intensity);
  const double probe_ratio = e_ref > 0.0 ? units::field_from_intensity(cfg.probe_intensity) / e_ref : 0.0;
  const double gauss = 4.0 * std::numbers::ln2 / (opt.peak_fwhm * opt.peak_fwhm);

  for (std::size_t it = 0; it < scan.n_delay(); ++it) {
    const double tau = scan.delays[it];
    for (const auto& pk : peaks) {
      std::complex<double> amp = 0.0;
      for (const auto& p : pk.paths) {
        const Harmonic* h = detail::find_harmonic(cfg, p.harmonic);
        if (!h) continue;
        const int n_probe = p.order - 1;
        const double mag = units::field_from_intensity(h->intensity) *
                           std::pow(probe_ratio, n_probe) * opt.order_constants.at(p.order);
        amp += std::polar(mag, h->phase + p.atomic_phase + p.net_probe * w * tau);
      }
      const double height = std::norm(amp);
      if (height == 0.0) continue;
      for (std::size_t ie = 0; ie < scan.n_energy(); ++ie) {
        const double de = scan.energies[ie] - pk.energy;
        scan.at(it, ie) += height * std::exp(-gauss * de * de);
      }
    }
  }
  return scan;
}

/// Slow drift and white noise, both relative to the scan's peak signal:
/// s -> s (1 + m1 tau + m2 tau^2) + peak (a1 tau + a2 tau^2) + N(0, (sigma peak)^2).
struct DriftModel {
  double additive_linear = 0.0;
  double additive_quadratic = 0.0;
  double scale_linear = 0.0;
  double scale_quadratic = 0.0;
};

inline DelayScan apply_decay_and_noise(const DelayScan& scan, const DriftModel& drift, double sigma,
                                       std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw PreconditionError("apply_decay_and_noise: sigma must be >= 0");
  scan.validate();
  DelayScan out = scan;
  const double peak = *std::max_element(scan.signal.begin(), scan.signal.end());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t clamped = 0;
  for (std::size_t it = 0; it < out.n_delay(); ++it) {
    const double tau = out.delays[it];
    const double scale = 1.0 + drift.scale_linear * tau + drift.scale_quadratic * tau * tau;
    const double offset = peak * (drift.additive_linear * tau + drift.additive_quadratic * tau * tau);
    for (std::size_t ie = 0; ie < out.n_energy(); ++ie) {
      double v = scan.at(it, ie) * scale + offset;
      if (sigma > 0.0) v += sigma * peak * normal(rng);
      if (v < 0.0) {
        v = 0.0;
        ++clamped;
      }
      out.at(it, ie) = v;
    }
  }
  if (clamped > 0)
    warn("apply_decay_and_noise: clamped " + std::to_string(clamped) + " negative samples to zero");
  return out;
}

}  // namespace rabbitt::synth
