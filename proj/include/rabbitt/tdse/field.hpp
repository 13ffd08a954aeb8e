#pragma once

// Linearly polarized XUV pulse train plus probe:
//
//   E(t) = sum_q E_q g_x(t) cos(q 2 omega t - phi_q) + E_p g_p(t - tau) cos(omega (t - tau))
//
// with Gaussian intensity envelopes g(t) = exp(-2 ln2 t^2 / FWHM^2).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rabbitt/errors.hpp"
#include "rabbitt/units.hpp"

namespace rabbitt::tdse {

struct PulseTrainSpec {
  double fundamental_nm = 800.0;       ///< probe wavelength; harmonics are odd multiples of 2 omega
  std::vector<int> harmonic_orders = {9, 11, 13};
  std::vector<double> harmonic_phases;  ///< empty: all in phase
  double harmonic_intensity = 1e9;      ///< W/cm^2 per harmonic
  double xuv_fwhm_fs = 5.0;
  double probe_intensity = 1e11;
  double probe_fwhm_fs = 5.0;
  double delay = 0.0;                   ///< a.u.

  double omega() const { return units::photon_energy(fundamental_nm); }
  double xuv_fwhm() const { return units::fs_to_au(xuv_fwhm_fs); }
  double probe_fwhm() const { return units::fs_to_au(probe_fwhm_fs); }
  double phase_of(std::size_t i) const { return harmonic_phases.empty() ? 0.0 : harmonic_phases.at(i); }

  void validate() const {
    if (!(fundamental_nm > 0.0)) throw ConfigError("pulse: wavelength must be positive");
    if (harmonic_orders.empty()) throw ConfigError("pulse: no harmonics");
    for (int q : harmonic_orders)
      if (q <= 0 || q % 2 == 0) throw ConfigError("pulse: harmonic orders must be odd positive integers");
    if (!harmonic_phases.empty() && harmonic_phases.size() != harmonic_orders.size())
      throw ConfigError("pulse: harmonic_phases must match harmonic_orders");
    if (!(xuv_fwhm_fs > 0.0) || !(probe_fwhm_fs > 0.0)) throw ConfigError("pulse: durations must be positive");
    if (!(harmonic_intensity >= 0.0) || !(probe_intensity >= 0.0))
      throw ConfigError("pulse: intensities must be >= 0");
  }
};

inline double gaussian_envelope(double t, double fwhm) {
  return std::exp(-2.0 * std::numbers::ln2 * t * t / (fwhm * fwhm));
}

/// Time-domain field, evaluated analytically.
class PulseTrain {
 public:
  explicit PulseTrain(const PulseTrainSpec& spec) : spec_(spec) {
    spec.validate();
    omega_ = spec.omega();
    e_xuv_ = units::field_from_intensity(spec.harmonic_intensity);
    e_probe_ = units::field_from_intensity(spec.probe_intensity);
  }

  double xuv(double t) const {
    if (e_xuv_ == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < spec_.harmonic_orders.size(); ++i)
      s += std::cos(spec_.harmonic_orders[i] * 2.0 * omega_ * t - spec_.phase_of(i));
    return e_xuv_ * gaussian_envelope(t, spec_.xuv_fwhm()) * s;
  }

  double probe(double t) const {
    if (e_probe_ == 0.0) return 0.0;
    const double s = t - spec_.delay;
    return e_probe_ * gaussian_envelope(s, spec_.probe_fwhm()) * std::cos(omega_ * s);
  }

  double operator()(double t) const { return xuv(t) + probe(t); }

  /// Interval outside which every envelope is below `fraction` of its peak.
  std::pair<double, double> support(double fraction) const {
    auto half = [&](double fwhm) { return fwhm * std::sqrt(std::log(1.0 / fraction) / (2.0 * std::numbers::ln2)); };
    const double hx = half(spec_.xuv_fwhm()), hp = half(spec_.probe_fwhm());
    return {std::min(-hx, spec_.delay - hp), std::max(hx, spec_.delay + hp)};
  }

  const PulseTrainSpec& spec() const { return spec_; }

 private:
  PulseTrainSpec spec_;
  double omega_ = 0.0;
  double e_xuv_ = 0.0;
  double e_probe_ = 0.0;
};

/// Uniform time grid t_n = start + n dt, n = 0..steps.
struct TimeGrid {
  double start = 0.0;
  double dt = 0.05;
  std::size_t steps = 0;

  double at(std::size_t n) const { return start + dt * static_cast<double>(n); }
  double end() const { return at(steps); }

  /// Grid covering the pulses with `fwhm_margin` intensity FWHMs on each side.
  static TimeGrid covering(const PulseTrain& p, double dt, double fwhm_margin) {
    if (!(dt > 0.0)) throw ConfigError("time grid: dt must be positive");
    const auto& s = p.spec();
    const double t0 = std::min(-fwhm_margin * s.xuv_fwhm(), s.delay - fwhm_margin * s.probe_fwhm());
    const double t1 = std::max(fwhm_margin * s.xuv_fwhm(), s.delay + fwhm_margin * s.probe_fwhm());
    return {t0, dt, static_cast<std::size_t>(std::ceil((t1 - t0) / dt))};
  }
};

/// Field samples on the time grid. Throws if the grid cuts an envelope above
/// 1% of its peak.
inline std::vector<double> build_field(const PulseTrain& pulse, const TimeGrid& grid) {
  const auto [lo, hi] = pulse.support(1e-2);
  if (grid.start > lo || grid.end() < hi)
    throw PreconditionError("build_field: time grid too short to cover the pulses");
  std::vector<double> e(grid.steps + 1);
  for (std::size_t n = 0; n <= grid.steps; ++n) e[n] = pulse(grid.at(n));
  return e;
}

/// Trapezoidal integral of E^2 over the grid.
inline double field_energy(const std::vector<double>& samples, double dt) {
  if (samples.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : samples) s += x * x;
  s -= 0.5 * (samples.front() * samples.front() + samples.back() * samples.back());
  return s * dt;
}

}  // namespace rabbitt::tdse
