#pragma once

// Hartree atomic units are used throughout; eV, nm, fs, as and W/cm^2 only
// appear at conversion boundaries.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "rabbitt/errors.hpp"

namespace rabbitt::units {

// CODATA 2018.
inline constexpr double hartree_ev = 27.211386245988;
inline constexpr double speed_of_light_au = 137.035999084;
inline constexpr double bohr_m = 5.29177210903e-11;
inline constexpr double time_au_s = 2.4188843265857e-17;
inline constexpr double time_au_fs = time_au_s * 1e15;
inline constexpr double time_au_as = time_au_s * 1e18;
inline constexpr double field_au_v_per_m = 5.14220674763e11;
inline constexpr double vacuum_permittivity = 8.8541878128e-12;
inline constexpr double speed_of_light_si = 299792458.0;

/// Intensity (W/cm^2) of a linearly polarized wave with peak field 1 a.u.
inline constexpr double intensity_au_w_cm2 =
    0.5 * speed_of_light_si * vacuum_permittivity * field_au_v_per_m * field_au_v_per_m * 1e-4;

constexpr double ev_to_au(double ev) { return ev / hartree_ev; }
constexpr double au_to_ev(double au) { return au * hartree_ev; }
constexpr double fs_to_au(double fs) { return fs / time_au_fs; }
constexpr double au_to_fs(double au) { return au * time_au_fs; }
constexpr double au_to_as(double au) { return au * time_au_as; }
constexpr double as_to_au(double as) { return as / time_au_as; }

/// Photon energy (a.u.) for a vacuum wavelength in nm.
inline double photon_energy(double wavelength_nm) {
  if (!(wavelength_nm > 0.0)) throw PreconditionError("photon_energy: wavelength must be positive");
  if (std::isinf(wavelength_nm)) return 0.0;
  const double lambda_au = wavelength_nm * 1e-9 / bohr_m;
  return 2.0 * std::numbers::pi * speed_of_light_au / lambda_au;
}

inline double momentum_from_energy(double energy) {
  if (!(energy >= 0.0)) throw PreconditionError("momentum_from_energy: negative energy");
  return std::sqrt(2.0 * energy);
}

inline double energy_from_momentum(double k) { return 0.5 * k * k; }

/// Peak field amplitude (a.u.) for a peak intensity in W/cm^2.
inline double field_from_intensity(double intensity_w_cm2) {
  if (!(intensity_w_cm2 >= 0.0)) throw PreconditionError("field_from_intensity: negative intensity");
  return std::sqrt(intensity_w_cm2 / intensity_au_w_cm2);
}

/// Wraps a phase into (-pi, pi].
inline double wrap_phase(double phase) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(phase, two_pi);  // [-pi, pi]
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

/// Converts an oscillation phase at 4*omega into a delay (a.u.): time = phase / (4 omega).
inline double phase_to_delay(double phase, double omega) { return phase / (4.0 * omega); }

/// Strictly increasing list of positive photoelectron energies (a.u.).
class EnergyGrid {
 public:
  EnergyGrid() = default;
  explicit EnergyGrid(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(values_[i] > 0.0) || !std::isfinite(values_[i]))
        throw PreconditionError("EnergyGrid: energies must be positive and finite");
      if (i > 0 && !(values_[i] > values_[i - 1]))
        throw PreconditionError("EnergyGrid: energies must be strictly increasing");
    }
  }

  static EnergyGrid uniform(double first, double last, std::size_t count) {
    if (count < 2 || !(last > first)) throw PreconditionError("EnergyGrid::uniform: bad range");
    std::vector<double> v(count);
    const double step = (last - first) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) v[i] = first + step * static_cast<double>(i);
    return EnergyGrid(std::move(v));
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

enum class Band { lower, center, higher };

inline const char* band_name(Band b) {
  switch (b) {
    case Band::lower: return "lower";
    case Band::center: return "center";
    case Band::higher: return "higher";
  }
  return "?";
}

inline Band band_from_name(const std::string& s) {
  if (s == "lower" || s == "l") return Band::lower;
  if (s == "center" || s == "c") return Band::center;
  if (s == "higher" || s == "h") return Band::higher;
  throw ConfigError("unknown band '" + s + "'");
}

/// Energies of one 3-sideband group: H_{q-1}, S_l, S_c, S_h, H_{q+1}.
///
/// Only q, omega and Ip are stored; every level is derived from them so the
/// spacing is exactly omega by construction.
class SidebandLadder {
 public:
  SidebandLadder(int q, double omega, double ip) : q_(q), omega_(omega), ip_(ip) {
    if (q % 2 != 0) throw PreconditionError("sideband_ladder: group order q must be even");
    if (!(omega > 0.0)) throw PreconditionError("sideband_ladder: omega must be positive");
    if (!(harmonic_lower() > 0.0))
      throw PreconditionError("sideband_ladder: H_{q-1} = " + std::to_string(q - 1) +
                              " * 2 omega lies below the ionization threshold");
  }

  int q() const { return q_; }
  double omega() const { return omega_; }
  double ip() const { return ip_; }

  double harmonic_lower() const { return (q_ - 1) * 2.0 * omega_ - ip_; }
  double lower() const { return harmonic_lower() + omega_; }
  double center() const { return harmonic_lower() + 2.0 * omega_; }
  double higher() const { return harmonic_lower() + 3.0 * omega_; }
  double harmonic_upper() const { return harmonic_lower() + 4.0 * omega_; }

  double band(Band b) const {
    switch (b) {
      case Band::lower: return lower();
      case Band::center: return center();
      case Band::higher: return higher();
    }
    return center();
  }

  /// Level reached from H_{q-1} after n net probe absorptions (n may be negative).
  double level(int n) const { return harmonic_lower() + n * omega_; }

 private:
  int q_;
  double omega_;
  double ip_;
};

inline SidebandLadder sideband_ladder(int q, double omega, double ip) {
  return SidebandLadder(q, omega, ip);
}

}  // namespace rabbitt::units
