#pragma once

// Angle-integrated photoelectron spectrum by projection on the field-free
// eigenstates, with population bookkeeping.

#include <algorithm>
#include <cmath>
#include <vector>

#include "rabbitt/errors.hpp"
#include "rabbitt/tdse/eigen.hpp"
#include "rabbitt/tdse/propagator.hpp"

namespace rabbitt::tdse {

struct Projection {
  int l = 0;
  std::vector<double> energies;
  std::vector<double> populations;  ///< |<phi_j|u_l>|^2
};

struct SpectrumResult {
  std::vector<double> energies;  ///< output axis, a.u.
  std::vector<double> density;   ///< dP/dE summed over l
  std::vector<Projection> projections;
  double norm = 0.0;
  double bound_population = 0.0;
  double continuum_population = 0.0;
  double closure_error = 0.0;  ///< |norm - bound - continuum|
};

inline Projection project(const PartialWaveState& s, const PartialWaveBasis& basis, double dr) {
  Projection p;
  p.l = basis.l;
  p.energies = basis.energies;
  p.populations.resize(basis.energies.size());
  const Complex* u = s.wave(basis.l);
  for (std::size_t j = 0; j < basis.vectors.size(); ++j) {
    const auto& phi = basis.vectors[j];
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      re += phi[i] * u[i].real();
      im += phi[i] * u[i].imag();
    }
    p.populations[j] = dr * dr * (re * re + im * im);
  }
  return p;
}

/// Density of each continuum eigenstate, |c_j|^2 / Delta E_j, linearly
/// interpolated onto `axis` (zero outside the sampled range).
inline std::vector<double> continuum_density(const Projection& p, const std::vector<double>& axis) {
  std::vector<double> e, rho;
  for (std::size_t j = 0; j < p.energies.size(); ++j) {
    if (p.energies[j] <= 0.0) continue;
    e.push_back(p.energies[j]);
    rho.push_back(p.populations[j]);
  }
  std::vector<double> out(axis.size(), 0.0);
  if (e.size() < 2) return out;
  for (std::size_t j = 0; j < e.size(); ++j) {
    const double lo = j > 0 ? e[j - 1] : e[j];
    const double hi = j + 1 < e.size() ? e[j + 1] : e[j];
    const double width = (hi - lo) / (j > 0 && j + 1 < e.size() ? 2.0 : 1.0);
    rho[j] /= width;
  }
  for (std::size_t k = 0; k < axis.size(); ++k) {
    const double x = axis[k];
    if (x < e.front() || x > e.back()) continue;
    const auto it = std::upper_bound(e.begin(), e.end(), x);
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - e.begin()), e.size() - 1);
    const std::size_t i = j - 1;
    const double w = (x - e[i]) / (e[j] - e[i]);
    out[k] = (1.0 - w) * rho[i] + w * rho[j];
  }
  return out;
}

/// Projects the state on the eigenbasis. Throws NumericalError if bound plus
/// analyzed continuum population misses the remaining norm by more than
/// `closure_tolerance` (flux that left the analyzed range unaccounted).
inline SpectrumResult photoelectron_spectrum(const PartialWaveState& s, const EigenBasis& basis, double dr,
                                             const std::vector<double>& axis, double closure_tolerance = 1e-2) {
  if (static_cast<int>(basis.waves.size()) != s.l_max + 1)
    throw PreconditionError("photoelectron_spectrum: basis does not match the state");
  SpectrumResult r;
  r.energies = axis;
  r.density.assign(axis.size(), 0.0);
  r.norm = s.norm(dr);
  for (const auto& wave : basis.waves) {
    auto p = project(s, wave, dr);
    for (std::size_t j = 0; j < p.energies.size(); ++j)
      (p.energies[j] < 0.0 ? r.bound_population : r.continuum_population) += p.populations[j];
    const auto d = continuum_density(p, axis);
    for (std::size_t k = 0; k < axis.size(); ++k) r.density[k] += d[k];
    r.projections.push_back(std::move(p));
  }
  r.closure_error = std::abs(r.norm - r.bound_population - r.continuum_population);
  if (r.closure_error > closure_tolerance)
    throw NumericalError("photoelectron_spectrum: population bookkeeping off by " + std::to_string(r.closure_error));
  return r;
}

}  // namespace rabbitt::tdse
