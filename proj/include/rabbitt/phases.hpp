#pragma once

// Analytic phase engine: continuum-continuum phase, Coulomb phase, the
// step-wise decomposition of N-photon path phases and the three atomic
// phases of a 3-sideband group.
//
// Model limitations: a single bound-continuum channel lambda is assumed and
// the cc phase does not depend on the angular momenta of the continuum
// states. Bound-state contributions to the intermediate resolvents are
// neglected. The cc phase formula breaks down near threshold; values there
// are computed but carry no accuracy claim.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "rabbitt/errors.hpp"
#include "rabbitt/specfun.hpp"
#include "rabbitt/units.hpp"

namespace rabbitt::phases {

using units::Band;
using units::SidebandLadder;

struct PhaseOptions {
  /// Replace phi_cc(k, kappa) by (phi_cc(k, kappa) - phi_cc(kappa, k)) / 2.
  bool antisymmetrize = false;
};

struct CcPhaseInput {
  double k = 0.0;      ///< final momentum
  double kappa = 0.0;  ///< initial continuum momentum
  double charge = 1.0;
};

inline void validate(const CcPhaseInput& in) {
  if (!(in.k > 0.0) || !(in.kappa > 0.0))
    throw PreconditionError("cc_phase: momenta must be positive");
  if (in.k == in.kappa) throw PreconditionError("cc_phase: singular for k == kappa");
  if (!(in.charge >= 0.0)) throw PreconditionError("cc_phase: residual charge must be >= 0");
}

namespace detail {

// arg of (2kappa)^{iZ/kappa} / (2k)^{iZ/k} * (Gamma[2+i nu] + gamma(k,kappa)) / (kappa-k)^{i nu},
// nu = Z (1/kappa - 1/k), gamma = (iZ(kappa-k)/2)(1/kappa^2 + 1/k^2) Gamma[1+i nu].
// Gamma[2+i nu] + gamma = Gamma[1+i nu] ((1+i nu) + iZ(kappa-k)/2 (1/kappa^2+1/k^2)).
// For kappa < k the factor (kappa-k)^{i nu} only differs from |kappa-k|^{i nu}
// by a real positive factor, so its phase is nu ln|kappa-k| on either branch.
inline double cc_phase_raw(double k, double kappa, double z) {
  if (z == 0.0) return 0.0;
  const double nu = z * (1.0 / kappa - 1.0 / k);
  const double coulomb_log = (z / kappa) * std::log(2.0 * kappa) - (z / k) * std::log(2.0 * k);
  const double gamma_arg = specfun::arg_gamma_unwrapped({1.0, nu});
  const std::complex<double> bracket(
      1.0, nu + 0.5 * z * (kappa - k) * (1.0 / (kappa * kappa) + 1.0 / (k * k)));
  return coulomb_log + gamma_arg + std::arg(bracket) - nu * std::log(std::abs(kappa - k));
}

}  // namespace detail

/// Continuous (unreduced) phi_cc.
inline double cc_phase_unwrapped(const CcPhaseInput& in, PhaseOptions opt = {}) {
  validate(in);
  const double forward = detail::cc_phase_raw(in.k, in.kappa, in.charge);
  if (!opt.antisymmetrize) return forward;
  return 0.5 * (forward - detail::cc_phase_raw(in.kappa, in.k, in.charge));
}

/// Phase acquired in a one-photon continuum-continuum transition kappa -> k, in (-pi, pi].
inline double cc_phase(const CcPhaseInput& in, PhaseOptions opt = {}) {
  return units::wrap_phase(cc_phase_unwrapped(in, opt));
}

/// Continuous Coulomb phase arg Gamma(lambda + 1 - i Z / kappa).
inline double coulomb_phase_unwrapped(int lambda, double kappa, double charge) {
  if (lambda < 0) throw PreconditionError("coulomb_phase: lambda must be >= 0");
  if (!(kappa > 0.0)) throw PreconditionError("coulomb_phase: kappa must be positive");
  if (charge == 0.0) return 0.0;
  return specfun::arg_gamma_unwrapped({lambda + 1.0, -charge / kappa});
}

/// Wigner (Coulomb) phase of the one-photon ionization step, in (-pi, pi].
inline double coulomb_phase(int lambda, double kappa, double charge) {
  return units::wrap_phase(coulomb_phase_unwrapped(lambda, kappa, charge));
}

/// One XUV absorption followed by N-1 probe-photon exchanges.
///
/// momenta[0] is the momentum reached by the XUV step, momenta[n] the
/// momentum after the n-th probe step; steps[n] = +1 (absorb) or -1 (emit).
struct PhotonPath {
  std::string label;
  int lambda = 1;
  double omega = 0.0;
  std::vector<double> momenta;
  std::vector<int> steps;

  int order() const { return static_cast<int>(momenta.size()); }

  /// Builds the path from the XUV-reached energy and the probe step signs.
  static PhotonPath build(std::string label, int lambda, double first_energy, double omega,
                          std::vector<int> steps) {
    PhotonPath p;
    p.label = std::move(label);
    p.lambda = lambda;
    p.omega = omega;
    p.steps = std::move(steps);
    double energy = first_energy;
    if (!(energy > 0.0))
      throw PreconditionError("PhotonPath '" + p.label + "': XUV step ends below threshold");
    p.momenta.push_back(units::momentum_from_energy(energy));
    for (int s : p.steps) {
      if (s != 1 && s != -1) throw PreconditionError("PhotonPath: steps must be +1 or -1");
      energy += s * omega;
      if (!(energy > 0.0))
        throw PreconditionError("PhotonPath '" + p.label + "': intermediate state below threshold");
      p.momenta.push_back(units::momentum_from_energy(energy));
    }
    p.validate();
    return p;
  }

  void validate() const {
    if (order() < 2) throw PreconditionError("PhotonPath: order N must be >= 2");
    if (steps.size() + 1 != momenta.size())
      throw PreconditionError("PhotonPath: one step sign per probe photon required");
    if (lambda < 0) throw PreconditionError("PhotonPath: lambda must be >= 0");
    for (std::size_t n = 0; n < steps.size(); ++n) {
      const double de = units::energy_from_momentum(momenta[n + 1]) -
                        units::energy_from_momentum(momenta[n]);
      if (std::abs(de - steps[n] * omega) > 1e-9 * std::max(1.0, omega))
        throw PreconditionError("PhotonPath '" + label + "': momenta inconsistent with the omega ladder");
    }
  }
};

struct PhaseTerm {
  std::string label;
  double value = 0.0;
};

struct AtomicPhaseResult {
  double phase = 0.0;      ///< in (-pi, pi]
  double unwrapped = 0.0;  ///< exact sum of the terms
  std::vector<PhaseTerm> terms;
};

/// Phase of an N-th order path amplitude:
/// (N-2) pi/2 - lambda pi/2 + eta_lambda(k_1) + sum_n phi_cc(k_{n+1}, k_n).
inline AtomicPhaseResult decompose_path_phase(const PhotonPath& path, double charge,
                                              PhaseOptions opt = {}) {
  path.validate();
  const int n = path.order();
  AtomicPhaseResult r;
  r.terms.push_back({"order_offset", (n - 2) * std::numbers::pi / 2.0});
  r.terms.push_back({"lambda_offset", -path.lambda * std::numbers::pi / 2.0});
  r.terms.push_back({"eta", coulomb_phase_unwrapped(path.lambda, path.momenta[0], charge)});
  for (int i = 0; i + 1 < n; ++i) {
    if (path.momenta[i + 1] == path.momenta[i])
      throw PreconditionError("decompose_path_phase: degenerate consecutive momenta");
    r.terms.push_back({"phi_cc[" + std::to_string(i + 2) + "," + std::to_string(i + 1) + "]",
                       cc_phase_unwrapped({path.momenta[i + 1], path.momenta[i], charge}, opt)});
  }
  for (const auto& t : r.terms) r.unwrapped += t.value;
  r.phase = units::wrap_phase(r.unwrapped);
  return r;
}

/// The emission (from H_{q+1}) and absorption (from H_{q-1}) paths whose
/// interference drives the given band.
struct InterferingPaths {
  PhotonPath emission;
  PhotonPath absorption;
};

inline InterferingPaths dominant_paths(Band band, const SidebandLadder& ladder, int lambda) {
  const double w = ladder.omega();
  const double lo = ladder.harmonic_lower();
  const double hi = ladder.harmonic_upper();
  switch (band) {
    case Band::lower:
      return {PhotonPath::build("C", lambda, hi, w, {-1, -1, -1}),
              PhotonPath::build("D", lambda, lo, w, {+1})};
    case Band::center:
      return {PhotonPath::build("H", lambda, hi, w, {-1, -1}),
              PhotonPath::build("I", lambda, lo, w, {+1, +1})};
    case Band::higher:
      return {PhotonPath::build("J", lambda, hi, w, {-1}),
              PhotonPath::build("N", lambda, lo, w, {+1, +1, +1})};
  }
  throw PreconditionError("dominant_paths: unknown band");
}

/// Fourth-order paths that reach the same band as the second-order path
/// (E, F, G for S_l from H_{q-1}; K, L, M for S_h from H_{q+1}).
inline std::vector<PhotonPath> higher_order_paths(Band band, const SidebandLadder& ladder,
                                                  int lambda) {
  const double w = ladder.omega();
  std::vector<PhotonPath> out;
  if (band == Band::lower) {
    const double lo = ladder.harmonic_lower();
    out.push_back(PhotonPath::build("E", lambda, lo, w, {+1, +1, -1}));
    out.push_back(PhotonPath::build("F", lambda, lo, w, {+1, -1, +1}));
    if (lo - w > 0.0) out.push_back(PhotonPath::build("G", lambda, lo, w, {-1, +1, +1}));
  } else if (band == Band::higher) {
    const double hi = ladder.harmonic_upper();
    out.push_back(PhotonPath::build("K", lambda, hi, w, {-1, -1, +1}));
    out.push_back(PhotonPath::build("L", lambda, hi, w, {-1, +1, -1}));
    out.push_back(PhotonPath::build("M", lambda, hi, w, {+1, -1, -1}));
  }
  return out;
}

namespace detail {
inline std::string level_name(const SidebandLadder& ladder, double momentum) {
  const double e = units::energy_from_momentum(momentum);
  const int n = static_cast<int>(std::lround((e - ladder.harmonic_lower()) / ladder.omega()));
  switch (n) {
    case 0: return "q-1";
    case 1: return "l";
    case 2: return "c";
    case 3: return "h";
    case 4: return "q+1";
    default: return "n" + std::to_string(n);
  }
}
}  // namespace detail

/// Atomic phase of one band of a 3-sideband group (Delta phi^{l,c,h}_atom),
/// including the +pi (lower) and -pi (higher) offsets.
///
/// Terms: Delta eta_lambda, each signed phi_cc, and the pi offset.
inline AtomicPhaseResult atomic_phase_3sb(Band band, const SidebandLadder& ladder, double charge,
                                          int lambda, PhaseOptions opt = {}) {
  const auto paths = dominant_paths(band, ladder, lambda);
  const auto em = decompose_path_phase(paths.emission, charge, opt);
  const auto ab = decompose_path_phase(paths.absorption, charge, opt);

  AtomicPhaseResult r;
  r.terms.push_back({"d_eta", em.terms[2].value - ab.terms[2].value});
  auto add_cc = [&](const PhotonPath& p, const AtomicPhaseResult& d, double sign) {
    for (std::size_t i = 3; i < d.terms.size(); ++i) {
      const std::size_t step = i - 3;
      const std::string name = (sign > 0 ? "+phi_cc(" : "-phi_cc(") +
                               detail::level_name(ladder, p.momenta[step + 1]) + "," +
                               detail::level_name(ladder, p.momenta[step]) + ")";
      r.terms.push_back({name, sign * d.terms[i].value});
    }
  };
  add_cc(paths.emission, em, +1.0);
  add_cc(paths.absorption, ab, -1.0);
  r.terms.push_back({"pi_offset", em.terms[0].value - ab.terms[0].value});
  for (const auto& t : r.terms) r.unwrapped += t.value;
  r.phase = units::wrap_phase(r.unwrapped);
  return r;
}

/// Atomic phase of the single sideband of a 1-SB scheme (probe at 2 omega):
/// Delta eta + phi_cc(s, q+1) - phi_cc(s, q-1).
inline AtomicPhaseResult atomic_phase_1sb(int q, double omega, double ip, double charge, int lambda,
                                          PhaseOptions opt = {}) {
  const SidebandLadder ladder(q, omega, ip);
  const auto a = decompose_path_phase(
      PhotonPath::build("A", lambda, ladder.harmonic_upper(), 2.0 * omega, {-1}), charge, opt);
  const auto b = decompose_path_phase(
      PhotonPath::build("B", lambda, ladder.harmonic_lower(), 2.0 * omega, {+1}), charge, opt);
  AtomicPhaseResult r;
  r.terms.push_back({"d_eta", a.terms[2].value - b.terms[2].value});
  r.terms.push_back({"+phi_cc(s,q+1)", a.terms[3].value});
  r.terms.push_back({"-phi_cc(s,q-1)", -b.terms[3].value});
  for (const auto& t : r.terms) r.unwrapped += t.value;
  r.phase = units::wrap_phase(r.unwrapped);
  return r;
}

struct PhaseTableRow {
  int q = 0;
  Band band = Band::center;
  double energy = 0.0;  ///< band kinetic energy (a.u.)
  AtomicPhaseResult result;
  double delay = 0.0;  ///< result.phase / (4 omega), a.u.
};

/// Atomic phases of every band of every group whose center sideband lies in
/// [energy_min, energy_max] (a.u.).
inline std::vector<PhaseTableRow> phase_table(double energy_min, double energy_max, double omega,
                                              double ip, double charge, int lambda,
                                              PhaseOptions opt = {}) {
  if (!(energy_max > energy_min)) throw PreconditionError("phase_table: empty energy range");
  std::vector<PhaseTableRow> rows;
  for (int q = 2;; q += 2) {
    const double h_lower = (q - 1) * 2.0 * omega - ip;
    const double center = h_lower + 2.0 * omega;
    if (center > energy_max) break;
    if (h_lower <= 0.0 || center < energy_min) continue;
    const SidebandLadder ladder(q, omega, ip);
    for (Band b : {Band::lower, Band::center, Band::higher}) {
      PhaseTableRow row;
      row.q = q;
      row.band = b;
      row.energy = ladder.band(b);
      row.result = atomic_phase_3sb(b, ladder, charge, lambda, opt);
      row.delay = units::phase_to_delay(row.result.phase, omega);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace rabbitt::phases
