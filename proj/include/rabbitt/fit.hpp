#pragma once

// Sideband phase extraction: energy-window integration, a linear
// least-squares fit of I0 + c1 tau + c2 tau^2 + I1 cos(4 omega tau - phi) at
// known frequency, and the per-group band report.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rabbitt/errors.hpp"
#include "rabbitt/synth.hpp"
#include "rabbitt/units.hpp"

namespace rabbitt::fit {

using units::Band;

inline const double default_window = units::ev_to_au(0.25);

struct Trace {
  std::vector<double> delays;
  std::vector<double> values;
};

/// Per-delay sum of the signal bins within +-window/2 of `center`.
inline Trace integrate_window(const synth::DelayScan& scan, double center, double window = default_window) {
  if (!(window > 0.0)) throw PreconditionError("integrate_window: window must be positive");
  if (scan.energies.empty()) throw PreconditionError("integrate_window: empty energy axis");
  const double lo = center - 0.5 * window, hi = center + 0.5 * window;
  if (lo < scan.energies.front() || hi > scan.energies.back())
    throw PreconditionError("integrate_window: window outside the energy axis");
  const auto first = std::lower_bound(scan.energies.begin(), scan.energies.end(), lo);
  const auto last = std::upper_bound(scan.energies.begin(), scan.energies.end(), hi);
  if (first >= last) throw PreconditionError("integrate_window: no energy bins inside the window");
  const auto i0 = static_cast<std::size_t>(first - scan.energies.begin());
  const auto i1 = static_cast<std::size_t>(last - scan.energies.begin());

  Trace t;
  t.delays = scan.delays;
  t.values.resize(scan.n_delay());
  for (std::size_t it = 0; it < scan.n_delay(); ++it) {
    double s = 0.0;
    for (std::size_t ie = i0; ie < i1; ++ie) s += scan.at(it, ie);
    t.values[it] = s;
  }
  return t;
}

struct SidebandFit {
  std::string band;
  double center_energy = 0.0;
  double i0 = 0.0;
  double c1 = 0.0;  ///< linear drift per a.u. of delay
  double c2 = 0.0;  ///< quadratic drift per a.u.^2
  double i1 = 0.0;
  double phase = 0.0;  ///< in (-pi, pi]
  double residual_rms = 0.0;
  double phase_error = 0.0;  ///< 1 sigma
};

/// Fits s(tau) = I0 + c1 tau + c2 tau^2 + I1 cos(freq tau - phi).
///
/// The trace is centered and renormalized before the regression and the
/// coefficients are mapped back, so I0, c1, c2, I1 and the residual are in
/// the units of the input.
inline SidebandFit fit_oscillation(const Trace& trace, double angular_frequency) {
  const std::size_t n = trace.delays.size();
  constexpr std::size_t p = 5;
  if (trace.values.size() != n) throw PreconditionError("fit_oscillation: size mismatch");
  if (n < p) throw NumericalError("fit_oscillation: fewer samples than parameters");
  if (n < 8) throw PreconditionError("fit_oscillation: at least 8 delay samples required");
  if (!(angular_frequency > 0.0)) throw PreconditionError("fit_oscillation: frequency must be positive");
  const auto [tmin, tmax] = std::minmax_element(trace.delays.begin(), trace.delays.end());
  const double span = *tmax - *tmin;
  const double period = 2.0 * std::numbers::pi / angular_frequency;
  // n uniform samples spanning one period cover (n-1)/n of it
  if (span * n / (n - 1.0) < period * (1.0 - 1e-9))
    throw PreconditionError("fit_oscillation: delays must span at least one oscillation period");

  const double t0 = 0.5 * (*tmin + *tmax);
  const double ts = std::max(0.5 * span, 1e-300);
  const double mean = std::accumulate(trace.values.begin(), trace.values.end(), 0.0) / n;
  double scale = 0.0;
  for (double v : trace.values) scale = std::max(scale, std::abs(v - mean));
  if (scale == 0.0) scale = 1.0;

  Eigen::MatrixXd a(n, p);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (trace.delays[i] - t0) / ts;
    const double arg = angular_frequency * trace.delays[i];
    a(i, 0) = 1.0;
    a(i, 1) = x;
    a(i, 2) = x * x;
    a(i, 3) = std::cos(arg);
    a(i, 4) = std::sin(arg);
    y(i) = (trace.values[i] - mean) / scale;
  }

  // Column-scaled QR with a rank check; aliased delays make the cos/sin
  // columns collinear with the polynomial ones.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(p))
    throw NumericalError("fit_oscillation: rank-deficient design (delays alias the oscillation)");
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - a * beta;
  const double rss = resid.squaredNorm();

  SidebandFit f;
  const double b0 = beta(0), b1 = beta(1), b2 = beta(2);
  f.i0 = mean + scale * (b0 - b1 * t0 / ts + b2 * t0 * t0 / (ts * ts));
  f.c1 = scale * (b1 / ts - 2.0 * b2 * t0 / (ts * ts));
  f.c2 = scale * b2 / (ts * ts);
  const double ca = beta(3), sb = beta(4);
  f.i1 = scale * std::hypot(ca, sb);
  f.phase = units::wrap_phase(std::atan2(sb, ca));
  f.residual_rms = scale * std::sqrt(rss / n);

  if (n > p) {
    const double sigma2 = rss / static_cast<double>(n - p);
    const Eigen::MatrixXd ata = a.transpose() * a;
    const Eigen::MatrixXd cov = sigma2 * ata.inverse();
    const double r2 = ca * ca + sb * sb;
    if (r2 > 0.0) {
      const double var = (sb * sb * cov(3, 3) + ca * ca * cov(4, 4) - 2.0 * ca * sb * cov(3, 4)) / (r2 * r2);
      f.phase_error = std::sqrt(std::max(var, 0.0));
    }
  }
  return f;
}

/// Residual RMS of the fit at angular frequencies within +-rel_span of the
/// nominal one; a minimum away from the nominal frequency flags synthesis or
/// propagation errors.
struct FrequencyScan {
  std::vector<double> frequencies;
  std::vector<double> residuals;
  double best_frequency = 0.0;
};

inline FrequencyScan frequency_scan(const Trace& trace, double nominal, double rel_span = 0.05,
                                    int points = 41) {
  if (points < 3) throw PreconditionError("frequency_scan: need at least 3 points");
  FrequencyScan s;
  double best = INFINITY;
  for (int i = 0; i < points; ++i) {
    const double f = nominal * (1.0 - rel_span + 2.0 * rel_span * i / (points - 1));
    double r = INFINITY;
    try {
      r = fit_oscillation(trace, f).residual_rms;
    } catch (const std::exception&) {
    }
    s.frequencies.push_back(f);
    s.residuals.push_back(r);
    if (r < best) {
      best = r;
      s.best_frequency = f;
    }
  }
  return s;
}

struct GroupFits {
  int q = 0;
  std::optional<SidebandFit> lower, center, higher;

  const std::optional<SidebandFit>& get(Band b) const {
    return b == Band::lower ? lower : b == Band::center ? center : higher;
  }
  std::optional<SidebandFit>& get(Band b) { return b == Band::lower ? lower : b == Band::center ? center : higher; }
};

struct BandPhaseRow {
  int q = 0;
  Band band = Band::center;
  double energy = 0.0;
  double raw_phase = 0.0;        ///< as fitted, in (-pi, pi]
  double phase = 0.0;            ///< pi offset removed, unwrapped across groups
  double phase_error = 0.0;
  double delay = 0.0;            ///< phase / (4 omega), a.u.
  double delta_vs_center = 0.0;  ///< wrapped, rad
};

struct GroupSummary {
  int q = 0;
  double center_energy = 0.0;
  double delta_lower = 0.0;   ///< phi_l - phi_c
  double delta_higher = 0.0;  ///< phi_h - phi_c
  double delta_hl = 0.0;      ///< phi_h - phi_l
  double delta_hl_delay = 0.0;
};

struct BandPhaseReport {
  double omega = 0.0;
  std::vector<BandPhaseRow> rows;
  std::vector<GroupSummary> groups;
};

inline double pi_offset(Band b) {
  return b == Band::lower ? std::numbers::pi : b == Band::higher ? -std::numbers::pi : 0.0;
}

/// Removes the +pi / -pi offsets of S_l / S_h, unwraps each band across
/// groups (ordered by q) to minimize jumps and converts phases to delays.
inline BandPhaseReport band_phase_report(std::vector<GroupFits> groups, double omega) {
  for (const auto& g : groups)
    for (Band b : {Band::lower, Band::center, Band::higher})
      if (!g.get(b))
        throw PreconditionError("band_phase_report: group q=" + std::to_string(g.q) + " is missing band " +
                                units::band_name(b));
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.q < b.q; });

  BandPhaseReport rep;
  rep.omega = omega;
  std::map<Band, std::optional<double>> previous;
  for (const auto& g : groups) {
    std::map<Band, double> corrected;
    for (Band b : {Band::center, Band::lower, Band::higher}) {
      const auto& f = *g.get(b);
      double ph = units::wrap_phase(f.phase - pi_offset(b));
      auto& prev = previous[b];
      if (prev) ph = *prev + units::wrap_phase(ph - *prev);
      prev = ph;
      corrected[b] = ph;
    }
    for (Band b : {Band::lower, Band::center, Band::higher}) {
      const auto& f = *g.get(b);
      BandPhaseRow row;
      row.q = g.q;
      row.band = b;
      row.energy = f.center_energy;
      row.raw_phase = f.phase;
      row.phase = corrected[b];
      row.phase_error = f.phase_error;
      row.delay = units::phase_to_delay(row.phase, omega);
      row.delta_vs_center = units::wrap_phase(corrected[b] - corrected[Band::center]);
      rep.rows.push_back(row);
    }
    GroupSummary s;
    s.q = g.q;
    s.center_energy = g.center->center_energy;
    s.delta_lower = units::wrap_phase(corrected[Band::lower] - corrected[Band::center]);
    s.delta_higher = units::wrap_phase(corrected[Band::higher] - corrected[Band::center]);
    s.delta_hl = units::wrap_phase(corrected[Band::higher] - corrected[Band::lower]);
    s.delta_hl_delay = units::phase_to_delay(s.delta_hl, omega);
    rep.groups.push_back(s);
  }
  return rep;
}

/// Phases of the center sidebands only (single-sideband schemes): no pi
/// offsets, unwrapped across groups, no group summaries.
inline BandPhaseReport center_band_report(std::vector<GroupFits> groups, double omega) {
  for (const auto& g : groups)
    if (!g.center) throw PreconditionError("center_band_report: group q=" + std::to_string(g.q) + " has no center band");
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.q < b.q; });
  BandPhaseReport rep;
  rep.omega = omega;
  std::optional<double> prev;
  for (const auto& g : groups) {
    BandPhaseRow row;
    row.q = g.q;
    row.energy = g.center->center_energy;
    row.raw_phase = g.center->phase;
    row.phase = prev ? *prev + units::wrap_phase(row.raw_phase - *prev) : row.raw_phase;
    prev = row.phase;
    row.phase_error = g.center->phase_error;
    row.delay = units::phase_to_delay(row.phase, omega);
    rep.rows.push_back(row);
  }
  return rep;
}

/// Integrates and fits the requested bands of every listed sideband group of
/// a scan. Bands whose window cannot be extracted are listed in `failures`.
struct ScanFitResult {
  std::vector<GroupFits> groups;
  std::vector<std::string> failures;
};

inline ScanFitResult fit_scan(const synth::DelayScan& scan, const std::vector<int>& group_orders, double omega,
                              double ip, double window = default_window,
                              const std::vector<Band>& bands = {Band::lower, Band::center, Band::higher}) {
  ScanFitResult out;
  for (int q : group_orders) {
    GroupFits g;
    g.q = q;
    try {
      const units::SidebandLadder ladder(q, omega, ip);
      for (Band b : bands) {
        try {
          auto f = fit_oscillation(integrate_window(scan, ladder.band(b), window), 4.0 * omega);
          f.band = units::band_name(b);
          f.center_energy = ladder.band(b);
          g.get(b) = f;
        } catch (const std::exception& e) {
          out.failures.push_back("group q=" + std::to_string(q) + " band " + units::band_name(b) + ": " + e.what());
        }
      }
    } catch (const std::exception& e) {
      out.failures.push_back("group q=" + std::to_string(q) + ": " + e.what());
    }
    out.groups.push_back(std::move(g));
  }
  return out;
}

}  // namespace rabbitt::fit
