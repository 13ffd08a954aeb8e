#pragma once

// Delay scans: one propagation plus spectral analysis per delay, assembled
// into a DelayScan. Delays are independent and run on a thread pool; each
// worker owns its propagator and state, the operators and eigenbasis are
// shared read-only.

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "rabbitt/errors.hpp"
#include "rabbitt/synth.hpp"
#include "rabbitt/tdse/eigen.hpp"
#include "rabbitt/tdse/field.hpp"
#include "rabbitt/tdse/grid.hpp"
#include "rabbitt/tdse/propagator.hpp"
#include "rabbitt/tdse/spectrum.hpp"
#include "rabbitt/units.hpp"

namespace rabbitt::tdse {

inline constexpr double hydrogen_ip = 0.5;

struct TdseConfig {
  RadialGrid grid{};
  int l_max = 8;
  double dt = 0.05;
  PulseTrainSpec pulses{};
  double fwhm_margin = 2.0;        ///< propagate this many FWHMs beyond each pulse center
  double basis_e_max = 1.6;        ///< highest analyzed eigenstate energy, a.u.
  double energy_step_ev = 0.01;    ///< output axis spacing
  double energy_min_ev = 0.2;
  int delays_per_scan = 16;
  double delay_periods = 2.0;      ///< in units of the 4 omega period
  bool center_delays = true;       ///< place the delay grid symmetrically around tau = 0
  int threads = 1;

  void validate() const {
    grid.validate();
    pulses.validate();
    if (l_max < 1) throw ConfigError("tdse: l_max must be >= 1");
    if (l_max < 5) warn("tdse: l_max < 5 truncates the paths that reach l = 4");
    if (!(dt > 0.0)) throw ConfigError("tdse: dt must be positive");
    if (!(fwhm_margin >= 1.82)) throw ConfigError("tdse: fwhm_margin must be >= 1.82 (envelopes below 1%)");
    if (!(basis_e_max > 0.0)) throw ConfigError("tdse: basis_e_max must be positive");
    if (!(energy_step_ev > 0.0) || !(energy_min_ev > 0.0)) throw ConfigError("tdse: bad energy axis");
    if (delays_per_scan < 1) throw ConfigError("tdse: delays_per_scan must be >= 1");
    if (!(delay_periods > 0.0)) throw ConfigError("tdse: delay_periods must be positive");
    if (threads < 1) throw ConfigError("tdse: threads must be >= 1");
  }

  /// Output energy axis: from energy_min to the highest harmonic plus two
  /// probe quanta, capped by the analyzed basis.
  std::vector<double> energy_axis() const {
    const double w = pulses.omega();
    int top = 0;
    for (int q : pulses.harmonic_orders) top = std::max(top, q);
    const double hi = std::min(basis_e_max, top * 2.0 * w - hydrogen_ip + 2.0 * w);
    const double step = units::ev_to_au(energy_step_ev);
    std::vector<double> axis;
    for (double e = units::ev_to_au(energy_min_ev); e <= hi; e += step) axis.push_back(e);
    return axis;
  }

  std::vector<double> delays() const {
    const double w = pulses.omega();
    if (!center_delays || delays_per_scan < 2) return synth::delay_grid(w, delays_per_scan, delay_periods);
    const double step = delay_periods * 2.0 * std::numbers::pi / (4.0 * w) / delays_per_scan;
    return synth::delay_grid(w, delays_per_scan, delay_periods, -0.5 * (delays_per_scan - 1) * step);
  }
};

/// Desk-scale preset (minutes on one core).
inline TdseConfig desk_config() {
  TdseConfig c;
  c.grid = {0.2, 1200.0, 0.2, 0.125};
  c.l_max = 6;
  c.dt = 0.05;
  c.pulses.harmonic_orders = {5, 7, 9, 11, 13};
  c.pulses.xuv_fwhm_fs = 5.0;
  c.pulses.probe_fwhm_fs = 5.0;
  return c;
}

/// Full pulse parameters: eight harmonics 5..19, 20 fs envelopes. Long run.
inline TdseConfig paper_config() {
  TdseConfig c;
  c.grid = {0.2, 6000.0, 0.2, 0.125};
  c.l_max = 10;
  c.dt = 0.05;
  c.pulses.harmonic_orders = {5, 7, 9, 11, 13, 15, 17, 19};
  c.pulses.xuv_fwhm_fs = 20.0;
  c.pulses.probe_fwhm_fs = 20.0;
  c.basis_e_max = 2.2;
  return c;
}

/// Per-delay provenance.
struct RunLog {
  double delay = 0.0;
  std::size_t steps = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  double absorbed = 0.0;
  double bound_population = 0.0;
  double continuum_population = 0.0;
  double closure_error = 0.0;
  double top_l_population = 0.0;
};

struct ScanSetup {
  double ground_energy = 0.0;
  double s_wave_corner = 0.0;
  std::size_t grid_points = 0;
  std::vector<std::size_t> basis_sizes;
};

struct ScanResult {
  synth::DelayScan scan;
  ScanSetup setup;
  std::vector<RunLog> runs;
};

/// Precomputed pieces shared by every delay.
class TdseSolver {
 public:
  explicit TdseSolver(const TdseConfig& cfg)
      : cfg_(cfg), ops_((cfg.validate(), cfg.grid), cfg.l_max), basis_(ops_, cfg.basis_e_max),
        ground_(ground_state(ops_)), axis_(cfg.energy_axis()) {}

  const RadialOperators& operators() const { return ops_; }
  const EigenBasis& basis() const { return basis_; }
  const GroundState& ground() const { return ground_; }
  const std::vector<double>& axis() const { return axis_; }
  const TdseConfig& config() const { return cfg_; }

  ScanSetup setup() const {
    ScanSetup s;
    s.ground_energy = ground_.energy;
    s.s_wave_corner = ops_.s_wave_corner;
    s.grid_points = ops_.size();
    for (const auto& w : basis_.waves) s.basis_sizes.push_back(w.energies.size());
    return s;
  }

  /// One propagation from the ground state at the given delay.
  std::pair<SpectrumResult, RunLog> run(double delay) const {
    PulseTrainSpec spec = cfg_.pulses;
    spec.delay = delay;
    const PulseTrain pulse(spec);
    const TimeGrid tg = TimeGrid::covering(pulse, cfg_.dt, cfg_.fwhm_margin);
    PartialWaveState state = ground_.state;
    Propagator prop(ops_, cfg_.dt);
    const auto st = prop.run(state, pulse, tg);
    auto spec_result = photoelectron_spectrum(state, basis_, ops_.grid.dr, axis_);
    RunLog log;
    log.delay = delay;
    log.steps = st.steps;
    log.t_start = tg.start;
    log.t_end = tg.end();
    log.initial_norm = st.initial_norm;
    log.final_norm = st.final_norm;
    log.absorbed = st.initial_norm - st.final_norm;
    log.bound_population = spec_result.bound_population;
    log.continuum_population = spec_result.continuum_population;
    log.closure_error = spec_result.closure_error;
    log.top_l_population = st.max_top_l_population;
    return {std::move(spec_result), log};
  }

 private:
  TdseConfig cfg_;
  RadialOperators ops_;
  EigenBasis basis_;
  GroundState ground_;
  std::vector<double> axis_;
};

/// Runs every delay; results are independent of the thread count.
/// `progress` is called after each finished delay with (done, total).
inline ScanResult run_rabbitt_scan(const TdseSolver& solver, const std::vector<double>& delays, int threads = 1,
                                   const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  if (delays.empty()) throw PreconditionError("run_rabbitt_scan: no delays");
  for (std::size_t i = 1; i < delays.size(); ++i)
    if (!(delays[i] > delays[i - 1])) throw PreconditionError("run_rabbitt_scan: delays must increase");

  ScanResult res;
  res.setup = solver.setup();
  res.scan.energies = solver.axis();
  res.scan.delays = delays;
  res.scan.signal.assign(delays.size() * res.scan.energies.size(), 0.0);
  res.runs.resize(delays.size());

  std::atomic<std::size_t> next{0}, done{0};
  std::exception_ptr error;
  std::mutex mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= delays.size()) return;
      {
        std::lock_guard<std::mutex> lock(mutex);
        if (error) return;
      }
      try {
        auto [spectrum, log] = solver.run(delays[i]);
        for (std::size_t k = 0; k < spectrum.density.size(); ++k) res.scan.at(i, k) = spectrum.density[k];
        res.runs[i] = log;
        const std::size_t d = ++done;
        if (progress) {
          std::lock_guard<std::mutex> lock(mutex);
          progress(d, delays.size());
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(delays.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return res;
}

}  // namespace rabbitt::tdse
