#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "rabbitt/tdse.hpp"

namespace td = rabbitt::tdse;
namespace u = rabbitt::units;

namespace {
constexpr double kPi = std::numbers::pi;

td::RadialGrid small_grid(double dr = 0.2, double r_max = 80.0) { return {dr, r_max, 0.2, 0.125}; }

td::TdseConfig tiny_config() {
  td::TdseConfig c;
  c.grid = small_grid(0.2, 120.0);
  c.l_max = 4;
  c.dt = 0.05;
  c.pulses.harmonic_orders = {9, 11};
  c.pulses.xuv_fwhm_fs = 1.0;
  c.pulses.probe_fwhm_fs = 1.0;
  c.basis_e_max = 1.5;
  c.delays_per_scan = 4;
  return c;
}

struct Silence {
  Silence() { rabbitt::set_warning_handler({}); }
  ~Silence() { rabbitt::set_warning_handler([](const std::string& m) { std::cerr << "warning: " << m << '\n'; }); }
};
}  // namespace

TEST(GroundState, EnergyNormAndRadius) {
  for (double dr : {0.1, 0.2, 0.25}) {
    const td::RadialOperators ops(small_grid(dr, 60.0), 1);
    const auto gs = td::ground_state(ops);
    EXPECT_NEAR(gs.energy, -0.5, 1e-4) << dr;
    EXPECT_NEAR(gs.state.norm(dr), 1.0, 1e-12);
    EXPECT_NEAR(td::expectation_r(td::lowest_state(ops, 0).u, ops.grid), 1.5, 1e-3) << dr;
  }
}

TEST(GroundState, ExcitedLevelsAreIndependentChecks) {
  // the s-wave boundary is fixed by the 1s level only; 2s and 2p test it
  const td::RadialOperators ops(small_grid(0.2, 80.0), 1);
  const auto s = td::partial_wave_basis(ops, 0, -1.0, -0.1);
  const auto p = td::partial_wave_basis(ops, 1, -1.0, -0.1);
  ASSERT_GE(s.energies.size(), 2u);
  ASSERT_GE(p.energies.size(), 1u);
  EXPECT_NEAR(s.energies[1], -0.125, 1e-4);
  EXPECT_NEAR(p.energies[0], -0.125, 1e-4);
}

TEST(GroundState, Preconditions) {
  EXPECT_THROW(td::ground_state(td::RadialOperators(small_grid(0.2, 40.0), 1)), rabbitt::PreconditionError);
  EXPECT_THROW(td::ground_state(td::RadialOperators(small_grid(0.3, 60.0), 1)), rabbitt::PreconditionError);
  td::RadialGrid bad = small_grid();
  bad.absorber_fraction = 1.0;
  EXPECT_THROW(bad.validate(), rabbitt::ConfigError);
}

TEST(EigenBasis, Orthonormal) {
  const td::RadialOperators ops(small_grid(0.2, 80.0), 2);
  const auto b = td::partial_wave_basis(ops, 2, -1.0, 1.0);
  ASSERT_GT(b.vectors.size(), 20u);
  for (std::size_t i : {0u, 5u, 17u})
    for (std::size_t j : {0u, 5u, 6u, 17u}) {
      double s = 0.0;
      for (std::size_t k = 0; k < b.vectors[i].size(); ++k) s += b.vectors[i][k] * b.vectors[j][k];
      EXPECT_NEAR(s * ops.grid.dr, i == j ? 1.0 : 0.0, 1e-9) << i << "," << j;
    }
}

TEST(Field, ZeroIntensityIsZero) {
  td::PulseTrainSpec s;
  s.harmonic_intensity = 0.0;
  s.probe_intensity = 0.0;
  const td::PulseTrain p(s);
  for (double t = -500.0; t <= 500.0; t += 3.7) EXPECT_EQ(p(t), 0.0);
}

TEST(Field, PeakAmplitudeFromIntensity) {
  td::PulseTrainSpec s;
  s.harmonic_orders = {11};
  s.harmonic_intensity = 1e12;
  s.probe_intensity = 0.0;
  const td::PulseTrain p(s);
  // frozen: I_au = 3.5094455205897691e16 W/cm^2
  EXPECT_NEAR(p(0.0), std::sqrt(1e12 / 3.5094455205897691e16), 1e-15);
  double peak = 0.0;
  for (double t = -400.0; t <= 400.0; t += 0.01) peak = std::max(peak, std::abs(p(t)));
  EXPECT_NEAR(peak, p(0.0), 1e-15);
}

TEST(Field, EnergyMatchesAnalyticGaussianIntegrals) {
  td::PulseTrainSpec s;
  s.harmonic_orders = {9, 11, 13};
  s.harmonic_phases = {0.0, 0.3, -0.2};
  const td::PulseTrain p(s);
  const double w = s.omega();
  // sum over pairs of components of int g_a g_b cos(a t - pa) cos(b t - pb)
  struct Comp {
    double amp, fwhm, freq, phase;
  };
  std::vector<Comp> comps;
  for (std::size_t i = 0; i < 3; ++i)
    comps.push_back({u::field_from_intensity(1e9), s.xuv_fwhm(), s.harmonic_orders[i] * 2.0 * w, s.harmonic_phases[i]});
  comps.push_back({u::field_from_intensity(1e11), s.probe_fwhm(), w, 0.0});
  double analytic = 0.0;
  for (const auto& a : comps)
    for (const auto& b : comps) {
      const double alpha = 2.0 * std::numbers::ln2 * (1.0 / (a.fwhm * a.fwhm) + 1.0 / (b.fwhm * b.fwhm));
      auto gauss_cos = [&](double c, double phi) {
        return std::sqrt(kPi / alpha) * std::exp(-c * c / (4.0 * alpha)) * std::cos(phi);
      };
      analytic += a.amp * b.amp * 0.5 *
                  (gauss_cos(a.freq - b.freq, a.phase - b.phase) + gauss_cos(a.freq + b.freq, a.phase + b.phase));
    }
  const auto grid = td::TimeGrid::covering(p, 0.02, 4.0);
  EXPECT_NEAR(td::field_energy(td::build_field(p, grid), grid.dt), analytic, 1e-9 * analytic);
}

TEST(Field, ShortGridRejected) {
  const td::PulseTrain p(td::PulseTrainSpec{});
  EXPECT_THROW(td::build_field(p, td::TimeGrid::covering(p, 0.05, 1.0)), rabbitt::PreconditionError);
  EXPECT_NO_THROW(td::build_field(p, td::TimeGrid::covering(p, 0.05, 2.0)));
}

TEST(Propagator, UnitaryWithoutAbsorber) {
  const td::RadialOperators ops(small_grid(0.2, 80.0), 4);
  auto gs = td::ground_state(ops);
  td::Propagator prop(ops, 0.05, false);
  const double n0 = gs.state.norm(0.2);
  for (int k = 0; k < 1000; ++k) prop.step(gs.state, 0.02 * std::sin(0.3 * k));
  EXPECT_NEAR(gs.state.norm(0.2), n0, 1e-10);
  for (int k = 0; k < 1000; ++k) prop.step(gs.state, 0.0);
  EXPECT_NEAR(gs.state.norm(0.2), n0, 1e-10);
}

TEST(Propagator, FieldFreeStationarity) {
  const td::RadialOperators ops(small_grid(0.2, 80.0), 2);
  const auto gs = td::ground_state(ops);
  auto s = gs.state;
  td::Propagator prop(ops, 0.05);
  for (int k = 0; k < 1000; ++k) prop.step(s, 0.0);
  std::complex<double> overlap = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) overlap += std::conj(gs.state.wave(0)[i]) * s.wave(0)[i];
  overlap *= ops.grid.dr;
  EXPECT_GT(std::norm(overlap), 1.0 - 1e-8);
  // Crank-Nicolson phase: exp(-2i atan(E dt / 2)) per step
  const double expected = -2.0 * 1000.0 * std::atan(0.5 * gs.energy * 0.05);
  EXPECT_NEAR(rabbitt::units::wrap_phase(std::arg(overlap) - expected), 0.0, 1e-8);
}

TEST(Propagator, OnePhotonSelectionRule) {
  td::TdseConfig c = tiny_config();
  c.pulses.harmonic_orders = {9};
  c.pulses.probe_intensity = 0.0;
  const td::TdseSolver solver(c);
  const auto [spec, log] = solver.run(0.0);
  double p_wave = 0.0, other = 0.0;
  for (const auto& p : spec.projections)
    for (std::size_t j = 0; j < p.energies.size(); ++j)
      if (p.energies[j] > 0.0) (p.l == 1 ? p_wave : other) += p.populations[j];
  EXPECT_GT(p_wave, 1e-8);
  EXPECT_LT(other / p_wave, 1e-6);
}

TEST(Propagator, DipoleParityFollowsPhotonNumber) {
  // two-colour run: odd l only from odd photon numbers; starting from l = 0
  // the l = 2 channel needs two photons and is far below l = 1
  td::TdseConfig c = tiny_config();
  const td::TdseSolver solver(c);
  const auto [spec, log] = solver.run(0.0);
  std::vector<double> cont(c.l_max + 1, 0.0);
  for (const auto& p : spec.projections)
    for (std::size_t j = 0; j < p.energies.size(); ++j)
      if (p.energies[j] > 0.0) cont[p.l] += p.populations[j];
  EXPECT_GT(cont[1], 10.0 * cont[2]);
  EXPECT_GT(cont[2], 10.0 * cont[3]);
}

TEST(Spectrum, BoundStateHasNoContinuum) {
  const td::RadialOperators ops(small_grid(0.2, 80.0), 2);
  const auto gs = td::ground_state(ops);
  const td::EigenBasis basis(ops, 1.0);
  std::vector<double> axis;
  for (double e = 0.01; e < 1.0; e += 0.01) axis.push_back(e);
  const auto r = td::photoelectron_spectrum(gs.state, basis, ops.grid.dr, axis);
  for (double d : r.density) EXPECT_LT(d, 1e-10);
  EXPECT_NEAR(r.bound_population, 1.0, 1e-10);
}

TEST(Spectrum, ClosureAfterIonization) {
  Silence quiet;
  const td::TdseSolver solver(tiny_config());
  const auto [spec, log] = solver.run(0.0);
  EXPECT_GT(log.continuum_population, 1e-8);
  EXPECT_LT(log.closure_error, 1e-3);
  EXPECT_LE(log.final_norm, log.initial_norm + 1e-12);
  EXPECT_NEAR(log.bound_population + log.continuum_population, log.final_norm, 1e-3);
}

TEST(Scan, IndependentOfThreadCount) {
  Silence quiet;
  td::TdseConfig c = tiny_config();
  c.grid.r_max = 60.0;
  c.l_max = 2;
  const td::TdseSolver solver(c);
  const auto delays = c.delays();
  const auto a = td::run_rabbitt_scan(solver, delays, 1);
  const auto b = td::run_rabbitt_scan(solver, delays, 3);
  EXPECT_EQ(a.scan.signal, b.scan.signal);
  ASSERT_EQ(a.runs.size(), delays.size());
  EXPECT_THROW(td::run_rabbitt_scan(solver, {}, 1), rabbitt::PreconditionError);
}

TEST(Scan, DelayGridCenteredOnZeroOverlap) {
  td::TdseConfig c = td::desk_config();
  const auto d = c.delays();
  ASSERT_EQ(d.size(), 16u);
  EXPECT_NEAR(d.front(), -d.back(), 1e-12);
  const double period = 2.0 * kPi / (4.0 * c.pulses.omega());
  EXPECT_NEAR((d[1] - d[0]) * d.size(), 2.0 * period, 1e-9);
  c.center_delays = false;
  EXPECT_EQ(c.delays().front(), 0.0);
}
