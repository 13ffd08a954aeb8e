#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rabbitt/fit.hpp"
#include "rabbitt/synth.hpp"

namespace fit = rabbitt::fit;
namespace sy = rabbitt::synth;
namespace u = rabbitt::units;
using u::Band;

namespace {
constexpr double kPi = std::numbers::pi;
const double kOmega = u::photon_energy(800.0);
const double kFreq = 4.0 * kOmega;

fit::Trace make_trace(int n, double periods, double i0, double c1, double c2, double i1, double phi,
                      double start = 0.0) {
  fit::Trace t;
  const double step = periods * 2.0 * kPi / kFreq / n;
  for (int i = 0; i < n; ++i) {
    const double tau = start + step * i;
    t.delays.push_back(tau);
    t.values.push_back(i0 + c1 * tau + c2 * tau * tau + i1 * std::cos(kFreq * tau - phi));
  }
  return t;
}
}  // namespace

TEST(FitOscillation, PureCosine) {
  const auto f = fit::fit_oscillation(make_trace(16, 2.0, 0.0, 0.0, 0.0, 1.0, 0.0), kFreq);
  EXPECT_NEAR(f.i1, 1.0, 1e-12);
  EXPECT_NEAR(f.phase, 0.0, 1e-12);
  EXPECT_NEAR(f.i0, 0.0, 1e-12);
  EXPECT_LT(f.residual_rms, 1e-12);
}

TEST(FitOscillation, RecoversAllParameters) {
  for (double phi : {-3.0, -1.2, 0.0, 0.5, 2.9, kPi}) {
    const auto f = fit::fit_oscillation(make_trace(24, 2.0, 5.0, 1e-3, -2e-6, 0.8, phi, -30.0), kFreq);
    EXPECT_NEAR(u::wrap_phase(f.phase - phi), 0.0, 1e-9) << phi;
    EXPECT_NEAR(f.i1, 0.8, 1e-9);
    EXPECT_NEAR(f.i0, 5.0, 1e-8);
    EXPECT_NEAR(f.c1, 1e-3, 1e-10);
    EXPECT_NEAR(f.c2, -2e-6, 1e-12);
  }
}

TEST(FitOscillation, InvariantUnderAffineTransform) {
  const auto base = make_trace(20, 2.0, 1.0, 2e-3, 0.0, 0.3, 1.1);
  const auto f0 = fit::fit_oscillation(base, kFreq);
  auto t = base;
  for (auto& v : t.values) v = 1e6 * v + 17.0;
  const auto f1 = fit::fit_oscillation(t, kFreq);
  EXPECT_NEAR(f1.phase, f0.phase, 1e-10);
  EXPECT_NEAR(f1.i1, 1e6 * f0.i1, 1e-4);
}

TEST(FitOscillation, DelayShiftRotatesPhase) {
  const double shift = 3.7;
  const auto a = make_trace(20, 2.0, 1.0, 0.0, 0.0, 0.5, 0.4);
  auto b = a;
  for (auto& d : b.delays) d += shift;
  const auto fa = fit::fit_oscillation(a, kFreq), fb = fit::fit_oscillation(b, kFreq);
  EXPECT_NEAR(u::wrap_phase(fb.phase - fa.phase - kFreq * shift), 0.0, 1e-9);
}

TEST(FitOscillation, ReversedDelayAxisNegatesPhase) {
  const auto a = make_trace(20, 2.0, 1.0, 0.0, 0.0, 0.5, 0.4, -1.0);
  fit::Trace b;
  for (std::size_t i = a.delays.size(); i-- > 0;) {
    b.delays.push_back(-a.delays[i]);
    b.values.push_back(a.values[i]);
  }
  EXPECT_NEAR(fit::fit_oscillation(b, kFreq).phase, -0.4, 1e-9);
}

TEST(FitOscillation, Preconditions) {
  EXPECT_THROW(fit::fit_oscillation(make_trace(6, 2.0, 0, 0, 0, 1, 0), kFreq), rabbitt::PreconditionError);
  EXPECT_THROW(fit::fit_oscillation(make_trace(16, 0.5, 0, 0, 0, 1, 0), kFreq), rabbitt::PreconditionError);
  EXPECT_THROW(fit::fit_oscillation(make_trace(16, 2.0, 0, 0, 0, 1, 0), -1.0), rabbitt::PreconditionError);
  // sampling exactly once per oscillation period aliases cos onto the constant term
  EXPECT_THROW(fit::fit_oscillation(make_trace(16, 16.0, 1, 0, 0, 1, 0), kFreq), rabbitt::NumericalError);
}

TEST(FitOscillation, ErrorBarsScaleWithNoise) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto spread = [&](double sigma) {
    double sum2 = 0.0, reported = 0.0;
    const int trials = 200;
    for (int k = 0; k < trials; ++k) {
      auto t = make_trace(32, 2.0, 2.0, 0.0, 0.0, 1.0, 0.6);
      for (auto& v : t.values) v += sigma * normal(rng);
      const auto f = fit::fit_oscillation(t, kFreq);
      const double d = u::wrap_phase(f.phase - 0.6);
      sum2 += d * d;
      reported += f.phase_error;
    }
    return std::pair{std::sqrt(sum2 / trials), reported / trials};
  };
  const auto [s1, r1] = spread(0.02);
  const auto [s2, r2] = spread(0.08);
  EXPECT_NEAR(s2 / s1, 4.0, 1.0);
  EXPECT_NEAR(r1 / s1, 1.0, 0.25);
  EXPECT_NEAR(r2 / s2, 1.0, 0.25);
}

TEST(FrequencyScan, MinimumAtNominal) {
  const auto t = make_trace(32, 2.0, 1.0, 0.0, 0.0, 0.5, 0.9);
  const auto s = fit::frequency_scan(t, kFreq);
  EXPECT_NEAR(s.best_frequency, kFreq, 1e-9 * kFreq);
  EXPECT_EQ(s.frequencies.size(), 41u);
}

TEST(IntegrateWindow, SumsBinsInsideWindow) {
  sy::DelayScan s;
  s.energies = {1.0, 1.1, 1.2, 1.3, 1.4};
  s.delays = {0.0, 1.0};
  s.signal = {1, 2, 3, 4, 5, 10, 20, 30, 40, 50};
  const auto t = fit::integrate_window(s, 1.2, 0.25);
  EXPECT_DOUBLE_EQ(t.values[0], 2 + 3 + 4);
  EXPECT_DOUBLE_EQ(t.values[1], 20 + 30 + 40);
  EXPECT_THROW(fit::integrate_window(s, 1.35, 0.25), rabbitt::PreconditionError);
  EXPECT_THROW(fit::integrate_window(s, 1.2, 0.0), rabbitt::PreconditionError);
  EXPECT_THROW(fit::integrate_window(s, 1.25, 0.01), rabbitt::PreconditionError);
}

TEST(BandReport, RemovesPiOffsetsAndUnwraps) {
  auto make = [](int q, double l, double c, double h) {
    fit::GroupFits g;
    g.q = q;
    fit::SidebandFit f;
    f.phase = u::wrap_phase(l);
    g.lower = f;
    f.phase = u::wrap_phase(c);
    g.center = f;
    f.phase = u::wrap_phase(h);
    g.higher = f;
    return g;
  };
  // center phases that cross +-pi between groups
  const auto rep = fit::band_phase_report({make(12, 3.0 + kPi, 3.0, 3.1 - kPi), make(10, 2.8 + kPi, 2.8, 2.9 - kPi)},
                                          kOmega);
  ASSERT_EQ(rep.groups.size(), 2u);
  EXPECT_EQ(rep.groups[0].q, 10);
  EXPECT_NEAR(rep.groups[0].delta_lower, 0.0, 1e-12);
  EXPECT_NEAR(rep.groups[0].delta_higher, 0.1, 1e-12);
  EXPECT_NEAR(rep.groups[1].delta_hl, 0.1, 1e-12);
  EXPECT_NEAR(rep.groups[1].delta_hl_delay, 0.1 / (4.0 * kOmega), 1e-12);
  EXPECT_NEAR(rep.rows[4].phase, 3.0, 1e-12);  // q=12 center, continuous from 2.8

  fit::GroupFits partial = make(10, 0, 0, 0);
  partial.higher.reset();
  EXPECT_THROW(fit::band_phase_report({partial}, kOmega), rabbitt::PreconditionError);
}

TEST(EndToEnd, SynthThenFitRecoversPhases) {
  sy::FieldConfig cfg;
  for (int o : {9, 11, 13}) cfg.harmonics.push_back({o, 0.1 * o, 1e9});
  cfg.delays = sy::delay_grid(cfg.omega(), 32, 2.0);
  const auto scan = sy::synthesize_scan(cfg, {});
  const auto res = fit::fit_scan(scan, {10, 12}, cfg.omega(), 0.5);
  EXPECT_TRUE(res.failures.empty());
  const auto rep = fit::band_phase_report(res.groups, cfg.omega());
  for (const auto& g : rep.groups) {
    const u::SidebandLadder ladder(g.q, cfg.omega(), 0.5);
    const double c = rabbitt::phases::atomic_phase_3sb(Band::center, ladder, 1.0, 1).phase;
    const double h = rabbitt::phases::atomic_phase_3sb(Band::higher, ladder, 1.0, 1).phase;
    EXPECT_NEAR(u::wrap_phase(g.delta_higher - u::wrap_phase(h + kPi - c)), 0.0, 1e-8) << g.q;
  }
}

TEST(EndToEnd, MonteCarloPhaseScatter) {
  rabbitt::set_warning_handler({});
  sy::FieldConfig cfg;
  for (int o : {9, 11}) cfg.harmonics.push_back({o, 0.0, 1e9});
  cfg.delays = sy::delay_grid(cfg.omega(), 32, 2.0);
  const auto clean = sy::synthesize_scan(cfg, {});
  const u::SidebandLadder ladder(10, cfg.omega(), 0.5);
  const double truth = fit::fit_oscillation(fit::integrate_window(clean, ladder.center()), kFreq).phase;
  double sum2 = 0.0, reported = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    const auto noisy = sy::apply_decay_and_noise(clean, {}, 0.01, seed);
    const auto f = fit::fit_oscillation(fit::integrate_window(noisy, ladder.center()), kFreq);
    const double d = u::wrap_phase(f.phase - truth);
    sum2 += d * d;
    reported += f.phase_error;
  }
  const double rms = std::sqrt(sum2 / 100.0);
  EXPECT_LT(rms, 0.05);
  EXPECT_NEAR(reported / 100.0 / rms, 1.0, 0.35);
  rabbitt::set_warning_handler([](const std::string& m) { std::cerr << "warning: " << m << '\n'; });
}
