#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "rabbitt/fit.hpp"
#include "rabbitt/synth.hpp"

namespace sy = rabbitt::synth;
namespace ph = rabbitt::phases;
namespace u = rabbitt::units;
using u::Band;

namespace {
constexpr double kPi = std::numbers::pi;

sy::FieldConfig comb(std::vector<int> orders, int n_delay = 32, double periods = 2.0) {
  sy::FieldConfig cfg;
  for (int o : orders) cfg.harmonics.push_back({o, 0.0, 1e9});
  cfg.delays = sy::delay_grid(cfg.omega(), n_delay, periods);
  return cfg;
}

std::size_t nearest_bin(const sy::DelayScan& s, double e) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.n_energy(); ++i)
    if (std::abs(s.energies[i] - e) < std::abs(s.energies[best] - e)) best = i;
  return best;
}

/// Amplitude of the DFT of a trace at integer frequency index m.
double dft_amplitude(const std::vector<double>& v, int m) {
  std::complex<double> acc = 0.0;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * std::polar(1.0, -2.0 * kPi * m * i / n);
  return std::abs(acc) / n;
}

double band_phase(const sy::DelayScan& scan, double energy, double omega) {
  return rabbitt::fit::fit_oscillation(rabbitt::fit::integrate_window(scan, energy), 4.0 * omega).phase;
}
}  // namespace

TEST(Synth, PeakInventory) {
  const auto cfg = comb({9, 11, 13});
  const auto peaks = sy::peak_models(cfg, {});
  int harmonics = 0, sidebands = 0;
  for (const auto& p : peaks) (p.sideband ? sidebands : harmonics)++;
  EXPECT_EQ(harmonics, 3);
  EXPECT_EQ(sidebands, 6);
  for (const auto& p : peaks)
    if (p.sideband) EXPECT_EQ(p.paths.size(), 2u) << p.name;

  sy::SynthOptions opt;
  opt.include_higher_order_paths = true;
  for (const auto& p : sy::peak_models(cfg, opt)) {
    if (!p.sideband) continue;
    EXPECT_EQ(p.paths.size(), p.band == Band::center ? 2u : 5u) << p.name;
  }
}

TEST(Synth, SidebandsOscillateAtFourOmega) {
  const auto cfg = comb({9, 11}, 32, 2.0);
  const auto scan = sy::synthesize_scan(cfg, {});
  const u::SidebandLadder ladder(10, cfg.omega(), 0.5);
  for (Band b : {Band::lower, Band::center, Band::higher}) {
    const auto tr = rabbitt::fit::integrate_window(scan, ladder.band(b));
    // two 4 omega periods in the window: the 4 omega line sits at index 2
    const double main = dft_amplitude(tr.values, 2);
    EXPECT_GT(main, 1e-3 * dft_amplitude(tr.values, 0)) << u::band_name(b);
    for (int m : {1, 3, 4, 5, 6}) EXPECT_LT(dft_amplitude(tr.values, m), 1e-9 * main) << m;
  }
}

TEST(Synth, HarmonicsDoNotOscillate) {
  const auto cfg = comb({9, 11}, 32, 2.0);
  const auto scan = sy::synthesize_scan(cfg, {});
  const std::size_t ih = nearest_bin(scan, 9 * 2.0 * cfg.omega() - 0.5);
  const double first = scan.at(0, ih);
  for (std::size_t it = 0; it < scan.n_delay(); ++it) EXPECT_NEAR(scan.at(it, ih), first, 1e-12 * first);
}

TEST(Synth, CenterOutOfPhaseWithOuterBands) {
  const auto cfg = comb({9, 11}, 32, 2.0);
  const auto scan = sy::synthesize_scan(cfg, {});
  const u::SidebandLadder ladder(10, cfg.omega(), 0.5);
  const double pc = band_phase(scan, ladder.center(), cfg.omega());
  const double pl = band_phase(scan, ladder.lower(), cfg.omega());
  const double ph_ = band_phase(scan, ladder.higher(), cfg.omega());
  EXPECT_NEAR(std::abs(u::wrap_phase(pl - pc)), kPi, 0.3);
  EXPECT_NEAR(std::abs(u::wrap_phase(ph_ - pc)), kPi, 0.3);
}

TEST(Synth, FittedPhaseEqualsXuvPlusAtomic) {
  auto cfg = comb({9, 11}, 24, 2.0);
  cfg.harmonics[0].phase = 0.4;
  cfg.harmonics[1].phase = -0.7;
  const double dxuv = -0.7 - 0.4;
  const auto scan = sy::synthesize_scan(cfg, {});
  const u::SidebandLadder ladder(10, cfg.omega(), 0.5);
  for (Band b : {Band::lower, Band::center, Band::higher}) {
    const double expected = u::wrap_phase(dxuv + ph::atomic_phase_3sb(b, ladder, 1.0, 1).phase);
    EXPECT_NEAR(u::wrap_phase(band_phase(scan, ladder.band(b), cfg.omega()) - expected), 0.0, 1e-9)
        << u::band_name(b);
  }
}

TEST(Synth, OneSidebandModel) {
  auto cfg = comb({9, 11}, 24, 2.0);
  cfg.harmonics[1].phase = 0.25;
  sy::SynthOptions opt;
  opt.model = sy::SidebandModel::one_sideband;
  const auto scan = sy::synthesize_scan(cfg, opt);
  const u::SidebandLadder ladder(10, cfg.omega(), 0.5);
  const double expected = u::wrap_phase(0.25 + ph::atomic_phase_1sb(10, cfg.omega(), 0.5, 1.0, 1).phase);
  EXPECT_NEAR(u::wrap_phase(band_phase(scan, ladder.center(), cfg.omega()) - expected), 0.0, 1e-9);
}

TEST(Synth, ZeroProbeGivesStaticSpectrum) {
  auto cfg = comb({9, 11, 13}, 16, 1.0);
  cfg.probe_intensity = 0.0;
  const auto scan = sy::synthesize_scan(cfg, {});
  for (std::size_t ie = 0; ie < scan.n_energy(); ++ie)
    for (std::size_t it = 1; it < scan.n_delay(); ++it) ASSERT_EQ(scan.at(it, ie), scan.at(0, ie));
  const u::SidebandLadder ladder(10, cfg.omega(), 0.5);
  EXPECT_LT(scan.at(0, nearest_bin(scan, ladder.center())), 1e-100 * *std::max_element(scan.signal.begin(), scan.signal.end()));
}

TEST(Synth, NoiseIsDeterministicPerSeed) {
  rabbitt::set_warning_handler({});
  const auto cfg = comb({9, 11}, 16, 1.0);
  const auto clean = sy::synthesize_scan(cfg, {});
  const auto a = sy::apply_decay_and_noise(clean, {}, 0.01, 42);
  const auto b = sy::apply_decay_and_noise(clean, {}, 0.01, 42);
  const auto c = sy::apply_decay_and_noise(clean, {}, 0.01, 43);
  EXPECT_EQ(a.signal, b.signal);
  EXPECT_NE(a.signal, c.signal);
  const auto same = sy::apply_decay_and_noise(clean, {}, 0.0, 7);
  EXPECT_EQ(same.signal, clean.signal);
  for (double v : a.signal) EXPECT_GE(v, 0.0);
  rabbitt::set_warning_handler([](const std::string& m) { std::cerr << "warning: " << m << '\n'; });
}

TEST(Synth, ClampingWarns) {
  int warnings = 0;
  rabbitt::set_warning_handler([&](const std::string&) { ++warnings; });
  const auto cfg = comb({9, 11}, 16, 1.0);
  (void)sy::apply_decay_and_noise(sy::synthesize_scan(cfg, {}), {}, 0.05, 1);
  EXPECT_EQ(warnings, 1);
  rabbitt::set_warning_handler([](const std::string& m) { std::cerr << "warning: " << m << '\n'; });
}

TEST(Synth, Validation) {
  auto cfg = comb({9, 11});
  cfg.harmonics[0].order = 10;
  EXPECT_THROW(sy::synthesize_scan(cfg, {}), rabbitt::PreconditionError);
  cfg = comb({9, 11});
  cfg.delays[3] += 1.0;
  EXPECT_THROW(sy::synthesize_scan(cfg, {}), rabbitt::PreconditionError);
  cfg = comb({9, 13});
  EXPECT_THROW(sy::synthesize_scan(cfg, {}), rabbitt::PreconditionError);
  cfg = comb({9, 11});
  sy::SynthOptions opt;
  opt.ip = 100.0;
  EXPECT_THROW(sy::synthesize_scan(cfg, opt), rabbitt::PreconditionError);
  EXPECT_THROW(sy::delay_grid(0.05, 1, 1.0), rabbitt::PreconditionError);
}
