#pragma once

// Uniform radial grid r_i = (i + 1) dr with u(0) = 0, and the Numerov
// discretization of the field-free radial Hamiltonian
//
//   H_l = M^{-1} K + V_l,   K = -D / (2 dr^2),   M = 1 + D / 12,
//
// with D = tridiag(1, -2, 1). M and K are polynomials in the same D, so they
// commute and H_l is symmetric: Crank-Nicolson with it is exactly unitary.
// For l = 0 the first diagonal element of D carries a boundary correction
// that fixes the short-range behaviour of s waves at the Coulomb singularity.

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "rabbitt/errors.hpp"
#include "rabbitt/tdse/lapack.hpp"

namespace rabbitt::tdse {

struct RadialGrid {
  double dr = 0.2;
  double r_max = 1200.0;
  double absorber_fraction = 0.2;  ///< outer fraction of the box covered by the mask
  double absorber_exponent = 0.125;

  std::size_t size() const { return static_cast<std::size_t>(std::lround(r_max / dr)); }
  double r(std::size_t i) const { return dr * static_cast<double>(i + 1); }
  double absorber_start() const { return r_max * (1.0 - absorber_fraction); }

  void validate() const {
    if (!(dr > 0.0)) throw ConfigError("RadialGrid: dr must be positive");
    if (!(r_max > 0.0)) throw ConfigError("RadialGrid: r_max must be positive");
    if (!(absorber_fraction > 0.0 && absorber_fraction < 1.0))
      throw ConfigError("RadialGrid: absorber fraction must lie in (0, 1)");
    if (!(absorber_exponent > 0.0)) throw ConfigError("RadialGrid: absorber exponent must be positive");
    if (size() < 16) throw ConfigError("RadialGrid: fewer than 16 grid points");
    if (!(absorber_start() > dr)) throw ConfigError("RadialGrid: absorber must lie strictly inside the box");
  }

  /// Per-step multiplicative mask: cos^p(pi/2 (r - r_a) / (r_max - r_a)) beyond r_a.
  std::vector<double> mask() const {
    std::vector<double> m(size(), 1.0);
    const double ra = absorber_start(), width = r_max - ra;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double x = r(i) - ra;
      if (x > 0.0) m[i] = std::pow(std::cos(0.5 * std::numbers::pi * std::min(x / width, 1.0)), absorber_exponent);
    }
    return m;
  }
};

/// Tridiagonal operators of one partial wave. Off-diagonals of K and M are
/// constant; only the first diagonal element differs for l = 0.
struct RadialBlock {
  int l = 0;
  double k_off = 0.0;
  double m_off = 0.0;
  std::vector<double> k_diag;
  std::vector<double> m_diag;
  std::vector<double> v;  ///< -Z/r + l(l+1)/(2 r^2)

  std::size_t size() const { return v.size(); }

  /// Symmetric pentadiagonal pencil (K M + M V M, M^2) equivalent to H_l.
  std::pair<lapack::SymBand, lapack::SymBand> pencil() const {
    const int n = static_cast<int>(size());
    lapack::SymBand a(n, 2), b(n, 2);
    auto md = [&](int i) { return m_diag[i]; };
    auto kd = [&](int i) { return k_diag[i]; };
    auto m_el = [&](int i, int j) { return i == j ? md(i) : (std::abs(i - j) == 1 ? m_off : 0.0); };
    auto k_el = [&](int i, int j) { return i == j ? kd(i) : (std::abs(i - j) == 1 ? k_off : 0.0); };
    for (int j = 0; j < n; ++j) {
      for (int i = std::max(0, j - 2); i <= j; ++i) {
        double km = 0.0, mvm = 0.0, mm = 0.0;
        for (int k = std::max(0, j - 1); k <= std::min(n - 1, i + 1); ++k) {
          if (std::abs(i - k) > 1) continue;
          km += k_el(i, k) * m_el(k, j);
          mvm += m_el(i, k) * v[k] * m_el(k, j);
          mm += m_el(i, k) * m_el(k, j);
        }
        a(i, j) = km + mvm;
        b(i, j) = mm;
      }
    }
    return {std::move(a), std::move(b)};
  }

  /// Eigenvector of H_l for an eigenvalue `e` by inverse iteration on the
  /// tridiagonal K + M (V - e); normalized to dr * sum u^2 = 1.
  std::vector<double> eigenvector(double e, double dr) const {
    const std::size_t n = size();
    std::vector<double> u(n, 1.0);
    const double shift = e + 1e-13 * std::max(1.0, std::abs(e));
    for (int iter = 0; iter < 3; ++iter) {
      std::vector<double> sub(n - 1), diag(n), sup(n - 1);
      for (std::size_t i = 0; i < n; ++i) {
        diag[i] = k_diag[i] + m_diag[i] * (v[i] - shift);
        if (i + 1 < n) {
          sup[i] = k_off + m_off * (v[i + 1] - shift);
          sub[i] = k_off + m_off * (v[i] - shift);
        }
      }
      if (!lapack::tridiagonal_solve(std::move(sub), std::move(diag), std::move(sup), u))
        throw NumericalError("inverse iteration hit an exactly singular shift");
      double s = 0.0;
      for (double x : u) s += x * x;
      const double inv = 1.0 / std::sqrt(s * dr);
      for (double& x : u) x *= inv;
    }
    // fix the sign: positive slope at the origin
    if (u[0] < 0.0)
      for (double& x : u) x = -x;
    return u;
  }
};

namespace detail {

inline RadialBlock make_block(std::size_t n, double dr, int l, double charge, double corner) {
  RadialBlock b;
  b.l = l;
  b.k_off = -0.5 / (dr * dr);
  b.m_off = 1.0 / 12.0;
  b.k_diag.assign(n, 1.0 / (dr * dr));
  b.m_diag.assign(n, 1.0 - 2.0 / 12.0);
  if (l == 0) {
    const double d00 = -2.0 + corner;
    b.k_diag[0] = -d00 / (2.0 * dr * dr);
    b.m_diag[0] = 1.0 + d00 / 12.0;
  }
  b.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = dr * static_cast<double>(i + 1);
    b.v[i] = -charge / r + 0.5 * l * (l + 1) / (r * r);
  }
  return b;
}

inline double lowest_s_level(double dr, double charge, double corner) {
  const double box = 40.0 / charge;
  const auto n = static_cast<std::size_t>(std::lround(box / dr));
  auto [a, b] = make_block(n, dr, 0, charge, corner).pencil();
  return lapack::banded_eigenvalues_index(std::move(a), std::move(b), 1, 1).at(0);
}

}  // namespace detail

/// Boundary correction of D_00 for s waves, chosen so that the discrete
/// ground-state energy equals -Z^2/2. Cached per (dr, Z).
inline double s_wave_boundary_correction(double dr, double charge) {
  static std::mutex mutex;
  static std::map<std::pair<double, double>, double> cache;
  std::lock_guard<std::mutex> lock(mutex);
  if (auto it = cache.find({dr, charge}); it != cache.end()) return it->second;

  const double target = -0.5 * charge * charge;
  // closed-form starting guess, then secant
  double a0 = 2.0 * dr * charge / (12.0 - 10.0 * dr * charge);
  double a1 = 0.98 * a0;
  double f0 = detail::lowest_s_level(dr, charge, a0) - target;
  double f1 = detail::lowest_s_level(dr, charge, a1) - target;
  for (int iter = 0; iter < 40 && std::abs(f1) > 1e-13; ++iter) {
    if (f1 == f0) break;
    const double a2 = a1 - f1 * (a1 - a0) / (f1 - f0);
    a0 = a1;
    f0 = f1;
    a1 = a2;
    f1 = detail::lowest_s_level(dr, charge, a1) - target;
  }
  if (!(std::abs(f1) < 1e-10)) throw NumericalError("s-wave boundary correction did not converge");
  cache[{dr, charge}] = a1;
  return a1;
}

/// Field-free radial operators for l = 0..l_max.
struct RadialOperators {
  RadialGrid grid;
  double charge = 1.0;
  double s_wave_corner = 0.0;
  std::vector<RadialBlock> blocks;

  RadialOperators(const RadialGrid& g, int l_max, double z = 1.0) : grid(g), charge(z) {
    g.validate();
    if (l_max < 0) throw ConfigError("RadialOperators: l_max must be >= 0");
    if (!(z > 0.0)) throw ConfigError("RadialOperators: nuclear charge must be positive");
    s_wave_corner = s_wave_boundary_correction(g.dr, z);
    for (int l = 0; l <= l_max; ++l) blocks.push_back(detail::make_block(g.size(), g.dr, l, z, s_wave_corner));
  }

  int l_max() const { return static_cast<int>(blocks.size()) - 1; }
  std::size_t size() const { return grid.size(); }
};

}  // namespace rabbitt::tdse
