#pragma once

// Length-gauge propagation of the partial-wave expansion (m = 0):
//
//   i d/dt u_l = H_l u_l + E(t) r (c_{l-1} u_{l-1} + c_l u_{l+1}),
//   c_l = (l + 1) / sqrt((2l + 1)(2l + 3)).
//
// One step is the symmetric splitting D_even D_odd CN D_odd D_even, where CN
// is a Crank-Nicolson step of the field-free blocks and D_* are exact 2x2
// rotations of the (l, l+1) pairs with even / odd l, all at the midpoint
// field. Every factor is unitary; the absorber mask is the only loss.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "rabbitt/errors.hpp"
#include "rabbitt/tdse/eigen.hpp"
#include "rabbitt/tdse/field.hpp"
#include "rabbitt/tdse/grid.hpp"

namespace rabbitt::tdse {

/// Radial functions u_l(r_i), l = 0..l_max, stored contiguously per l.
struct PartialWaveState {
  int l_max = 0;
  std::size_t n = 0;
  std::vector<Complex> data;

  PartialWaveState() = default;
  PartialWaveState(int lmax, std::size_t npts) : l_max(lmax), n(npts), data((lmax + 1) * npts) {}

  Complex* wave(int l) { return data.data() + static_cast<std::size_t>(l) * n; }
  const Complex* wave(int l) const { return data.data() + static_cast<std::size_t>(l) * n; }

  double population(int l, double dr) const {
    const Complex* u = wave(l);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::norm(u[i]);
    return s * dr;
  }

  double norm(double dr) const {
    double s = 0.0;
    for (int l = 0; l <= l_max; ++l) s += population(l, dr);
    return s;
  }
};

/// Initial state: the discrete 1s eigenstate in the l = 0 channel.
struct GroundState {
  double energy = 0.0;
  PartialWaveState state;
};

inline GroundState ground_state(const RadialOperators& ops) {
  const auto& g = ops.grid;
  if (g.r_max < 50.0) throw PreconditionError("ground_state: r_max must be >= 50 a.u.");
  if (g.dr > 0.25) throw PreconditionError("ground_state: dr must be <= 0.25 a.u.");
  const auto b = lowest_state(ops, 0);
  const double exact = -0.5 * ops.charge * ops.charge;
  if (std::abs(b.energy - exact) > 1e-3)
    throw NumericalError("ground_state: grid too coarse, energy " + std::to_string(b.energy));
  GroundState gs{b.energy, PartialWaveState(ops.l_max(), ops.size())};
  for (std::size_t i = 0; i < b.u.size(); ++i) gs.state.wave(0)[i] = b.u[i];
  return gs;
}

inline double dipole_coupling(int l) { return (l + 1.0) / std::sqrt((2.0 * l + 1.0) * (2.0 * l + 3.0)); }

namespace detail {

// Complex products written out; std::complex operator* goes through the
// NaN-safe library routine, which dominates the inner loops otherwise.
inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace detail

struct PropagationStats {
  std::size_t steps = 0;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  double max_top_l_population = 0.0;
};

class Propagator {
 public:
  Propagator(const RadialOperators& ops, double dt, bool absorber = true)
      : ops_(ops), dt_(dt), n_(ops.size()), lmax_(ops.l_max()) {
    if (!(dt > 0.0)) throw ConfigError("Propagator: dt must be positive");
    if (absorber) mask_ = ops.grid.mask();
    const double delta = 0.5 * dt;
    const Complex id(0.0, delta);
    cn_.resize(lmax_ + 1);
    for (int l = 0; l <= lmax_; ++l) {
      const auto& b = ops.blocks[l];
      auto& c = cn_[l];
      c.rhs_sub.resize(n_);
      c.rhs_diag.resize(n_);
      c.rhs_sup.resize(n_);
      c.lhs_sub.resize(n_);
      c.forward.resize(n_);
      c.inv_pivot.resize(n_);
      // A = K + M V: A_{i,i-1} = k_off + m_off V_{i-1}, A_{i,i+1} = k_off + m_off V_{i+1}
      std::vector<Complex> l_sub(n_), l_diag(n_), l_sup(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        const double a_d = b.k_diag[i] + b.m_diag[i] * b.v[i];
        const double a_sub = i > 0 ? b.k_off + b.m_off * b.v[i - 1] : 0.0;
        const double a_sup = i + 1 < n_ ? b.k_off + b.m_off * b.v[i + 1] : 0.0;
        const double m_sub = i > 0 ? b.m_off : 0.0, m_sup = i + 1 < n_ ? b.m_off : 0.0;
        c.rhs_diag[i] = b.m_diag[i] - id * a_d;
        c.rhs_sub[i] = m_sub - id * a_sub;
        c.rhs_sup[i] = m_sup - id * a_sup;
        l_diag[i] = b.m_diag[i] + id * a_d;
        l_sub[i] = m_sub + id * a_sub;
        l_sup[i] = m_sup + id * a_sup;
      }
      // Thomas factorization of the left-hand side
      Complex prev = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        const Complex pivot = l_diag[i] - (i > 0 ? l_sub[i] * prev : Complex(0.0));
        c.inv_pivot[i] = 1.0 / pivot;
        prev = l_sup[i] * c.inv_pivot[i];
        c.forward[i] = prev;
        c.lhs_sub[i] = l_sub[i];
      }
    }
    work_.resize(n_);
  }

  double dt() const { return dt_; }

  /// Advances the state by one step from time t with midpoint field e_mid.
  void step(PartialWaveState& s, double e_mid) {
    const bool field = e_mid != 0.0 && lmax_ > 0;
    if (field) {
      dipole(s, e_mid, 0.5 * dt_, 0);
      dipole(s, e_mid, 0.5 * dt_, 1);
    }
    for (int l = 0; l <= lmax_; ++l) crank_nicolson(s.wave(l), l);
    if (field) {
      dipole(s, e_mid, 0.5 * dt_, 1);
      dipole(s, e_mid, 0.5 * dt_, 0);
    }
    if (!mask_.empty())
      for (int l = 0; l <= lmax_; ++l) {
        Complex* u = s.wave(l);
        for (std::size_t i = 0; i < n_; ++i) u[i] *= mask_[i];
      }
  }

  /// Propagates over the time grid with the given field. Checks the norm
  /// every `check_every` steps: growth beyond 1e-8 per step is an
  /// instability; a populated top channel is reported through warn().
  template <class Field>
  PropagationStats run(PartialWaveState& s, const Field& field, const TimeGrid& grid,
                       std::size_t check_every = 200) {
    if (s.l_max != lmax_ || s.n != n_) throw PreconditionError("Propagator::run: state does not match operators");
    const double dr = ops_.grid.dr;
    PropagationStats st;
    st.initial_norm = s.norm(dr);
    double last_norm = st.initial_norm;
    std::size_t last_step = 0;
    for (std::size_t k = 0; k < grid.steps; ++k) {
      step(s, field(grid.at(k) + 0.5 * grid.dt));
      if ((k + 1) % check_every == 0 || k + 1 == grid.steps) {
        const double nrm = s.norm(dr);
        const double allowed = 1e-8 * static_cast<double>(k + 1 - last_step) * last_norm;
        if (nrm - last_norm > allowed || !std::isfinite(nrm))
          throw NumericalError("propagation unstable: norm grew from " + std::to_string(last_norm) + " to " +
                               std::to_string(nrm));
        last_norm = nrm;
        last_step = k + 1;
        if (lmax_ > 0) st.max_top_l_population = std::max(st.max_top_l_population, s.population(lmax_, dr));
      }
    }
    st.steps = grid.steps;
    st.final_norm = s.norm(dr);
    if (st.max_top_l_population > 1e-4)
      warn("l_max = " + std::to_string(lmax_) + " channel reached population " +
           std::to_string(st.max_top_l_population) + "; increase l_max");
    return st;
  }

 private:
  struct CnFactors {
    std::vector<Complex> rhs_sub, rhs_diag, rhs_sup;
    std::vector<Complex> lhs_sub, forward, inv_pivot;
  };

  void crank_nicolson(Complex* u, int l) {
    using detail::mul;
    const auto& c = cn_[l];
    Complex* y = work_.data();
    // y = (M - i delta A) u
    for (std::size_t i = 0; i < n_; ++i) {
      Complex v = mul(c.rhs_diag[i], u[i]);
      if (i > 0) v += mul(c.rhs_sub[i], u[i - 1]);
      if (i + 1 < n_) v += mul(c.rhs_sup[i], u[i + 1]);
      y[i] = v;
    }
    // forward elimination and back substitution
    Complex prev = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      prev = mul(y[i] - mul(c.lhs_sub[i], prev), c.inv_pivot[i]);
      y[i] = prev;
    }
    u[n_ - 1] = y[n_ - 1];
    for (std::size_t i = n_ - 1; i-- > 0;) u[i] = y[i] - mul(c.forward[i], u[i + 1]);
  }

  /// exp(-i tau E r c_l sigma_x) on the pairs (l, l+1), l = parity, parity+2, ...
  void dipole(PartialWaveState& s, double e, double tau, int parity) {
    const double dr = ops_.grid.dr;
    constexpr std::size_t reseed = 256;
    for (int l = parity; l + 1 <= lmax_; l += 2) {
      Complex* a = s.wave(l);
      Complex* b = s.wave(l + 1);
      const double step_angle = tau * e * dipole_coupling(l) * dr;  // angle at r_i is (i + 1) * step_angle
      const double cs = std::cos(step_angle), sn = std::sin(step_angle);
      double c = 1.0, si = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (i % reseed == 0) {
          const double ang = step_angle * static_cast<double>(i);
          c = std::cos(ang);
          si = std::sin(ang);
        }
        const double c_next = c * cs - si * sn;
        si = si * cs + c * sn;
        c = c_next;
        const Complex x = a[i], y = b[i];
        // [c, -i s; -i s, c]
        a[i] = {c * x.real() + si * y.imag(), c * x.imag() - si * y.real()};
        b[i] = {c * y.real() + si * x.imag(), c * y.imag() - si * x.real()};
      }
    }
  }

  const RadialOperators& ops_;
  double dt_;
  std::size_t n_;
  int lmax_;
  std::vector<double> mask_;
  std::vector<CnFactors> cn_;
  std::vector<Complex> work_;
};

}  // namespace rabbitt::tdse
