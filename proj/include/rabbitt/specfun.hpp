#pragma once

// Complex log-Gamma: Stirling series after an upward recurrence shift.
//
// The result is the principal branch of log Gamma, i.e. the analytic
// continuation from the positive real axis with the cut along the negative
// real axis. Its imaginary part is continuous (no 2*pi jumps), which is what
// phase sums need; only arg_gamma reduces to (-pi, pi].

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "rabbitt/errors.hpp"
#include "rabbitt/units.hpp"

namespace rabbitt::specfun {

using Complex = std::complex<double>;

namespace detail {

// B_{2n} / (2n (2n-1)), n = 1..8
inline constexpr std::array<double, 8> stirling_coeffs = {
    1.0 / 12.0,        -1.0 / 360.0,      1.0 / 1260.0,  -1.0 / 1680.0,
    1.0 / 1188.0,      -691.0 / 360360.0, 1.0 / 156.0,   -3617.0 / 122400.0,
};

inline constexpr double shift_threshold = 15.0;

inline Complex stirling(Complex z) {
  const Complex inv = 1.0 / z;
  const Complex inv2 = inv * inv;
  Complex series = 0.0;
  Complex power = inv;
  for (double c : stirling_coeffs) {
    series += c * power;
    power *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

}  // namespace detail

inline bool is_pole(Complex z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

inline Complex log_gamma(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw PreconditionError("log_gamma: non-finite argument");
  if (is_pole(z)) throw PreconditionError("log_gamma: pole at non-positive integer");

  if (z.real() >= detail::shift_threshold) return detail::stirling(z);

  // log Gamma(z) = log Gamma(z + n) - sum_{k<n} log(z + k). The modulus is
  // accumulated as a rescaled product, the argument as a sum of principal
  // arguments, which keeps the imaginary part on the continuous branch.
  const int n = static_cast<int>(std::ceil(detail::shift_threshold - z.real()));
  double log_modulus = 0.0;
  double scaled = 1.0;
  double arg_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const Complex w = z + static_cast<double>(k);
    scaled *= std::abs(w);
    arg_sum += std::arg(w);
    if (scaled > 1e150 || scaled < 1e-150) {
      log_modulus += std::log(scaled);
      scaled = 1.0;
    }
  }
  log_modulus += std::log(scaled);
  return detail::stirling(z + static_cast<double>(n)) - Complex(log_modulus, arg_sum);
}

/// arg Gamma(z), principal value in (-pi, pi].
inline double arg_gamma(Complex z) { return units::wrap_phase(log_gamma(z).imag()); }

/// Continuous (unreduced) arg Gamma(z).
inline double arg_gamma_unwrapped(Complex z) { return log_gamma(z).imag(); }

inline Complex gamma(Complex z) { return std::exp(log_gamma(z)); }

}  // namespace rabbitt::specfun
