#pragma once

// Field-free eigenstates of the discretized radial Hamiltonian: eigenvalues
// from the banded pencil, eigenvectors by inverse iteration. The basis for
// each l is exact for the discrete operator, so projecting on it is the
// spectral analysis of the propagated wave.

#include <cmath>
#include <complex>
#include <vector>

#include "rabbitt/errors.hpp"
#include "rabbitt/tdse/grid.hpp"

namespace rabbitt::tdse {

using Complex = std::complex<double>;

struct PartialWaveBasis {
  int l = 0;
  std::vector<double> energies;               ///< ascending
  std::vector<std::vector<double>> vectors;  ///< dr * sum u^2 = 1
};

/// All eigenstates of block l with energy in (e_min, e_max].
inline PartialWaveBasis partial_wave_basis(const RadialOperators& ops, int l, double e_min, double e_max) {
  if (l < 0 || l > ops.l_max()) throw PreconditionError("partial_wave_basis: l out of range");
  const auto& block = ops.blocks[l];
  auto [a, b] = block.pencil();
  PartialWaveBasis basis;
  basis.l = l;
  basis.energies = lapack::banded_eigenvalues_in(std::move(a), std::move(b), e_min, e_max);
  basis.vectors.reserve(basis.energies.size());
  for (double e : basis.energies) basis.vectors.push_back(block.eigenvector(e, ops.grid.dr));
  return basis;
}

/// Eigenbasis for every partial wave of the operators, computed once.
struct EigenBasis {
  double e_max = 0.0;
  std::vector<PartialWaveBasis> waves;

  EigenBasis(const RadialOperators& ops, double e_max_) : e_max(e_max_) {
    const double e_min = -ops.charge * ops.charge;  // below the 1s level
    for (int l = 0; l <= ops.l_max(); ++l) waves.push_back(partial_wave_basis(ops, l, e_min, e_max));
  }
};

/// Lowest s state and its energy.
struct BoundState {
  double energy = 0.0;
  std::vector<double> u;
};

inline BoundState lowest_state(const RadialOperators& ops, int l = 0) {
  const auto& block = ops.blocks.at(l);
  auto [a, b] = block.pencil();
  const double e = lapack::banded_eigenvalues_index(std::move(a), std::move(b), 1, 1).at(0);
  return {e, block.eigenvector(e, ops.grid.dr)};
}

inline double expectation_r(const std::vector<double>& u, const RadialGrid& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += g.r(i) * u[i] * u[i];
  return s * g.dr;
}

}  // namespace rabbitt::tdse
