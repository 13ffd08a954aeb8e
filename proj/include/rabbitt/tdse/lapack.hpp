#pragma once

// Minimal Fortran LAPACK bindings for the banded generalized symmetric
// eigenproblem (dsbgvx) and general tridiagonal solves (dgtsv).

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "rabbitt/errors.hpp"

extern "C" {
void dsbgvx_(const char* jobz, const char* range, const char* uplo, const int* n, const int* ka, const int* kb,
             double* ab, const int* ldab, double* bb, const int* ldbb, double* q, const int* ldq, const double* vl,
             const double* vu, const int* il, const int* iu, const double* abstol, int* m, double* w, double* z,
             const int* ldz, double* work, int* iwork, int* ifail, int* info, std::size_t, std::size_t,
             std::size_t);
void dgtsv_(const int* n, const int* nrhs, double* dl, double* d, double* du, double* b, const int* ldb,
            int* info);
}

namespace rabbitt::tdse::lapack {

/// Symmetric band matrix with `kd` superdiagonals in LAPACK upper storage:
/// element (i, j), i <= j <= i + kd, lives at ab[(kd + i - j) + j * (kd + 1)].
struct SymBand {
  int n = 0;
  int kd = 0;
  std::vector<double> ab;

  SymBand(int n_, int kd_) : n(n_), kd(kd_), ab(static_cast<std::size_t>(n_) * (kd_ + 1), 0.0) {}
  double& operator()(int i, int j) { return ab[static_cast<std::size_t>(kd + i - j) + static_cast<std::size_t>(j) * (kd + 1)]; }
};

/// Eigenvalues of A x = lambda B x in (vl, vu], ascending. A and B are
/// overwritten.
inline std::vector<double> banded_eigenvalues_in(SymBand a, SymBand b, double vl, double vu) {
  const int n = a.n, ka = a.kd, kb = b.kd, ldab = ka + 1, ldbb = kb + 1, ldq = 1, ldz = 1, il = 0, iu = 0;
  const double abstol = 2.0 * std::numeric_limits<double>::min();
  int m = 0, info = 0;
  std::vector<double> w(n), work(7 * static_cast<std::size_t>(n));
  std::vector<int> iwork(5 * static_cast<std::size_t>(n)), ifail(n);
  double q = 0.0, z = 0.0;
  dsbgvx_("N", "V", "U", &n, &ka, &kb, a.ab.data(), &ldab, b.ab.data(), &ldbb, &q, &ldq, &vl, &vu, &il, &iu,
          &abstol, &m, w.data(), &z, &ldz, work.data(), iwork.data(), ifail.data(), &info, 1, 1, 1);
  if (info != 0) throw NumericalError("dsbgvx failed with info = " + std::to_string(info));
  w.resize(m);
  return w;
}

/// Eigenvalues with indices il..iu (1-based, ascending).
inline std::vector<double> banded_eigenvalues_index(SymBand a, SymBand b, int il, int iu) {
  const int n = a.n, ka = a.kd, kb = b.kd, ldab = ka + 1, ldbb = kb + 1, ldq = 1, ldz = 1;
  const double abstol = 2.0 * std::numeric_limits<double>::min(), vl = 0.0, vu = 0.0;
  int m = 0, info = 0;
  std::vector<double> w(n), work(7 * static_cast<std::size_t>(n));
  std::vector<int> iwork(5 * static_cast<std::size_t>(n)), ifail(n);
  double q = 0.0, z = 0.0;
  dsbgvx_("N", "I", "U", &n, &ka, &kb, a.ab.data(), &ldab, b.ab.data(), &ldbb, &q, &ldq, &vl, &vu, &il, &iu,
          &abstol, &m, w.data(), &z, &ldz, work.data(), iwork.data(), ifail.data(), &info, 1, 1, 1);
  if (info != 0) throw NumericalError("dsbgvx failed with info = " + std::to_string(info));
  w.resize(m);
  return w;
}

/// Solves a general tridiagonal system in place (b holds the right-hand side
/// on entry and the solution on exit). Returns false if singular.
inline bool tridiagonal_solve(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                              std::vector<double>& b) {
  const int n = static_cast<int>(diag.size()), nrhs = 1, ldb = n;
  int info = 0;
  dgtsv_(&n, &nrhs, sub.data(), diag.data(), sup.data(), b.data(), &ldb, &info);
  if (info < 0) throw NumericalError("dgtsv: illegal argument " + std::to_string(-info));
  return info == 0;
}

}  // namespace rabbitt::tdse::lapack
