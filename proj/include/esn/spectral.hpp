#pragma once

#include "esn/types.hpp"

namespace esn {

/// Largest eigenvalue modulus, computed by Arnoldi iteration.
///
/// The Krylov basis grows until the dominant Ritz modulus is stable to
/// ~1e-10 relative; for matrices up to a few hundred rows the basis spans
/// the whole space and the result is exact up to rounding. Works for
/// real and complex-conjugate dominant eigenvalues alike.
double spectral_radius(const Matrix& w);
double spectral_radius(const SparseMatrix& w);

/// Returns `w * (target / spectral_radius(w))`.
/// Throws NumericalError when `w` has spectral radius zero, ConfigError when
/// `target` is not a positive finite number.
Matrix rescale_spectral_radius(const Matrix& w, double target);
SparseMatrix rescale_spectral_radius(const SparseMatrix& w, double target);

} // namespace esn
