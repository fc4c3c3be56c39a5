#pragma once

#include <Eigen/Sparse>

#include <cstddef>

namespace gapcount {

/// Number of eigenvalues of the symmetric matrix `a` strictly below `shift`,
/// from the signature of a - shift*I. Narrow-band matrices (1D chains) use a
/// banded LDL^T without pivoting; wide matrices, or a band factorization that
/// meets a near-zero pivot, fall back to a dense eigenvalue count.
std::size_t count_below(const Eigen::SparseMatrix<double>& a, double shift);

/// Number of eigenvalues in the half-open window [lo, hi).
std::size_t count_in_window(const Eigen::SparseMatrix<double>& a, double lo, double hi);

/// Bisects [lo, hi) down to `tol` for the smallest eigenvalue inside it.
/// Requires count_in_window(a, lo, hi) > 0.
double locate_eigenvalue(const Eigen::SparseMatrix<double>& a, double lo, double hi,
                         double tol = 1e-13);

/// Largest |row - col| over stored entries.
std::size_t half_bandwidth(const Eigen::SparseMatrix<double>& a);

}  // namespace gapcount
