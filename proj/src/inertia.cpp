#include "gapcount/inertia.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace gapcount {

std::size_t half_bandwidth(const Eigen::SparseMatrix<double>& a) {
  std::size_t bw = 0;
  for (int col = 0; col < a.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it) {
      const auto r = static_cast<std::size_t>(it.row());
      const auto c = static_cast<std::size_t>(col);
      bw = std::max(bw, r > c ? r - c : c - r);
    }
  }
  return bw;
}

namespace {

constexpr std::size_t kMaxBand = 64;

/// Negative-pivot count of the banded LDL^T of (a - shift I), or nullopt on a
/// pivot too small to trust.
std::optional<std::size_t> banded_negative_pivots(const Eigen::SparseMatrix<double>& a,
                                                  double shift, std::size_t bw) {
  const std::size_t n = static_cast<std::size_t>(a.rows());
  const std::size_t w = bw + 1;
  // band(i, i - j) holds entry (i, j) of the lower triangle, 0 <= i - j <= bw
  std::vector<double> band(n * w, 0.0);
  double norm = 0.0;
  for (int col = 0; col < a.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it) {
      const std::size_t r = static_cast<std::size_t>(it.row());
      const std::size_t c = static_cast<std::size_t>(col);
      norm = std::max(norm, std::abs(it.value()));
      if (r < c) continue;
      band[r * w + (r - c)] = it.value() - (r == c ? shift : 0.0);
    }
  }
  norm = std::max(norm, std::abs(shift));
  const double tiny = 1e-14 * std::max(norm, 1.0);
  std::vector<double> col(w);
  std::size_t negatives = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dk = band[k * w];
    if (!(std::abs(dk) > tiny)) return std::nullopt;
    if (dk < 0.0) ++negatives;
    const std::size_t last = std::min(n - 1, k + bw);
    for (std::size_t i = k + 1; i <= last; ++i) col[i - k] = band[i * w + (i - k)];
    for (std::size_t i = k + 1; i <= last; ++i) {
      const double lik = col[i - k] / dk;
      if (lik == 0.0) continue;
      for (std::size_t j = k + 1; j <= i; ++j) band[i * w + (i - j)] -= lik * col[j - k];
    }
  }
  return negatives;
}

std::size_t dense_count_below(const Eigen::SparseMatrix<double>& a, double shift) {
  const Eigen::MatrixXd dense = Eigen::MatrixXd(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("count_below: eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return static_cast<std::size_t>(std::count_if(ev.data(), ev.data() + ev.size(),
                                                [shift](double e) { return e < shift; }));
}

}  // namespace

std::size_t count_below(const Eigen::SparseMatrix<double>& a, double shift) {
  if (a.rows() != a.cols()) throw std::invalid_argument("count_below: matrix is not square");
  if (a.rows() == 0) return 0;
  const std::size_t n = static_cast<std::size_t>(a.rows());
  const std::size_t bw = half_bandwidth(a);
  if (bw <= kMaxBand && n > 4 * bw) {
    if (auto neg = banded_negative_pivots(a, shift, bw)) return *neg;
  }
  return dense_count_below(a, shift);
}

std::size_t count_in_window(const Eigen::SparseMatrix<double>& a, double lo, double hi) {
  const std::size_t below_hi = count_below(a, hi);
  const std::size_t below_lo = count_below(a, lo);
  return below_hi > below_lo ? below_hi - below_lo : 0;
}

double locate_eigenvalue(const Eigen::SparseMatrix<double>& a, double lo, double hi, double tol) {
  if (count_in_window(a, lo, hi) == 0) {
    throw std::invalid_argument("locate_eigenvalue: no eigenvalue in the window");
  }
  const std::size_t base = count_below(a, lo);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_below(a, mid) > base) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace gapcount
