#pragma once

// Reference computations that share no code path with the library: scalar
// adaptive quadrature, brute-force sweeps, direct dense assemblies.

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;

/// (2 pi)^{-1} int_{-pi}^{pi} g(k) dk by adaptive Gauss-Kronrod.
double torus_mean_1d(const std::function<double(double)>& g);

/// Z chain, theta == 1, lambda below the band, sign minus:
/// Gamma = (1/2pi) int (lambda - E)_-^{-p} dk * 2, E = 2 - 2 cos k.
double chain_gamma_minus(double lambda, double p);

/// Dimer with edges (1,2,[0]), (2,1,[1]) and Q = (0, 2): closed-form bands
/// 3 -+ sqrt(1 + |1 + e^{ik}|^2).
std::pair<double, double> dimer_bands(double k);

/// Gap of the dimer from a dense scalar sweep of the closed form.
std::pair<double, double> dimer_gap(int samples = 200001);

/// #{x in raw : |x| > s} by linear scan.
std::size_t count_above(const std::vector<double>& raw, double s);

/// sup_s s mu(s)^{1/p}, evaluated as left limits at every value of the
/// unsorted input (mu just below a equals #{|x| >= a}).
double weak_quasinorm_sweep(const std::vector<double>& raw, double p);

/// Eigenvalues of a real symmetric matrix strictly below `shift`, dense.
std::size_t dense_count_below(const Eigen::MatrixXd& a, double shift);

struct GappedModel {
  Eigen::MatrixXd h;
  Eigen::VectorXd v;
  double gap_lo = 0.0;
  double gap_hi = 0.0;
};

/// Random symmetric H = Q D Q^T with spectrum in [0,1] u [2,3] (one of the
/// clusters may be empty), random V >= 0 with some zero entries.
GappedModel random_gapped_model(std::mt19937_64& rng, int n);

/// Singular values (descending) of the finite section of f Phi W Phi^* g,
/// assembled as the M^d x M^d kernel matrix on the torus grid
/// k_m = -pi + 2 pi m / M, then JacobiSVD.
std::vector<double> direct_pdo_svalues(
    int dim, const std::function<Complex(std::span<const double>)>& f,
    const std::function<Complex(std::span<const double>)>& g,
    const std::vector<std::vector<int>>& cells, const std::vector<Complex>& w, int grid);

/// Singular values of the M^d x N matrix of f Phi W.
std::vector<double> direct_multiplier_svalues(
    int dim, const std::function<Complex(std::span<const double>)>& f,
    const std::vector<std::vector<int>>& cells, const std::vector<Complex>& w, int grid);

/// n(s, A) = #{singular values > s} for a dense matrix.
std::size_t svalue_count(const Eigen::MatrixXd& a, double s);

/// n_+(s, A) = #{eigenvalues > s} of a symmetric matrix.
std::size_t eig_count_above(const Eigen::MatrixXd& a, double s);

}  // namespace oracle
