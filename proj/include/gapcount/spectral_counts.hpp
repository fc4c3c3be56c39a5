#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gapcount/angular_profile.hpp"
#include "gapcount/floquet.hpp"
#include "gapcount/gamma.hpp"
#include "gapcount/periodic_graph.hpp"

namespace gapcount {

/// Precondition failure: lambda lies (numerically) on the spectrum of a finite model.
class SpectrumHit : public std::domain_error {
 public:
  SpectrumHit(const std::string& what, double eigenvalue)
      : std::domain_error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// Minimum admissible distance from lambda to a finite-model spectrum.
inline constexpr double kSpectrumClearance = 1e-8;
/// Eigenvalues this close to the threshold 1/tau make a count boundary-ambiguous.
inline constexpr double kBoundaryTol = 1e-10;

/// X = V^{1/2} (lambda I - H)^{-1} V^{1/2} restricted to supp V.
struct BSMatrix {
  double lambda = 0.0;
  Eigen::MatrixXd matrix;
  std::vector<std::size_t> support;  // row of H for each row of X
};

/// Throws SpectrumHit if lambda is within kSpectrumClearance of sigma(H).
BSMatrix bs_matrix(const Eigen::SparseMatrix<double>& h, std::span<const double> v, double lambda);
BSMatrix bs_matrix(const FiniteHamiltonian& h, const DecayingPotential& v, double lambda);

/// Ascending eigenvalues of X, computed once and reused across tau.
struct BSSpectrum {
  double lambda = 0.0;
  Eigen::VectorXd eigenvalues;
};

BSSpectrum bs_spectrum(const BSMatrix& x);

struct Count {
  std::size_t value = 0;
  bool boundary = false;  // an eigenvalue sits within kBoundaryTol of the threshold
};

/// sign +: #{eig X > 1/tau}; sign -: #{eig X < -1/tau}.
Count counting_bs(const BSSpectrum& spectrum, double tau, Sign sign);
Count counting_bs(const BSMatrix& x, double tau, Sign sign);

/// Inertia difference: sign + counts eigenvalues of H below lambda minus those of
/// H + tau V; sign - counts H - tau V minus H. Throws SpectrumHit when lambda is
/// within kSpectrumClearance of sigma(H) or sigma(H +- tau V).
Count counting_direct(const Eigen::SparseMatrix<double>& h, std::span<const double> v,
                      double lambda, double tau, Sign sign);
Count counting_direct(const FiniteHamiltonian& h, const DecayingPotential& v, double lambda,
                      double tau, Sign sign);

/// Geometric ladder approaching the relevant edge of `gap` from inside:
/// lambda_k = Lambda_- - w 2^{-k} (sign -) or Lambda_+ + w 2^{-k} (sign +),
/// k = 1..steps, with w the gap width (the spectrum width for semi-infinite gaps).
std::vector<double> edge_ladder(const Gap& gap, const BandStructure& bands, Sign sign,
                                int steps = 12);

struct EdgeCount {
  std::vector<double> lambdas;
  std::vector<std::size_t> counts;
  std::size_t estimate = 0;
  bool stabilized = false;  // the last two ladder counts agree
  bool boundary = false;
};

EdgeCount edge_counting(const Eigen::SparseMatrix<double>& h, std::span<const double> v,
                        const std::vector<double>& ladder, double tau, Sign sign);

struct CountingRow {
  double lambda = 0.0;
  double tau = 0.0;
  int radius = 0;
  std::size_t n_bs = 0;
  std::size_t n_direct = 0;
  double gamma = 0.0;
  double ratio = 0.0;
  std::vector<std::string> flags;  // "unstabilized", "boundary"
  /// direct counts for every radius of the ladder, in input order
  std::vector<std::size_t> radius_counts;
};

struct CountingTable {
  std::string profile;
  double p = 0.0;
  Sign sign = Sign::minus;
  std::vector<CountingRow> rows;
};

struct AsymptoticOptions {
  /// Support heuristic: the largest radius must be >= support_factor * tau^{p/d}.
  double support_factor = 10.0;
  /// Band grid used to certify that lambda lies in a gap.
  int band_grid = 0;
  GammaOptions gamma;
};

/// N(lambda, tau) against tau^p Gamma(lambda) over a ladder of truncation radii.
/// Each row reports the largest radius whose count agrees with the previous one.
CountingTable asymptotic_table(const PeriodicGraph& graph, const AngularProfile& theta, double p,
                               double lambda, Sign sign, const std::vector<double>& taus,
                               const std::vector<int>& radii, AsymptoticOptions options = {});

void write_counting_csv(std::ostream& out, const CountingTable& table);

}  // namespace gapcount
