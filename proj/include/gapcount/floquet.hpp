#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gapcount/periodic_graph.hpp"

namespace gapcount {

/// h(k): the nu x nu Hermitian matrix that the discrete Fourier transform
/// reduces H to. Off-diagonal blocks pick up e^{i k.n} per edge (j, j', n).
Eigen::MatrixXcd fiber_matrix(const PeriodicGraph& graph, std::span<const double> k);

struct HermitianEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXcd vectors; // column s belongs to values[s]
};

/// Rejects inputs that are not Hermitian to 1e-12 (relative to the largest entry).
HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& m);
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m);

/// Band functions k -> (E_1(k) <= ... <= E_nu(k)). Either backed by a graph's
/// fiber matrix or by an injected closed-form sampler.
class BandSampler {
 public:
  using Function = std::function<std::vector<double>(std::span<const double>)>;

  BandSampler(int dim, int nu, Function fn);
  static BandSampler from_graph(const PeriodicGraph& graph);

  int dim() const { return dim_; }
  int nu() const { return nu_; }
  std::vector<double> operator()(std::span<const double> k) const { return fn_(k); }

 private:
  int dim_;
  int nu_;
  Function fn_;
};

/// Uniform torus grid k_m = -pi + 2 pi m / M per axis, M^d points.
class TorusGrid {
 public:
  TorusGrid(int dim, int size, bool midpoint = false);

  int dim() const { return dim_; }
  int size() const { return size_; }
  std::size_t points() const { return points_; }
  double step() const;
  /// Quadrature weight (2 pi / M)^d.
  double cell_volume() const;
  std::vector<double> point(std::size_t index) const;
  std::vector<int> multi_index(std::size_t index) const;
  std::size_t linear(std::span<const int> multi) const;

 private:
  int dim_;
  int size_;
  bool midpoint_;
  std::size_t points_;
};

struct BandStructure {
  TorusGrid grid;
  int nu = 0;
  /// Point-major: values[point * nu + s].
  std::vector<double> values;
  /// Per band (min, max) over the grid.
  std::vector<std::pair<double, double>> extrema;

  double band(std::size_t point, int s) const { return values[point * nu + s]; }
};

BandStructure band_structure(const BandSampler& sampler, int grid_size);
BandStructure band_structure(const PeriodicGraph& graph, int grid_size);

/// CSV: k_1..k_d,E_1..E_nu, one row per grid point.
void write_band_csv(std::ostream& out, const BandStructure& bands);

enum class GapKind { left_semi_infinite, interior, right_semi_infinite };

/// A spectral gap (lower, upper). For interior gaps `band_above` is N (1-based):
/// lower = max E_{N-1}, upper = min E_N. Bounds are certified on the sampling grid
/// only; `grid_step` tells callers how fine that certification is.
struct Gap {
  double lower = 0.0;
  double upper = 0.0;
  GapKind kind = GapKind::interior;
  int band_above = 0;
  double grid_step = 0.0;
};

std::vector<Gap> find_gaps(const BandStructure& bands);

const char* to_string(GapKind kind);

/// A gap edge as an extremum of one band: a maximum of E_band at a left edge
/// Lambda_+, a minimum at a right edge Lambda_-. `band` is 0-based.
struct GapEdge {
  double value = 0.0;
  int band = 0;
  bool is_maximum = false;
};

/// Lambda_+ of `gap` (top of the band below). Throws for the left semi-infinite gap.
GapEdge left_edge(const Gap& gap, const BandStructure& bands);
/// Lambda_- of `gap` (bottom of the band above). Throws for the right semi-infinite gap.
GapEdge right_edge(const Gap& gap, const BandStructure& bands);

enum class Verdict { yes, no, inconclusive };

struct RegularityReport {
  GapEdge edge;
  std::vector<std::vector<double>> extremizers;
  std::vector<Eigen::MatrixXd> hessians;  // of E_band itself
  Verdict verdict = Verdict::inconclusive;  // yes = regular
  std::string reason;
};

struct RegularityOptions {
  int refinements = 16;
  double definiteness_tol = 1e-6;
};

/// Locates the extremizers of the edge band near grid candidates, refines them
/// and estimates Hessians by Richardson-extrapolated central differences.
RegularityReport check_edge_regularity(const BandSampler& sampler, const BandStructure& bands,
                                       const GapEdge& edge, RegularityOptions options = {});

}  // namespace gapcount
