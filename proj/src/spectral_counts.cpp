#include "gapcount/spectral_counts.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gapcount/csv.hpp"
#include "gapcount/inertia.hpp"
#include "gapcount/parallel.hpp"

namespace gapcount {

namespace {

void require_clear_of_spectrum(const Eigen::SparseMatrix<double>& a, double lambda,
                               const char* what) {
  const double lo = lambda - kSpectrumClearance;
  const double hi = lambda + kSpectrumClearance;
  if (count_in_window(a, lo, hi) == 0) return;
  const double e = locate_eigenvalue(a, lo, hi);
  std::ostringstream os;
  os.precision(17);
  os << "lambda = " << lambda << " is within " << kSpectrumClearance << " of the eigenvalue " << e
     << " of " << what;
  throw SpectrumHit(os.str(), e);
}

Eigen::SparseMatrix<double> shifted_by_potential(const Eigen::SparseMatrix<double>& h,
                                                 std::span<const double> v, double coupling) {
  Eigen::SparseMatrix<double> out = h;
  Eigen::VectorXd diag(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) diag(static_cast<Eigen::Index>(i)) = coupling * v[i];
  Eigen::SparseMatrix<double> d(h.rows(), h.cols());
  d.reserve(Eigen::VectorXi::Constant(h.cols(), 1));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (diag(static_cast<Eigen::Index>(i)) != 0.0) {
      d.insert(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
          diag(static_cast<Eigen::Index>(i));
    }
  }
  out += d;
  return out;
}

void require_matching(const Eigen::SparseMatrix<double>& h, std::span<const double> v) {
  if (h.rows() != h.cols() || static_cast<std::size_t>(h.rows()) != v.size()) {
    throw std::invalid_argument("finite model: H must be square with one V value per row");
  }
  for (double x : v) {
    if (!(x >= 0.0)) throw std::invalid_argument("finite model: V must be >= 0");
  }
}

}  // namespace

BSMatrix bs_matrix(const Eigen::SparseMatrix<double>& h, std::span<const double> v,
                   double lambda) {
  require_matching(h, v);
  require_clear_of_spectrum(h, lambda, "H");
  BSMatrix x;
  x.lambda = lambda;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) x.support.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(x.support.size());
  if (m == 0) {
    x.matrix.resize(0, 0);
    return x;
  }
  const auto n = h.rows();
  Eigen::SparseMatrix<double> resolvent_arg = -h;
  for (Eigen::Index i = 0; i < n; ++i) resolvent_arg.coeffRef(i, i) += lambda;
  resolvent_arg.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(resolvent_arg);
  if (lu.info() != Eigen::Success) throw std::runtime_error("bs_matrix: factorization failed");

  Eigen::VectorXd root(m);
  for (Eigen::Index c = 0; c < m; ++c) root(c) = std::sqrt(v[x.support[c]]);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index c = 0; c < m; ++c) rhs(static_cast<Eigen::Index>(x.support[c]), c) = root(c);
  const Eigen::MatrixXd y = lu.solve(rhs);
  x.matrix.resize(m, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index r = 0; r < m; ++r) {
      x.matrix(r, c) = root(r) * y(static_cast<Eigen::Index>(x.support[r]), c);
    }
  }
  // the solve is symmetric only up to rounding; take the symmetric part
  const Eigen::MatrixXd sym = 0.5 * (x.matrix + x.matrix.transpose());
  x.matrix = sym;
  return x;
}

BSMatrix bs_matrix(const FiniteHamiltonian& h, const DecayingPotential& v, double lambda) {
  return bs_matrix(h.matrix, v.values, lambda);
}

BSSpectrum bs_spectrum(const BSMatrix& x) {
  BSSpectrum s;
  s.lambda = x.lambda;
  if (x.matrix.rows() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(x.matrix, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("bs_spectrum: eigensolver failed");
  s.eigenvalues = solver.eigenvalues();
  return s;
}

Count counting_bs(const BSSpectrum& spectrum, double tau, Sign sign) {
  if (!(tau > 0.0)) throw std::invalid_argument("counting_bs: tau must be > 0");
  const double threshold = 1.0 / tau;
  Count c;
  for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i) {
    const double e = sign == Sign::plus ? spectrum.eigenvalues(i) : -spectrum.eigenvalues(i);
    if (e > threshold) ++c.value;
    if (std::abs(e - threshold) <= kBoundaryTol) c.boundary = true;
  }
  return c;
}

Count counting_bs(const BSMatrix& x, double tau, Sign sign) {
  return counting_bs(bs_spectrum(x), tau, sign);
}

Count counting_direct(const Eigen::SparseMatrix<double>& h, std::span<const double> v,
                      double lambda, double tau, Sign sign) {
  if (!(tau > 0.0)) throw std::invalid_argument("counting_direct: tau must be > 0");
  require_matching(h, v);
  const Eigen::SparseMatrix<double> perturbed =
      shifted_by_potential(h, v, sign == Sign::plus ? tau : -tau);
  require_clear_of_spectrum(h, lambda, "H");
  require_clear_of_spectrum(perturbed, lambda, sign == Sign::plus ? "H + tau V" : "H - tau V");
  const std::size_t base = count_below(h, lambda);
  const std::size_t moved = count_below(perturbed, lambda);
  Count c;
  if (sign == Sign::plus) {
    c.value = base >= moved ? base - moved : 0;
  } else {
    c.value = moved >= base ? moved - base : 0;
  }
  return c;
}

Count counting_direct(const FiniteHamiltonian& h, const DecayingPotential& v, double lambda,
                      double tau, Sign sign) {
  return counting_direct(h.matrix, v.values, lambda, tau, sign);
}

std::vector<double> edge_ladder(const Gap& gap, const BandStructure& bands, Sign sign, int steps) {
  double lo = bands.extrema.front().first, hi = bands.extrema.front().second;
  for (const auto& e : bands.extrema) {
    lo = std::min(lo, e.first);
    hi = std::max(hi, e.second);
  }
  const double width = gap.kind == GapKind::interior ? gap.upper - gap.lower : hi - lo;
  std::vector<double> ladder;
  for (int k = 1; k <= steps; ++k) {
    const double off = width * std::ldexp(1.0, -k);
    if (sign == Sign::minus) {
      if (gap.kind == GapKind::right_semi_infinite) {
        throw std::invalid_argument("edge_ladder: sign minus needs a gap with an upper edge");
      }
      ladder.push_back(gap.upper - off);
    } else {
      if (gap.kind == GapKind::left_semi_infinite) {
        throw std::invalid_argument("edge_ladder: sign plus needs a gap with a lower edge");
      }
      ladder.push_back(gap.lower + off);
    }
  }
  return ladder;
}

EdgeCount edge_counting(const Eigen::SparseMatrix<double>& h, std::span<const double> v,
                        const std::vector<double>& ladder, double tau, Sign sign) {
  if (!(tau > 0.0)) throw std::invalid_argument("edge_counting: tau must be > 0");
  require_matching(h, v);
  const Eigen::SparseMatrix<double> perturbed =
      shifted_by_potential(h, v, sign == Sign::plus ? tau : -tau);
  EdgeCount out;
  out.lambdas = ladder;
  for (double lambda : ladder) {
    const auto near = [&](const Eigen::SparseMatrix<double>& a) {
      return count_in_window(a, lambda - kSpectrumClearance, lambda + kSpectrumClearance) > 0;
    };
    if (near(h) || near(perturbed)) out.boundary = true;
    const std::size_t base = count_below(h, lambda);
    const std::size_t moved = count_below(perturbed, lambda);
    std::size_t c = 0;
    if (sign == Sign::plus) {
      c = base >= moved ? base - moved : 0;
    } else {
      c = moved >= base ? moved - base : 0;
    }
    out.counts.push_back(c);
  }
  if (!out.counts.empty()) {
    out.estimate = out.counts.back();
    const std::size_t n = out.counts.size();
    out.stabilized = n >= 2 && out.counts[n - 1] == out.counts[n - 2];
  }
  return out;
}

CountingTable asymptotic_table(const PeriodicGraph& graph, const AngularProfile& theta, double p,
                               double lambda, Sign sign, const std::vector<double>& taus,
                               const std::vector<int>& radii, AsymptoticOptions options) {
  if (radii.empty() || taus.empty()) {
    throw std::invalid_argument("asymptotic_table: need at least one tau and one radius");
  }
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (radii[i] <= radii[i - 1]) {
      throw std::invalid_argument("asymptotic_table: radii must be strictly increasing");
    }
  }
  const int dim = graph.dim();
  for (double tau : taus) {
    const double need = options.support_factor * std::pow(tau, p / dim);
    if (radii.back() < need) {
      std::ostringstream os;
      os << "asymptotic_table: largest radius " << radii.back() << " is below the support bound "
         << need << " for tau = " << tau;
      throw std::invalid_argument(os.str());
    }
  }

  const int band_grid = options.band_grid > 0 ? options.band_grid
                                              : (dim == 1 ? 256 : dim == 2 ? 64 : 24);
  const BandSampler sampler = BandSampler::from_graph(graph);
  const BandStructure bands = band_structure(sampler, band_grid);
  bool in_gap = false;
  for (const Gap& g : find_gaps(bands)) {
    if (g.lower < lambda && lambda < g.upper) in_gap = true;
  }
  if (!in_gap) {
    std::ostringstream os;
    os << "asymptotic_table: lambda = " << lambda << " is not inside a detected gap";
    throw std::invalid_argument(os.str());
  }
  const double gamma =
      gamma_coefficient(sampler, bands, lambda, p, sign, theta, options.gamma).value;

  struct PerRadius {
    std::vector<Count> direct;
    BSSpectrum spectrum;
  };
  std::vector<PerRadius> per(radii.size());
  parallel_for(radii.size(), [&](std::size_t r) {
    const FiniteHamiltonian h = assemble_truncated(graph, radii[r]);
    const DecayingPotential v = sample_potential(graph, theta, p, radii[r]);
    for (double tau : taus) per[r].direct.push_back(counting_direct(h, v, lambda, tau, sign));
    per[r].spectrum = bs_spectrum(bs_matrix(h, v, lambda));
  });

  CountingTable table;
  table.profile = theta.name();
  table.p = p;
  table.sign = sign;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    CountingRow row;
    row.lambda = lambda;
    row.tau = taus[t];
    row.gamma = gamma;
    for (const auto& pr : per) row.radius_counts.push_back(pr.direct[t].value);
    std::size_t chosen = radii.size() - 1;
    bool stable = false;
    for (std::size_t r = radii.size() - 1; r >= 1; --r) {
      if (row.radius_counts[r] == row.radius_counts[r - 1]) {
        chosen = r;
        stable = true;
        break;
      }
    }
    row.radius = radii[chosen];
    row.n_direct = per[chosen].direct[t].value;
    const Count bs = counting_bs(per[chosen].spectrum, taus[t], sign);
    row.n_bs = bs.value;
    row.ratio = gamma > 0.0 ? static_cast<double>(row.n_bs) / (std::pow(taus[t], p) * gamma) : 0.0;
    if (!stable) row.flags.push_back("unstabilized");
    if (bs.boundary || per[chosen].direct[t].boundary) row.flags.push_back("boundary");
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_counting_csv(std::ostream& out, const CountingTable& table) {
  write_csv_row(out, {"lambda", "tau", "L", "N_bs", "N_direct", "gamma", "ratio", "flags"});
  for (const auto& r : table.rows) {
    std::string flags;
    for (std::size_t i = 0; i < r.flags.size(); ++i) flags += (i ? ";" : "") + r.flags[i];
    write_csv_row(out, {format_real(r.lambda), format_real(r.tau), std::to_string(r.radius),
                        std::to_string(r.n_bs), std::to_string(r.n_direct), format_real(r.gamma),
                        format_real(r.ratio), flags});
  }
}

}  // namespace gapcount
