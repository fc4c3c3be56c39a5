#include "gapcount/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gapcount/csv.hpp"
#include "gapcount/parallel.hpp"

namespace gapcount {

using std::numbers::pi;

Eigen::MatrixXcd fiber_matrix(const PeriodicGraph& graph, std::span<const double> k) {
  const int nu = graph.nu();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(nu, nu);
  for (int j = 0; j < nu; ++j) h(j, j) = graph.degrees()[j] + graph.q()[j];
  for (const auto& e : graph.edges()) {
    double phase = 0.0;
    for (int a = 0; a < graph.dim(); ++a) phase += k[a] * e.cell[a];
    if (e.self_orbit()) {
      h(e.from, e.from) -= 2.0 * std::cos(phase);
    } else {
      const std::complex<double> w(std::cos(phase), std::sin(phase));
      h(e.from, e.to) -= w;
      h(e.to, e.from) -= std::conj(w);
    }
  }
  return h;
}

namespace {

void require_hermitian(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_eigen: matrix is not square");
  const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (defect > 1e-12 * scale) {
    std::ostringstream os;
    os << "hermitian_eigen: input is not Hermitian (max |M - M*| = " << defect << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& m) {
  require_hermitian(m);
  if (m.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eigen: no convergence");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
  require_hermitian(m);
  if (m.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eigen: no convergence");
  return solver.eigenvalues();
}

BandSampler::BandSampler(int dim, int nu, Function fn) : dim_(dim), nu_(nu), fn_(std::move(fn)) {
  if (dim < 1 || nu < 1) throw std::invalid_argument("BandSampler: need dim >= 1 and nu >= 1");
}

BandSampler BandSampler::from_graph(const PeriodicGraph& graph) {
  auto shared = std::make_shared<const PeriodicGraph>(graph);
  return BandSampler(graph.dim(), graph.nu(), [shared](std::span<const double> k) {
    const Eigen::MatrixXcd h = fiber_matrix(*shared, k);
    if (h.rows() == 1) return std::vector<double>{h(0, 0).real()};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
  });
}

TorusGrid::TorusGrid(int dim, int size, bool midpoint)
    : dim_(dim), size_(size), midpoint_(midpoint), points_(1) {
  if (dim < 1) throw std::invalid_argument("TorusGrid: dim must be >= 1");
  if (size < 2) throw std::invalid_argument("TorusGrid: grid size must be >= 2");
  for (int a = 0; a < dim; ++a) points_ *= static_cast<std::size_t>(size);
}

double TorusGrid::step() const { return 2.0 * pi / size_; }

double TorusGrid::cell_volume() const { return std::pow(step(), dim_); }

std::vector<int> TorusGrid::multi_index(std::size_t index) const {
  std::vector<int> m(dim_);
  for (int a = dim_ - 1; a >= 0; --a) {
    m[a] = static_cast<int>(index % size_);
    index /= size_;
  }
  return m;
}

std::size_t TorusGrid::linear(std::span<const int> multi) const {
  std::size_t lin = 0;
  for (int x : multi) {
    const int wrapped = ((x % size_) + size_) % size_;
    lin = lin * size_ + static_cast<std::size_t>(wrapped);
  }
  return lin;
}

std::vector<double> TorusGrid::point(std::size_t index) const {
  const std::vector<int> m = multi_index(index);
  std::vector<double> k(dim_);
  const double shift = midpoint_ ? 0.5 : 0.0;
  for (int a = 0; a < dim_; ++a) k[a] = -pi + step() * (m[a] + shift);
  return k;
}

BandStructure band_structure(const BandSampler& sampler, int grid_size) {
  BandStructure bs{TorusGrid(sampler.dim(), grid_size), sampler.nu(), {}, {}};
  const std::size_t n = bs.grid.points();
  const int nu = sampler.nu();
  bs.values.resize(n * nu);
  parallel_for(n, [&](std::size_t i) {
    const std::vector<double> e = sampler(bs.grid.point(i));
    std::copy(e.begin(), e.end(), bs.values.begin() + static_cast<std::ptrdiff_t>(i * nu));
  });
  bs.extrema.assign(nu, {std::numeric_limits<double>::infinity(),
                         -std::numeric_limits<double>::infinity()});
  for (std::size_t i = 0; i < n; ++i) {
    for (int s = 0; s < nu; ++s) {
      const double e = bs.band(i, s);
      bs.extrema[s].first = std::min(bs.extrema[s].first, e);
      bs.extrema[s].second = std::max(bs.extrema[s].second, e);
    }
  }
  return bs;
}

BandStructure band_structure(const PeriodicGraph& graph, int grid_size) {
  return band_structure(BandSampler::from_graph(graph), grid_size);
}

void write_band_csv(std::ostream& out, const BandStructure& bands) {
  std::vector<std::string> header;
  for (int a = 1; a <= bands.grid.dim(); ++a) header.push_back("k_" + std::to_string(a));
  for (int s = 1; s <= bands.nu; ++s) header.push_back("E_" + std::to_string(s));
  write_csv_row(out, header);
  for (std::size_t i = 0; i < bands.grid.points(); ++i) {
    std::vector<std::string> row;
    for (double k : bands.grid.point(i)) row.push_back(format_real(k));
    for (int s = 0; s < bands.nu; ++s) row.push_back(format_real(bands.band(i, s)));
    write_csv_row(out, row);
  }
}

std::vector<Gap> find_gaps(const BandStructure& bands) {
  const double inf = std::numeric_limits<double>::infinity();
  const double h = bands.grid.step();
  std::vector<Gap> gaps;
  gaps.push_back({-inf, bands.extrema.front().first, GapKind::left_semi_infinite, 1, h});
  for (int n = 1; n < bands.nu; ++n) {
    const double below = bands.extrema[n - 1].second;
    const double above = bands.extrema[n].first;
    if (below < above) gaps.push_back({below, above, GapKind::interior, n + 1, h});
  }
  double top = -inf;
  for (const auto& e : bands.extrema) top = std::max(top, e.second);
  gaps.push_back({top, inf, GapKind::right_semi_infinite, 0, h});
  return gaps;
}

const char* to_string(GapKind kind) {
  switch (kind) {
    case GapKind::left_semi_infinite:
      return "left-semi-infinite";
    case GapKind::interior:
      return "interior";
    case GapKind::right_semi_infinite:
      return "right-semi-infinite";
  }
  return "?";
}

GapEdge left_edge(const Gap& gap, const BandStructure& bands) {
  switch (gap.kind) {
    case GapKind::left_semi_infinite:
      throw std::invalid_argument("left semi-infinite gap has no lower edge");
    case GapKind::interior:
      return {gap.lower, gap.band_above - 2, true};
    case GapKind::right_semi_infinite: {
      int top = 0;
      for (int s = 1; s < bands.nu; ++s) {
        if (bands.extrema[s].second > bands.extrema[top].second) top = s;
      }
      return {gap.lower, top, true};
    }
  }
  return {};
}

GapEdge right_edge(const Gap& gap, const BandStructure& /*bands*/) {
  switch (gap.kind) {
    case GapKind::left_semi_infinite:
      return {gap.upper, 0, false};
    case GapKind::interior:
      return {gap.upper, gap.band_above - 1, false};
    case GapKind::right_semi_infinite:
      throw std::invalid_argument("right semi-infinite gap has no upper edge");
  }
  return {};
}

namespace {

/// Objective minimized at the edge: +E for a minimum edge, -E for a maximum edge.
struct EdgeObjective {
  const BandSampler& sampler;
  int band;
  double sign;

  double operator()(std::span<const double> k) const { return sign * sampler(k)[band]; }
};

std::vector<double> shifted(std::span<const double> k, int a, double da, int b = -1,
                            double db = 0.0) {
  std::vector<double> x(k.begin(), k.end());
  x[a] += da;
  if (b >= 0) x[b] += db;
  return x;
}

Eigen::MatrixXd fd_hessian(const EdgeObjective& g, std::span<const double> k, double h) {
  const int d = static_cast<int>(k.size());
  Eigen::MatrixXd hess(d, d);
  const double g0 = g(k);
  for (int a = 0; a < d; ++a) {
    hess(a, a) = (g(shifted(k, a, h)) - 2.0 * g0 + g(shifted(k, a, -h))) / (h * h);
    for (int b = a + 1; b < d; ++b) {
      const double v = (g(shifted(k, a, h, b, h)) - g(shifted(k, a, h, b, -h)) -
                        g(shifted(k, a, -h, b, h)) + g(shifted(k, a, -h, b, -h))) /
                       (4.0 * h * h);
      hess(a, b) = hess(b, a) = v;
    }
  }
  return hess;
}

Eigen::VectorXd fd_gradient(const EdgeObjective& g, std::span<const double> k, double h) {
  const int d = static_cast<int>(k.size());
  Eigen::VectorXd grad(d);
  for (int a = 0; a < d; ++a) {
    const double coarse = (g(shifted(k, a, h)) - g(shifted(k, a, -h))) / (2 * h);
    const double fine = (g(shifted(k, a, h / 2)) - g(shifted(k, a, -h / 2))) / h;
    grad(a) = (4.0 * fine - coarse) / 3.0;
  }
  return grad;
}

struct HessianEstimate {
  Eigen::MatrixXd value;
  bool converged = false;
};

/// Step-halving central differences with Richardson extrapolation (h^2 -> h^4).
HessianEstimate richardson_hessian(const EdgeObjective& g, std::span<const double> k) {
  double h = 0.1;
  Eigen::MatrixXd prev_raw = fd_hessian(g, k, h);
  Eigen::MatrixXd prev_rich;
  bool have_rich = false;
  for (int it = 0; it < 8; ++it) {
    h /= 2.0;
    const Eigen::MatrixXd raw = fd_hessian(g, k, h);
    const Eigen::MatrixXd rich = (4.0 * raw - prev_raw) / 3.0;
    if (have_rich) {
      const double scale = std::max(1.0, rich.cwiseAbs().maxCoeff());
      if ((rich - prev_rich).cwiseAbs().maxCoeff() <= 1e-8 * scale) return {rich, true};
    }
    prev_raw = raw;
    prev_rich = rich;
    have_rich = true;
  }
  return {prev_rich, false};
}

double periodic_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = std::fmod(std::abs(a[i] - b[i]), 2.0 * pi);
    d = std::min(d, 2.0 * pi - d);
    s += d * d;
  }
  return std::sqrt(s);
}

std::string format_point(std::span<const double> k) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < k.size(); ++i) os << (i ? ", " : "") << k[i];
  os << ")";
  return os.str();
}

}  // namespace

RegularityReport check_edge_regularity(const BandSampler& sampler, const BandStructure& bands,
                                       const GapEdge& edge, RegularityOptions options) {
  RegularityReport report;
  report.edge = edge;
  const int d = sampler.dim();
  const double sign = edge.is_maximum ? -1.0 : 1.0;
  const EdgeObjective g{sampler, edge.band, sign};
  double spread = 0.0;
  for (const auto& e : bands.extrema) spread = std::max(spread, e.second - e.first);
  const double scale = std::max({1.0, std::abs(edge.value), spread});

  // the edge value must lie outside every other band
  for (int s = 0; s < bands.nu; ++s) {
    if (s == edge.band) continue;
    const double tol = 1e-9 * scale;
    if (edge.value >= bands.extrema[s].first - tol && edge.value <= bands.extrema[s].second + tol) {
      report.verdict = Verdict::no;
      report.reason = "edge value is attained by bands " + std::to_string(edge.band + 1) +
                      " and " + std::to_string(s + 1);
      return report;
    }
  }

  // grid local minima of the objective
  const TorusGrid& grid = bands.grid;
  std::vector<double> obj(grid.points());
  for (std::size_t i = 0; i < grid.points(); ++i) obj[i] = sign * bands.band(i, edge.band);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const std::vector<int> m = grid.multi_index(i);
    bool local_min = true;
    for (int a = 0; a < d && local_min; ++a) {
      for (int step : {-1, 1}) {
        std::vector<int> nb = m;
        nb[a] += step;
        if (obj[grid.linear(nb)] < obj[i]) {
          local_min = false;
          break;
        }
      }
    }
    if (local_min) candidates.push_back(i);
  }
  if (candidates.size() > std::max<std::size_t>(8, grid.points() / 8)) {
    report.verdict = Verdict::no;
    report.reason = "extremal set is not isolated on the sampling grid";
    return report;
  }

  struct Refined {
    std::vector<double> k;
    double value;
  };
  std::vector<Refined> refined;
  for (std::size_t c : candidates) {
    std::vector<double> center = grid.point(c);
    double best = g(center);
    double h = grid.step();
    int halvings = 0;
    for (int guard = 0; guard < 64 * (options.refinements + 1) && halvings < options.refinements;
         ++guard) {
      std::vector<double> best_k = center;
      const std::size_t stencil = static_cast<std::size_t>(std::pow(3, d));
      for (std::size_t s = 0; s < stencil; ++s) {
        std::size_t rest = s;
        std::vector<double> k = center;
        for (int a = 0; a < d; ++a) {
          k[a] += (static_cast<int>(rest % 3) - 1) * h;
          rest /= 3;
        }
        const double v = g(k);
        if (v < best) {
          best = v;
          best_k = k;
        }
      }
      if (best_k == center) {
        h /= 2.0;
        ++halvings;
      } else {
        center = best_k;
      }
    }
    // Newton polish where the local model is convex
    for (int it = 0; it < 6; ++it) {
      const Eigen::MatrixXd hess = fd_hessian(g, center, 1e-3);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
      if (es.eigenvalues().minCoeff() <= 1e-6 * std::max(1.0, es.eigenvalues().maxCoeff())) break;
      const Eigen::VectorXd delta = -hess.ldlt().solve(fd_gradient(g, center, 1e-3));
      if (delta.norm() > h + 1e-3) break;
      std::vector<double> next = center;
      for (int a = 0; a < d; ++a) next[a] += delta(a);
      const double v = g(next);
      if (v > best + 1e-15 * scale) break;
      center = next;
      best = v;
      if (delta.norm() < 1e-12) break;
    }
    refined.push_back({center, best});
  }

  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& r : refined) best_value = std::min(best_value, r.value);
  for (const auto& r : refined) {
    if (r.value > best_value + 1e-10 * scale) continue;
    bool duplicate = false;
    for (const auto& k : report.extremizers) {
      if (periodic_distance(k, r.k) < 1e-5) duplicate = true;
    }
    if (!duplicate) report.extremizers.push_back(r.k);
  }

  report.verdict = Verdict::yes;
  for (const auto& k : report.extremizers) {
    const HessianEstimate est = richardson_hessian(g, k);
    report.hessians.push_back(sign * est.value);
    if (!est.converged) {
      report.verdict = Verdict::inconclusive;
      report.reason = "Hessian estimates do not settle at " + format_point(k);
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est.value);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lo > 0.0) || lo < options.definiteness_tol * hi) {
      report.verdict = Verdict::no;
      report.reason = "Hessian at " + format_point(k) + " is not " +
                      (edge.is_maximum ? "negative" : "positive") + "-definite";
      return report;
    }
    // probe a small shell for a flat direction the Hessian missed
    const double r = 1e-3;
    const std::size_t stencil = static_cast<std::size_t>(std::pow(3, d));
    const double g0 = g(k);
    for (std::size_t s = 0; s < stencil; ++s) {
      std::size_t rest = s;
      std::vector<double> x(k.begin(), k.end());
      bool moved = false;
      for (int a = 0; a < d; ++a) {
        const int off = static_cast<int>(rest % 3) - 1;
        x[a] += off * r;
        moved = moved || off != 0;
        rest /= 3;
      }
      if (moved && g(x) - g0 <= 1e-12 * scale) {
        report.verdict = Verdict::no;
        report.reason = "extremum at " + format_point(k) + " is not isolated";
        return report;
      }
    }
  }
  if (report.verdict == Verdict::yes) {
    report.reason = std::to_string(report.extremizers.size()) + " nondegenerate extremizer(s)";
  }
  return report;
}

}  // namespace gapcount
