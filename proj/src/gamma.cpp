#include "gapcount/gamma.hpp"

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

const char* to_string(Sign sign) { return sign == Sign::plus ? "plus" : "minus"; }

Sign parse_sign(const std::string& text) {
  if (text == "plus" || text == "+") return Sign::plus;
  if (text == "minus" || text == "-") return Sign::minus;
  throw std::invalid_argument("sign must be 'plus' or 'minus', got '" + text + "'");
}

double signed_part_power(double x, Sign sign, double p) {
  const double part = sign == Sign::plus ? std::max(x, 0.0) : std::max(-x, 0.0);
  return part > 0.0 ? std::pow(part, -p) : 0.0;
}

namespace {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

int default_base_grid(int dim) {
  switch (dim) {
    case 1:
      return 64;
    case 2:
      return 32;
    case 3:
      return 16;
    default:
      return 8;
  }
}

/// Per-band Riemann sums of (lambda - E_s)^{-p}_{+-} on the uniform grid of size m.
std::vector<double> torus_sums(const BandSampler& sampler, const TorusGrid& grid, double lambda,
                               double p, Sign sign) {
  const int nu = sampler.nu();
  std::vector<double> slots(grid.points() * nu);
  parallel_for(grid.points(), [&](std::size_t i) {
    const std::vector<double> e = sampler(grid.point(i));
    for (int s = 0; s < nu; ++s) slots[i * nu + s] = signed_part_power(lambda - e[s], sign, p);
  });
  std::vector<double> sums(nu, 0.0);
  for (std::size_t i = 0; i < grid.points(); ++i) {
    for (int s = 0; s < nu; ++s) sums[s] += slots[i * nu + s];
  }
  for (double& s : sums) s *= grid.cell_volume();
  return sums;
}

}  // namespace

double sphere_integral(const AngularProfile& theta, double p, int dim, int resolution) {
  if (!(p > 0.0)) throw std::invalid_argument("sphere_integral: p must be > 0");
  auto power = [&](std::span<const double> u) { return std::pow(std::abs(theta(u)), p); };
  switch (dim) {
    case 1: {
      const double plus[1] = {1.0}, minus[1] = {-1.0};
      return power(plus) + power(minus);
    }
    case 2: {
      const int n = resolution > 0 ? resolution : 512;
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        const double phi = 2.0 * pi * i / n;
        const double u[2] = {std::cos(phi), std::sin(phi)};
        sum += power(u);
      }
      return sum * 2.0 * pi / n;
    }
    case 3: {
      const int n = resolution > 0 ? resolution : 64;
      const int n_phi = 2 * n;
      std::vector<double> nodes, weights;
      gauss_legendre(n, nodes, weights);
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        const double z = nodes[i];
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double ring = 0.0;
        for (int j = 0; j < n_phi; ++j) {
          const double phi = 2.0 * pi * j / n_phi;
          const double u[3] = {z, r * std::cos(phi), r * std::sin(phi)};
          ring += power(u);
        }
        sum += weights[i] * ring * 2.0 * pi / n_phi;
      }
      return sum;
    }
    default:
      throw std::invalid_argument("sphere_integral: supported dimensions are 1, 2 and 3");
  }
}

double combine_gamma(int dim, const std::vector<double>& torus_integrals, double sphere) {
  double total = 0.0;
  for (double t : torus_integrals) total += t;
  return total * sphere / (dim * std::pow(2.0 * pi, dim));
}

GammaResult gamma_coefficient(const BandSampler& sampler, const BandStructure& bands,
                              double lambda, double p, Sign sign, const AngularProfile& theta,
                              GammaOptions options) {
  if (!(p > 0.0)) throw std::invalid_argument("gamma_coefficient: p must be > 0");
  if (theta.inf() < 0.0) {
    throw std::invalid_argument("gamma_coefficient: angular profile must be nonnegative");
  }
  for (int s = 0; s < bands.nu; ++s) {
    const auto [lo, hi] = bands.extrema[s];
    const bool singular = sign == Sign::plus ? (lo < lambda && lambda <= hi)
                                             : (lo <= lambda && lambda < hi);
    if (singular) {
      std::ostringstream os;
      os << "gamma_coefficient: lambda = " << lambda << " meets band " << s + 1 << " [" << lo
         << ", " << hi << "] for sign " << to_string(sign)
         << "; use the edge evaluation for gap edges";
      throw std::invalid_argument(os.str());
    }
  }
  GammaResult result;
  result.lambda = lambda;
  result.p = p;
  result.sign = sign;
  const int dim = sampler.dim();
  const int base = options.base_grid > 0 ? options.base_grid : default_base_grid(dim);
  std::vector<std::vector<double>> ladder;
  for (int m : {base, 2 * base, 4 * base}) {
    result.grids.push_back(m);
    ladder.push_back(torus_sums(sampler, TorusGrid(dim, m), lambda, p, sign));
  }
  result.torus_integrals.resize(sampler.nu());
  for (int s = 0; s < sampler.nu(); ++s) {
    result.torus_integrals[s] = ladder[2][s] + (ladder[2][s] - ladder[1][s]) / 3.0;
  }
  result.sphere = sphere_integral(theta, p, dim);
  result.value = combine_gamma(dim, result.torus_integrals, result.sphere);
  return result;
}

void write_gamma_csv_header(std::ostream& out) {
  write_csv_row(out, {"lambda", "p", "sign", "gamma", "torus_sum", "sphere", "grid"});
}

void write_gamma_csv_row(std::ostream& out, const GammaResult& r) {
  double torus = 0.0;
  for (double t : r.torus_integrals) torus += t;
  write_csv_row(out, {format_real(r.lambda), format_real(r.p), to_string(r.sign),
                      format_real(r.value), format_real(torus), format_real(r.sphere),
                      r.grids.empty() ? "0" : std::to_string(r.grids.back())});
}

const char* to_string(Convergence c) {
  switch (c) {
    case Convergence::convergent:
      return "convergent";
    case Convergence::divergent:
      return "divergent";
    case Convergence::inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::vector<int> default_edge_ladder(int dim) {
  switch (dim) {
    case 1:
      return {1024, 2048, 4096, 8192};
    case 2:
      return {64, 128, 256, 512};
    case 3:
      return {16, 32, 64, 128};
    default:
      return {8, 16, 32};
  }
}

namespace {

Sign edge_sign(const GapEdge& edge) { return edge.is_maximum ? Sign::plus : Sign::minus; }

/// Values (Lambda - E_s(k))_{+-}^{-1} on the midpoint grid, point-major.
std::vector<double> edge_inverse_gaps(const BandSampler& sampler, const GapEdge& edge,
                                      const TorusGrid& grid) {
  const int nu = sampler.nu();
  const Sign sign = edge_sign(edge);
  std::vector<double> out(grid.points() * nu);
  parallel_for(grid.points(), [&](std::size_t i) {
    const std::vector<double> e = sampler(grid.point(i));
    for (int s = 0; s < nu; ++s) out[i * nu + s] = signed_part_power(edge.value - e[s], sign, 1.0);
  });
  return out;
}

}  // namespace

EdgeIntegralReport edge_integral(const BandSampler& sampler, const GapEdge& edge, double kappa,
                                 std::vector<int> ladder) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("edge_integral: kappa must be >= 0");
  if (ladder.empty()) ladder = default_edge_ladder(sampler.dim());
  EdgeIntegralReport report;
  report.edge = edge;
  report.kappa = kappa;
  const int nu = sampler.nu();
  for (int m : ladder) {
    const TorusGrid grid(sampler.dim(), m, /*midpoint=*/true);
    LadderStep step;
    step.grid = m;
    step.per_band.assign(nu, 0.0);
    if (kappa == 0.0) {
      // (x)^0 = 1 on the whole torus, whatever the band does
      for (double& v : step.per_band) v = std::pow(2.0 * pi, sampler.dim());
    } else {
      const std::vector<double> inv = edge_inverse_gaps(sampler, edge, grid);
      for (std::size_t i = 0; i < grid.points(); ++i) {
        for (int s = 0; s < nu; ++s) {
          const double v = inv[i * nu + s];
          if (v > 0.0) step.per_band[s] += std::pow(v, kappa);
        }
      }
      for (double& v : step.per_band) v *= grid.cell_volume();
    }
    for (double v : step.per_band) step.total += v;
    report.ladder.push_back(std::move(step));
  }
  const std::size_t n = report.ladder.size();
  if (n >= 2) {
    const double last = report.ladder[n - 1].total;
    const double prev = report.ladder[n - 2].total;
    report.growth = prev > 0.0 ? last / prev : (last > 0.0 ? std::numeric_limits<double>::infinity()
                                                           : 1.0);
    auto rel = [](double a, double b) {
      const double s = std::max(std::abs(a), std::abs(b));
      return s == 0.0 ? 0.0 : std::abs(a - b) / s;
    };
    const bool settled = n >= 3 && rel(last, prev) < 0.01 &&
                         rel(prev, report.ladder[n - 3].total) < 0.01;
    if (settled) {
      report.verdict = Convergence::convergent;
    } else if (report.growth >= 1.5) {
      report.verdict = Convergence::divergent;
    }
  }
  return report;
}

EdgeIntegralReport weak_edge_membership(const BandSampler& sampler, const GapEdge& edge, double p,
                                        std::vector<int> ladder) {
  if (!(p > 0.0)) throw std::invalid_argument("weak_edge_membership: p must be > 0");
  if (ladder.empty()) ladder = default_edge_ladder(sampler.dim());
  constexpr int kLevels = 40;
  constexpr std::size_t kMinCells = 64;
  EdgeIntegralReport report;
  report.edge = edge;
  report.kappa = p;
  const int nu = sampler.nu();
  double slope = 0.0;
  for (int m : ladder) {
    const TorusGrid grid(sampler.dim(), m, /*midpoint=*/true);
    const std::vector<double> inv = edge_inverse_gaps(sampler, edge, grid);
    LadderStep step;
    step.grid = m;
    step.per_band.assign(nu, 0.0);
    double worst_slope = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < nu; ++s) {
      std::vector<double> f(grid.points());
      for (std::size_t i = 0; i < grid.points(); ++i) f[i] = inv[i * nu + s];
      std::sort(f.begin(), f.end(), std::greater<>());
      const double s_max = f[std::min(kMinCells, f.size()) - 1];
      if (!(s_max > 1.0)) {
        // bounded by 1 away from a handful of cells: nothing to resolve
        step.per_band[s] = 0.0;
        worst_slope = std::max(worst_slope, 0.0);
        continue;
      }
      std::vector<double> levels(kLevels), products(kLevels);
      for (int l = 0; l < kLevels; ++l) {
        levels[l] = std::exp(std::log(s_max) * l / (kLevels - 1));
        // f sorted descending: count of values > level
        const auto count = static_cast<double>(
            std::upper_bound(f.begin(), f.end(), levels[l], std::greater<>()) - f.begin());
        products[l] = levels[l] * std::pow(count * grid.cell_volume(), 1.0 / p);
      }
      step.per_band[s] = *std::max_element(products.begin(), products.end());
      // least-squares slope of log(product) against log(level) over the upper half
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int used = 0;
      for (int l = kLevels / 2; l < kLevels; ++l) {
        if (!(products[l] > 0.0)) continue;
        const double x = std::log(levels[l]), y = std::log(products[l]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++used;
      }
      const double denom = used * sxx - sx * sx;
      const double band_slope = used >= 2 && denom > 0 ? (used * sxy - sx * sy) / denom : 0.0;
      worst_slope = std::max(worst_slope, band_slope);
    }
    step.weak_sup = *std::max_element(step.per_band.begin(), step.per_band.end());
    step.total = step.weak_sup;
    slope = worst_slope;
    report.ladder.push_back(std::move(step));
  }
  const std::size_t n = report.ladder.size();
  report.weak_sup = report.ladder.back().weak_sup;
  report.weak_slope = slope;
  const double last = report.ladder[n - 1].weak_sup;
  const double prev = n >= 2 ? report.ladder[n - 2].weak_sup : last;
  report.growth = prev > 0.0 ? last / prev : 1.0;
  if (slope <= 0.15 && report.growth < 1.10 && report.growth > 1.0 / 1.10) {
    report.verdict = Convergence::convergent;
  } else if (slope > 0.25 || report.growth > 1.25) {
    report.verdict = Convergence::divergent;
  }
  return report;
}

EdgeGamma gamma_at_edge(const BandSampler& sampler, const GapEdge& edge, double p,
                        const AngularProfile& theta, double kappa, std::vector<int> ladder) {
  if (theta.inf() < 0.0) {
    throw std::invalid_argument("gamma_at_edge: angular profile must be nonnegative");
  }
  EdgeGamma out;
  out.condition = edge_integral(sampler, edge, kappa, ladder);
  if (out.condition.verdict != Convergence::convergent) return out;
  const EdgeIntegralReport at_p = edge_integral(sampler, edge, p, ladder);
  GammaResult r;
  r.lambda = edge.value;
  r.p = p;
  r.sign = edge_sign(edge);
  r.torus_integrals = at_p.ladder.back().per_band;
  for (const auto& step : at_p.ladder) r.grids.push_back(step.grid);
  r.sphere = sphere_integral(theta, p, sampler.dim());
  r.value = combine_gamma(sampler.dim(), r.torus_integrals, r.sphere);
  out.value = r;
  return out;
}

}  // namespace gapcount
