#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gapcount/angular_profile.hpp"
#include "gapcount/floquet.hpp"

namespace gapcount {

/// Sign of the perturbation H +- tV.
enum class Sign { plus, minus };

const char* to_string(Sign sign);
Sign parse_sign(const std::string& text);

/// (x)_+^{-p} or (x)_-^{-p}, zero where the corresponding part vanishes.
double signed_part_power(double x, Sign sign, double p);

/// Integral of |theta|^p over S^{d-1}, d in {1, 2, 3}. `resolution` 0 picks
/// the default (512 angles on the circle; 64 Gauss nodes x 128 azimuths on S^2).
double sphere_integral(const AngularProfile& theta, double p, int dim, int resolution = 0);

struct GammaResult {
  double lambda = 0.0;
  double p = 0.0;
  Sign sign = Sign::minus;
  std::vector<double> torus_integrals;  // per band
  double sphere = 0.0;
  double value = 0.0;
  std::vector<int> grids;
};

struct GammaOptions {
  /// First grid of the doubling ladder; 0 selects a dimension-dependent default.
  int base_grid = 0;
};

/// Asymptotic coefficient
///   (d (2 pi)^d)^{-1} sum_s int_T (lambda - E_s(k))_{+-}^{-p} dk * int_S theta^p dS
/// for lambda off the spectrum. Rejects lambda where the integrand is singular on
/// a band for the requested sign.
GammaResult gamma_coefficient(const BandSampler& sampler, const BandStructure& bands,
                              double lambda, double p, Sign sign, const AngularProfile& theta,
                              GammaOptions options = {});

/// Combines per-band torus integrals with the sphere factor.
double combine_gamma(int dim, const std::vector<double>& torus_integrals, double sphere);

void write_gamma_csv_header(std::ostream& out);
void write_gamma_csv_row(std::ostream& out, const GammaResult& result);

enum class Convergence { convergent, divergent, inconclusive };
const char* to_string(Convergence c);

struct LadderStep {
  int grid = 0;
  std::vector<double> per_band;
  double total = 0.0;
  double weak_sup = 0.0;  // filled by weak_edge_membership
};

struct EdgeIntegralReport {
  GapEdge edge;
  double kappa = 0.0;  // integrability exponent (or p for the weak check)
  std::vector<LadderStep> ladder;
  Convergence verdict = Convergence::inconclusive;
  /// Ratio of the last two ladder totals (growth factor per grid doubling).
  double growth = 0.0;
  /// Weak-class checks only: sup_s s * mes{(Lambda - E)^{-1} > s}^{1/p} on the
  /// finest grid, and the log-log slope of that product over the upper s range.
  std::optional<double> weak_sup;
  std::optional<double> weak_slope;
};

/// Default doubling ladder of grid sizes for edge integrals in dimension d.
std::vector<int> default_edge_ladder(int dim);

/// Integrals of (Lambda - E_s)_{+-}^{-kappa} over the torus (midpoint grids, so
/// extremizers on the band grid are never sampled). Convergent when the last two
/// refinements change the total by less than 1%; divergent when the last doubling
/// grows it by 50% or more.
EdgeIntegralReport edge_integral(const BandSampler& sampler, const GapEdge& edge, double kappa,
                                 std::vector<int> ladder = {});

/// Weak L_{p,inf}(T^d) membership of (Lambda - E_s)_{+-}^{-1} by level-set counting
/// over 40 log-spaced levels in [1, s_max], where s_max is the level whose
/// superlevel set still covers 64 grid cells.
EdgeIntegralReport weak_edge_membership(const BandSampler& sampler, const GapEdge& edge, double p,
                                        std::vector<int> ladder = {});

struct EdgeGamma {
  EdgeIntegralReport condition;  // integrability with exponent kappa
  std::optional<GammaResult> value;
};

/// Gamma at a gap edge, reported only when the integrability condition with
/// exponent `kappa` is convergent on the ladder.
EdgeGamma gamma_at_edge(const BandSampler& sampler, const GapEdge& edge, double p,
                        const AngularProfile& theta, double kappa, std::vector<int> ladder = {});

}  // namespace gapcount
