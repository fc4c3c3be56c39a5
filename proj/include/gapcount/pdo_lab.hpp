#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gapcount/angular_profile.hpp"
#include "gapcount/periodic_graph.hpp"
#include "gapcount/weak_lp.hpp"

namespace gapcount {

using Complex = std::complex<double>;

/// Trigonometric polynomial sum_t c_t e^{i t.k}.
struct TrigPolynomial {
  std::vector<std::pair<Cell, Complex>> terms;
};

/// Complex function on the torus [-pi, pi]^d.
///
/// Presets (parse):
///   const:<c>                    constant c
///   exp:<t_1>,...,<t_d>          e^{i t.k}
///   trig:<re>,<im>@<t_1>,..;...  trigonometric polynomial, one term per ';'
///   half:<axis>                  indicator of k_axis in [0, pi] (axis is 1-based)
///   table:<path>                 rows "k_1 .. k_d re im", nearest-sample lookup
class TorusFunction {
 public:
  TorusFunction(std::string name, int dim, std::function<Complex(std::span<const double>)> fn,
                std::optional<TrigPolynomial> poly = std::nullopt);

  static TorusFunction constant(int dim, Complex c);
  static TorusFunction polynomial(int dim, TrigPolynomial poly);
  static TorusFunction half_indicator(int dim, int axis);
  static TorusFunction parse(std::string_view spec, int dim);

  Complex operator()(std::span<const double> k) const { return fn_(k); }
  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  const std::optional<TrigPolynomial>& polynomial_form() const { return poly_; }

 private:
  std::string name_;
  int dim_;
  std::function<Complex(std::span<const double>)> fn_;
  std::optional<TrigPolynomial> poly_;
};

/// Lattice symbol W(n) on the box |n|_inf <= L.
class LatticeSymbol {
 public:
  /// W(n) = v(n/|n|) |n|^{-d/p}, W(0) = 0.
  static LatticeSymbol homogeneous(int dim, const AngularProfile& v, double p);
  /// Arbitrary values; lattice points not listed are zero.
  static LatticeSymbol table(int dim, std::map<Cell, Complex> values);
  /// W(n) = fn(n) for an arbitrary closed form.
  static LatticeSymbol function(int dim, std::function<Complex(std::span<const int>)> fn);

  Complex operator()(std::span<const int> n) const { return fn_(n); }
  int dim() const { return dim_; }

 private:
  int dim_ = 1;
  std::function<Complex(std::span<const int>)> fn_;
};

/// Lattice points of the box |n|_inf <= L in BoxIndex order.
std::vector<Cell> lattice_box(int dim, int radius);

/// c_r = (2 pi)^{-d} int |h(k)|^2 e^{-i r.k} dk for |r|_inf <= max_lag, by the
/// M-point-per-axis rectangle rule. Requires max_lag <= M/4.
class ModSquareCoefficients {
 public:
  ModSquareCoefficients(const TorusFunction& h, int grid, int max_lag);

  Complex operator()(std::span<const int> r) const;
  int max_lag() const { return max_lag_; }

 private:
  int dim_;
  int max_lag_;
  std::vector<Complex> coeffs_;
};

ModSquareCoefficients fourier_modsq_coeffs(const TorusFunction& h, int grid, int max_lag);

struct SymbolTriple {
  TorusFunction f;
  TorusFunction g;
  LatticeSymbol w;
  double p = 1.0;
  int radius = 0;  // L
  int grid = 0;    // M; 0 selects max(8 L, 16)
};

struct SingularValueReport {
  WeightedSequence svalues;
  int radius = 0;
  int grid = 0;
  std::size_t support = 0;  // #{n : W(n) != 0} in the box
  std::optional<double> cwikel_ratio;
  std::optional<DpWindowEstimate> dp_empirical;
  std::optional<double> formula_value;
};

/// s-values of the finite section of f Phi W Phi^* g, from the eigenvalues of
/// (BB^*)^{1/2} (A^*A) (BB^*)^{1/2} on the support of W, where
/// (A^*A)_{nm} = c^f_{n-m} and (BB^*)_{nm} = W(n) c^g_{n-m} conj(W(m)).
SingularValueReport pdo_singular_values(const SymbolTriple& triple);

/// s-values of the finite section of f Phi W (Gram conj(W(n)) c^f_{n-m} W(m)).
WeightedSequence multiplier_singular_values(const TorusFunction& f, const LatticeSymbol& w,
                                            int radius, int grid);

/// (int_T |f|^q dk)^{1/q} by the rectangle rule.
double torus_lq_norm(const TorusFunction& f, double q, int grid);

/// Weak quasinorm of the f Phi W section over ||f||_{L_q} ||W||_{l_{p,inf}}.
/// (p, q) must satisfy q = p for p > 2, q = 2 for p < 2, q > 2 for p = 2.
double cwikel_ratio(const TorusFunction& f, const LatticeSymbol& w, double p, double q, int radius,
                    int grid = 0);

struct DpComparison {
  SingularValueReport report;
  DpWindowEstimate empirical;
  double formula = 0.0;
};

/// Right-hand side (d (2 pi)^d)^{-1} int_T |f|^p |g|^p dk int_S |v|^p dS.
double dp_formula(const TorusFunction& f, const AngularProfile& v, const TorusFunction& g,
                  double p, int grid);

/// Empirical s^p n(s) window estimate of the section next to the formula value.
/// A zero window selects the default rank-fraction window.
DpComparison dp_vs_formula(const TorusFunction& f, const AngularProfile& v, const TorusFunction& g,
                           double p, int radius, int grid = 0, double s_lo = 0.0,
                           double s_hi = 0.0);

struct CommutatorReport {
  WeightedSequence svalues;
  std::vector<double> scaled;  // m^{1/p} s_m, m = 1..rank
};

/// s-values of the section of f Phi W Phi^* - Phi W Phi^* f for a trigonometric
/// polynomial f = sum_t c_t e^{i t.k}: the lattice operator
/// u(n) -> sum_t c_t (W(n - t) - W(n)) u(n - t), truncated to the box.
/// Throws for f without a polynomial form.
CommutatorReport commutator_decay(const TorusFunction& f, const LatticeSymbol& w, double p,
                                  int radius);

void write_svalue_csv(std::ostream& out, const WeightedSequence& s, double p);

struct DpSummaryRow {
  int radius = 0;
  int grid = 0;
  double dp_sup = 0.0;
  double dp_inf = 0.0;
  double formula = 0.0;
};

void write_dp_summary_csv(std::ostream& out, const std::vector<DpSummaryRow>& rows);

}  // namespace gapcount
