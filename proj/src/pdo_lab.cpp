#include "gapcount/pdo_lab.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gapcount/csv.hpp"
#include "gapcount/gamma.hpp"
#include "gapcount/parallel.hpp"

namespace gapcount {

namespace {

constexpr double kPi = std::numbers::pi;

double parse_number(std::string_view text, std::string_view what) {
  std::string s(text);
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": not a number: '" + s + "'");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size()) {
    throw std::invalid_argument(std::string(what) + ": trailing characters in '" + s + "'");
  }
  return x;
}

int parse_int(std::string_view text, std::string_view what) {
  double x = parse_number(text, what);
  if (x != std::round(x)) {
    throw std::invalid_argument(std::string(what) + ": expected an integer, got '" +
                                std::string(text) + "'");
  }
  return static_cast<int>(x);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Complex parse_complex(std::string_view text, std::string_view what) {
  auto parts = split(text, ',');
  if (parts.size() == 1) return {parse_number(parts[0], what), 0.0};
  if (parts.size() == 2) return {parse_number(parts[0], what), parse_number(parts[1], what)};
  throw std::invalid_argument(std::string(what) + ": expected <re> or <re>,<im>");
}

Cell parse_cell(std::string_view text, int dim, std::string_view what) {
  auto parts = split(text, ',');
  if (static_cast<int>(parts.size()) != dim) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(dim) +
                                " lag components, got '" + std::string(text) + "'");
  }
  Cell t;
  for (auto part : parts) t.push_back(parse_int(part, what));
  return t;
}

Complex eval_poly(const TrigPolynomial& poly, std::span<const double> k) {
  Complex sum = 0.0;
  for (const auto& [t, c] : poly.terms) {
    double phase = 0.0;
    for (std::size_t a = 0; a < t.size(); ++a) phase += t[a] * k[a];
    sum += c * Complex(std::cos(phase), std::sin(phase));
  }
  return sum;
}

// Torus grid point k_m = -pi + 2 pi m / M along every axis, m in BoxIndex-like order.
void grid_point(std::size_t linear, int dim, int grid, std::vector<double>& k) {
  k.resize(dim);
  for (int a = dim - 1; a >= 0; --a) {
    int m = static_cast<int>(linear % grid);
    linear /= grid;
    k[a] = -kPi + 2.0 * kPi * m / grid;
  }
}

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

int default_grid(int radius) { return std::max(8 * radius, 16); }

void check_dims(int dim, const TorusFunction& f, const LatticeSymbol& w) {
  if (f.dim() != dim || w.dim() != dim) {
    throw std::invalid_argument("pdo: torus and lattice symbols disagree on dimension");
  }
}

struct Support {
  std::vector<Cell> cells;
  std::vector<Complex> w;
};

Support symbol_support(const LatticeSymbol& w, int radius) {
  Support s;
  for (auto& n : lattice_box(w.dim(), radius)) {
    Complex v = w(n);
    if (v != Complex(0.0)) {
      s.cells.push_back(n);
      s.w.push_back(v);
    }
  }
  return s;
}

// M(i, j) = left(i) c_{n_i - n_j} right(j) on the support.
Eigen::MatrixXcd toeplitz_gram(const Support& s, const ModSquareCoefficients& c,
                               const std::vector<Complex>& left,
                               const std::vector<Complex>& right) {
  const std::size_t n = s.cells.size();
  const int dim = s.cells.empty() ? 0 : static_cast<int>(s.cells[0].size());
  Eigen::MatrixXcd g(n, n);
  parallel_for(n, [&](std::size_t i) {
    Cell r(dim);
    for (std::size_t j = 0; j < n; ++j) {
      for (int a = 0; a < dim; ++a) r[a] = s.cells[i][a] - s.cells[j][a];
      g(i, j) = left[i] * c(r) * right[j];
    }
  });
  return g;
}

Eigen::VectorXd psd_eigenvalues(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("pdo: eigensolver failed");
  return es.eigenvalues();
}

WeightedSequence svalues_from_gram_eigs(const Eigen::VectorXd& eigs) {
  double top = eigs.size() ? std::max(std::abs(eigs.maxCoeff()), std::abs(eigs.minCoeff())) : 0.0;
  double floor = 1e-13 * top;
  std::vector<double> s(eigs.size());
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    s[i] = eigs[i] > floor ? std::sqrt(eigs[i]) : 0.0;
  }
  return WeightedSequence(std::move(s));
}

}  // namespace

TorusFunction::TorusFunction(std::string name, int dim,
                             std::function<Complex(std::span<const double>)> fn,
                             std::optional<TrigPolynomial> poly)
    : name_(std::move(name)), dim_(dim), fn_(std::move(fn)), poly_(std::move(poly)) {
  if (dim_ < 1) throw std::invalid_argument("TorusFunction: dimension must be >= 1");
}

TorusFunction TorusFunction::constant(int dim, Complex c) {
  TrigPolynomial poly;
  poly.terms.push_back({Cell(dim, 0), c});
  std::ostringstream name;
  name << "const:" << c.real();
  if (c.imag() != 0.0) name << "," << c.imag();
  return TorusFunction(
      name.str(), dim, [c](std::span<const double>) { return c; }, poly);
}

TorusFunction TorusFunction::polynomial(int dim, TrigPolynomial poly) {
  for (const auto& [t, c] : poly.terms) {
    if (static_cast<int>(t.size()) != dim) {
      throw std::invalid_argument("TorusFunction: lag of wrong dimension");
    }
  }
  return TorusFunction(
      "trig", dim, [poly](std::span<const double> k) { return eval_poly(poly, k); }, poly);
}

TorusFunction TorusFunction::half_indicator(int dim, int axis) {
  if (axis < 1 || axis > dim) {
    throw std::invalid_argument("half: axis must be in 1.." + std::to_string(dim));
  }
  int a = axis - 1;
  return TorusFunction("half:" + std::to_string(axis), dim, [a](std::span<const double> k) {
    return Complex(k[a] >= 0.0 && k[a] <= kPi ? 1.0 : 0.0);
  });
}

TorusFunction TorusFunction::parse(std::string_view spec, int dim) {
  auto colon = spec.find(':');
  std::string_view kind = spec.substr(0, colon);
  std::string_view arg = colon == std::string_view::npos ? "" : spec.substr(colon + 1);
  if (kind == "const") return constant(dim, parse_complex(arg, "const"));
  if (kind == "exp") {
    TrigPolynomial poly;
    poly.terms.push_back({parse_cell(arg, dim, "exp"), Complex(1.0)});
    auto f = polynomial(dim, std::move(poly));
    return TorusFunction(std::string(spec), dim, [f](std::span<const double> k) { return f(k); },
                         f.polynomial_form());
  }
  if (kind == "trig") {
    TrigPolynomial poly;
    for (auto term : split(arg, ';')) {
      auto at = term.find('@');
      if (at == std::string_view::npos) {
        throw std::invalid_argument("trig: term '" + std::string(term) +
                                    "' lacks '@<lag>'");
      }
      poly.terms.push_back(
          {parse_cell(term.substr(at + 1), dim, "trig"), parse_complex(term.substr(0, at), "trig")});
    }
    auto f = polynomial(dim, std::move(poly));
    return TorusFunction(std::string(spec), dim, [f](std::span<const double> k) { return f(k); },
                         f.polynomial_form());
  }
  if (kind == "half") return half_indicator(dim, parse_int(arg, "half"));
  if (kind == "table") {
    std::ifstream in{std::string(arg)};
    if (!in) throw std::invalid_argument("table: cannot open '" + std::string(arg) + "'");
    auto pts = std::make_shared<std::vector<std::vector<double>>>();
    auto vals = std::make_shared<std::vector<Complex>>();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream row(line);
      std::vector<double> xs;
      double x;
      while (row >> x) xs.push_back(x);
      if (!row.eof()) {
        throw std::invalid_argument(std::string(arg) + ":" + std::to_string(lineno) +
                                    ": not a number");
      }
      if (xs.empty()) continue;
      if (static_cast<int>(xs.size()) != dim + 2) {
        throw std::invalid_argument(std::string(arg) + ":" + std::to_string(lineno) +
                                    ": expected " + std::to_string(dim + 2) + " columns");
      }
      vals->push_back({xs[dim], xs[dim + 1]});
      xs.resize(dim);
      pts->push_back(std::move(xs));
    }
    if (pts->empty()) throw std::invalid_argument("table: '" + std::string(arg) + "' is empty");
    return TorusFunction(std::string(spec), dim, [pts, vals](std::span<const double> k) {
      std::size_t best = 0;
      double best_d = INFINITY;
      for (std::size_t i = 0; i < pts->size(); ++i) {
        double d2 = 0.0;
        for (std::size_t a = 0; a < k.size(); ++a) {
          double diff = std::remainder(k[a] - (*pts)[i][a], 2.0 * kPi);
          d2 += diff * diff;
        }
        if (d2 < best_d) {
          best_d = d2;
          best = i;
        }
      }
      return (*vals)[best];
    });
  }
  throw std::invalid_argument("unknown torus function preset '" + std::string(spec) +
                              "' (expected const:, exp:, trig:, half:, table:)");
}

LatticeSymbol LatticeSymbol::homogeneous(int dim, const AngularProfile& v, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("homogeneous symbol: p must be > 0");
  double power = -static_cast<double>(dim) / p;
  return function(dim, [v, power](std::span<const int> n) {
    double r2 = 0.0;
    for (int x : n) r2 += static_cast<double>(x) * x;
    if (r2 == 0.0) return Complex(0.0);
    double r = std::sqrt(r2);
    std::vector<double> dir(n.size());
    for (std::size_t a = 0; a < n.size(); ++a) dir[a] = n[a] / r;
    return Complex(v(dir) * std::pow(r, power));
  });
}

LatticeSymbol LatticeSymbol::table(int dim, std::map<Cell, Complex> values) {
  for (const auto& [n, _] : values) {
    if (static_cast<int>(n.size()) != dim) {
      throw std::invalid_argument("lattice table: point of wrong dimension");
    }
  }
  auto shared = std::make_shared<const std::map<Cell, Complex>>(std::move(values));
  return function(dim, [shared](std::span<const int> n) {
    auto it = shared->find(Cell(n.begin(), n.end()));
    return it == shared->end() ? Complex(0.0) : it->second;
  });
}

LatticeSymbol LatticeSymbol::function(int dim, std::function<Complex(std::span<const int>)> fn) {
  if (dim < 1) throw std::invalid_argument("LatticeSymbol: dimension must be >= 1");
  LatticeSymbol s;
  s.dim_ = dim;
  s.fn_ = std::move(fn);
  return s;
}

std::vector<Cell> lattice_box(int dim, int radius) {
  BoxIndex index(dim, 1, radius);
  std::vector<Cell> cells;
  cells.reserve(index.size());
  for (std::size_t row = 0; row < index.size(); ++row) cells.push_back(index.cell_of(row));
  return cells;
}

ModSquareCoefficients::ModSquareCoefficients(const TorusFunction& h, int grid, int max_lag)
    : dim_(h.dim()), max_lag_(max_lag) {
  if (grid < 4) throw std::invalid_argument("fourier_modsq_coeffs: grid must be >= 4");
  if (max_lag < 0 || 4 * max_lag > grid) {
    throw std::invalid_argument("fourier_modsq_coeffs: max_lag " + std::to_string(max_lag) +
                                " exceeds the aliasing margin M/4 = " + std::to_string(grid / 4));
  }
  const std::size_t total = ipow(grid, dim_);
  std::vector<Complex> data(total);
  parallel_for(total, [&](std::size_t i) {
    std::vector<double> k;
    grid_point(i, dim_, grid, k);
    data[i] = std::norm(h(k));
  });

  const int lags = 2 * max_lag + 1;
  // phase(r, m) = e^{-i (r - L) k_m} / M
  std::vector<Complex> phase(static_cast<std::size_t>(lags) * grid);
  for (int r = 0; r < lags; ++r) {
    for (int m = 0; m < grid; ++m) {
      double k = -kPi + 2.0 * kPi * m / grid;
      double arg = -static_cast<double>(r - max_lag) * k;
      phase[static_cast<std::size_t>(r) * grid + m] = Complex(std::cos(arg), std::sin(arg)) / double(grid);
    }
  }

  std::vector<std::size_t> shape(dim_, grid);
  for (int axis = 0; axis < dim_; ++axis) {
    std::size_t outer = 1, inner = 1;
    for (int a = 0; a < axis; ++a) outer *= shape[a];
    for (int a = axis + 1; a < dim_; ++a) inner *= shape[a];
    std::vector<Complex> next(outer * lags * inner);
    parallel_for(outer, [&](std::size_t o) {
      for (int r = 0; r < lags; ++r) {
        const Complex* ph = &phase[static_cast<std::size_t>(r) * grid];
        for (std::size_t i = 0; i < inner; ++i) {
          Complex sum = 0.0;
          for (int m = 0; m < grid; ++m) sum += data[(o * grid + m) * inner + i] * ph[m];
          next[(o * lags + r) * inner + i] = sum;
        }
      }
    });
    data = std::move(next);
    shape[axis] = lags;
  }
  coeffs_ = std::move(data);
}

Complex ModSquareCoefficients::operator()(std::span<const int> r) const {
  std::size_t idx = 0;
  const int lags = 2 * max_lag_ + 1;
  for (int a = 0; a < dim_; ++a) {
    if (std::abs(r[a]) > max_lag_) {
      throw std::out_of_range("fourier_modsq_coeffs: lag beyond computed range");
    }
    idx = idx * lags + (r[a] + max_lag_);
  }
  return coeffs_[idx];
}

ModSquareCoefficients fourier_modsq_coeffs(const TorusFunction& h, int grid, int max_lag) {
  return ModSquareCoefficients(h, grid, max_lag);
}

SingularValueReport pdo_singular_values(const SymbolTriple& triple) {
  const int dim = triple.w.dim();
  check_dims(dim, triple.f, triple.w);
  check_dims(dim, triple.g, triple.w);
  if (triple.radius < 0) throw std::invalid_argument("pdo: radius must be >= 0");
  const int grid = triple.grid > 0 ? triple.grid : default_grid(triple.radius);

  SingularValueReport report;
  report.radius = triple.radius;
  report.grid = grid;
  Support s = symbol_support(triple.w, triple.radius);
  report.support = s.cells.size();
  if (s.cells.empty()) return report;

  ModSquareCoefficients cf(triple.f, grid, 2 * triple.radius);
  ModSquareCoefficients cg(triple.g, grid, 2 * triple.radius);
  std::vector<Complex> ones(s.cells.size(), 1.0);
  std::vector<Complex> wbar(s.w.size());
  std::transform(s.w.begin(), s.w.end(), wbar.begin(), [](Complex z) { return std::conj(z); });

  Eigen::MatrixXcd a = toeplitz_gram(s, cf, ones, ones);
  Eigen::MatrixXcd b = toeplitz_gram(s, cg, s.w, wbar);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (b + b.adjoint()));
  if (es.info() != Eigen::Success) throw std::runtime_error("pdo: eigensolver failed");
  Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXcd r = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();

  report.svalues = svalues_from_gram_eigs(psd_eigenvalues(r * a * r));
  return report;
}

WeightedSequence multiplier_singular_values(const TorusFunction& f, const LatticeSymbol& w,
                                            int radius, int grid) {
  check_dims(w.dim(), f, w);
  if (grid <= 0) grid = default_grid(radius);
  Support s = symbol_support(w, radius);
  if (s.cells.empty()) return {};
  ModSquareCoefficients cf(f, grid, 2 * radius);
  std::vector<Complex> wbar(s.w.size());
  std::transform(s.w.begin(), s.w.end(), wbar.begin(), [](Complex z) { return std::conj(z); });
  return svalues_from_gram_eigs(psd_eigenvalues(toeplitz_gram(s, cf, wbar, s.w)));
}

double torus_lq_norm(const TorusFunction& f, double q, int grid) {
  if (!(q > 0.0)) throw std::invalid_argument("torus_lq_norm: q must be > 0");
  const int dim = f.dim();
  const std::size_t total = ipow(grid, dim);
  std::vector<double> vals(total);
  parallel_for(total, [&](std::size_t i) {
    std::vector<double> k;
    grid_point(i, dim, grid, k);
    vals[i] = std::pow(std::abs(f(k)), q);
  });
  double sum = 0.0;
  for (double v : vals) sum += v;
  return std::pow(sum * std::pow(2.0 * kPi / grid, dim), 1.0 / q);
}

double cwikel_ratio(const TorusFunction& f, const LatticeSymbol& w, double p, double q, int radius,
                    int grid) {
  bool ok = (p > 2.0 && q == p) || (p > 0.0 && p < 2.0 && q == 2.0) || (p == 2.0 && q > 2.0);
  if (!ok) {
    std::ostringstream msg;
    msg << "cwikel_ratio: (p, q) = (" << p << ", " << q
        << ") outside the admissible regimes (q = p for p > 2, q = 2 for p < 2, q > 2 for p = 2)";
    throw std::invalid_argument(msg.str());
  }
  if (grid <= 0) grid = default_grid(radius);
  std::vector<double> wabs;
  for (auto& n : lattice_box(w.dim(), radius)) wabs.push_back(std::abs(w(n)));
  double w_norm = weak_quasinorm(WeightedSequence(std::move(wabs)), p);
  double f_norm = torus_lq_norm(f, q, grid);
  if (w_norm == 0.0 || f_norm == 0.0) {
    throw std::invalid_argument("cwikel_ratio: zero symbol makes the ratio undefined");
  }
  double top = weak_quasinorm(multiplier_singular_values(f, w, radius, grid), p);
  return top / (f_norm * w_norm);
}

double dp_formula(const TorusFunction& f, const AngularProfile& v, const TorusFunction& g,
                  double p, int grid) {
  if (f.dim() != g.dim()) throw std::invalid_argument("dp_formula: f and g dimensions differ");
  const int dim = f.dim();
  const std::size_t total = ipow(grid, dim);
  std::vector<double> vals(total);
  parallel_for(total, [&](std::size_t i) {
    std::vector<double> k;
    grid_point(i, dim, grid, k);
    vals[i] = std::pow(std::abs(f(k)) * std::abs(g(k)), p);
  });
  double torus = 0.0;
  for (double x : vals) torus += x;
  torus *= std::pow(2.0 * kPi / grid, dim);
  // sphere_integral takes |v|^p itself
  double sphere = sphere_integral(v, p, dim);
  return torus * sphere / (dim * std::pow(2.0 * kPi, dim));
}

DpComparison dp_vs_formula(const TorusFunction& f, const AngularProfile& v, const TorusFunction& g,
                           double p, int radius, int grid, double s_lo, double s_hi) {
  const int dim = f.dim();
  SymbolTriple triple{f, g, LatticeSymbol::homogeneous(dim, v, p), p, radius, grid};
  DpComparison out;
  out.report = pdo_singular_values(triple);
  out.empirical = (s_lo == 0.0 && s_hi == 0.0) ? dp_window_default(out.report.svalues, p)
                                               : dp_window(out.report.svalues, p, s_lo, s_hi);
  out.formula = dp_formula(f, v, g, p, out.report.grid);
  out.report.dp_empirical = out.empirical;
  out.report.formula_value = out.formula;
  return out;
}

CommutatorReport commutator_decay(const TorusFunction& f, const LatticeSymbol& w, double p,
                                  int radius) {
  check_dims(w.dim(), f, w);
  if (!(p > 0.0)) throw std::invalid_argument("commutator_decay: p must be > 0");
  const auto& poly = f.polynomial_form();
  if (!poly) {
    throw std::invalid_argument("commutator_decay: '" + f.name() +
                                "' is not a trigonometric polynomial");
  }
  const int dim = w.dim();
  BoxIndex index(dim, 1, radius);
  const std::size_t n = index.size();
  std::vector<Complex> wv(n);
  for (std::size_t i = 0; i < n; ++i) wv[i] = w(index.cell_of(i));

  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n, n);
  parallel_for(n, [&](std::size_t i) {
    Cell cell = index.cell_of(i);
    Cell src(dim);
    for (const auto& [t, coeff] : poly->terms) {
      for (int a = 0; a < dim; ++a) src[a] = cell[a] - t[a];
      if (!index.contains(src)) continue;
      std::size_t j = index.row(0, src);
      c(i, j) += coeff * (wv[j] - wv[i]);
    }
  });

  CommutatorReport report;
  if (c.cwiseAbs().maxCoeff() == 0.0) {
    report.svalues = WeightedSequence(std::vector<double>(n, 0.0));
  } else {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(c);
    Eigen::VectorXd sv = svd.singularValues();
    report.svalues = WeightedSequence(std::vector<double>(sv.data(), sv.data() + sv.size()));
  }
  report.scaled.resize(report.svalues.size());
  for (std::size_t m = 1; m <= report.svalues.size(); ++m) {
    report.scaled[m - 1] = std::pow(static_cast<double>(m), 1.0 / p) * report.svalues[m - 1];
  }
  return report;
}

void write_svalue_csv(std::ostream& out, const WeightedSequence& s, double p) {
  out << "m,s_m,m^{1/p}s_m\n";
  for (std::size_t m = 1; m <= s.size(); ++m) {
    write_csv_row(out, {std::to_string(m), format_real(s[m - 1]),
                        format_real(std::pow(static_cast<double>(m), 1.0 / p) * s[m - 1])});
  }
}

void write_dp_summary_csv(std::ostream& out, const std::vector<DpSummaryRow>& rows) {
  out << "L,M,dp_sup,dp_inf,formula\n";
  for (const auto& r : rows) {
    write_csv_row(out, {std::to_string(r.radius), std::to_string(r.grid), format_real(r.dp_sup),
                        format_real(r.dp_inf), format_real(r.formula)});
  }
}

}  // namespace gapcount
