#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gapcount/pdo_lab.hpp"
#include "oracles.hpp"

using namespace gapcount;
using std::numbers::pi;

namespace {

LatticeSymbol inverse_distance() {
  return LatticeSymbol::homogeneous(1, AngularProfile::constant(1.0), 1.0);
}

double max_rel_diff(const std::vector<double>& a, std::span<const double> b) {
  double top = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) top = std::max(top, b[i]);
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
    diff = std::max(diff, std::abs(a[i] - b[i]));
  return diff / top;
}

}  // namespace

TEST(TorusFunctionParse, Presets) {
  std::vector<double> k{0.3};
  EXPECT_EQ(TorusFunction::parse("const:2", 1)(k), Complex(2.0));
  EXPECT_EQ(TorusFunction::parse("const:1,-1", 1)(k), Complex(1.0, -1.0));
  EXPECT_NEAR(std::abs(TorusFunction::parse("exp:1", 1)(k) - std::polar(1.0, 0.3)), 0.0, 1e-15);
  auto t = TorusFunction::parse("trig:1,0@0;1,0@1", 1);
  ASSERT_TRUE(t.polynomial_form().has_value());
  EXPECT_NEAR(std::abs(t(k) - (1.0 + std::polar(1.0, 0.3))), 0.0, 1e-15);
  auto h = TorusFunction::parse("half:1", 1);
  EXPECT_EQ(h(std::vector<double>{0.5}), Complex(1.0));
  EXPECT_EQ(h(std::vector<double>{-0.5}), Complex(0.0));
  EXPECT_FALSE(h.polynomial_form().has_value());
}

TEST(TorusFunctionParse, Errors) {
  EXPECT_THROW(TorusFunction::parse("bogus", 1), std::invalid_argument);
  EXPECT_THROW(TorusFunction::parse("exp:1,2", 1), std::invalid_argument);
  EXPECT_THROW(TorusFunction::parse("trig:1@", 1), std::invalid_argument);
  EXPECT_THROW(TorusFunction::parse("half:3", 2), std::invalid_argument);
  EXPECT_THROW(TorusFunction::parse("table:/nonexistent/file", 1), std::invalid_argument);
}

TEST(ModSquare, Constant) {
  auto c = fourier_modsq_coeffs(TorusFunction::constant(1, 1.0), 64, 16);
  EXPECT_NEAR(std::abs(c(std::vector<int>{0}) - 1.0), 0.0, 1e-15);
  for (int r = 1; r <= 16; ++r) EXPECT_NEAR(std::abs(c(std::vector<int>{r})), 0.0, 1e-15);
}

TEST(ModSquare, UnimodularMatchesConstant) {
  auto c = fourier_modsq_coeffs(TorusFunction::parse("exp:1", 1), 64, 16);
  EXPECT_NEAR(std::abs(c(std::vector<int>{0}) - 1.0), 0.0, 1e-14);
  for (int r = 1; r <= 16; ++r) EXPECT_NEAR(std::abs(c(std::vector<int>{r})), 0.0, 1e-14);
}

TEST(ModSquare, OnePlusExp) {
  auto c = fourier_modsq_coeffs(TorusFunction::parse("trig:1,0@0;1,0@1", 1), 64, 16);
  EXPECT_NEAR(std::abs(c(std::vector<int>{0}) - 2.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(c(std::vector<int>{1}) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(c(std::vector<int>{-1}) - 1.0), 0.0, 1e-14);
  for (int r = 2; r <= 16; ++r) EXPECT_NEAR(std::abs(c(std::vector<int>{r})), 0.0, 1e-14);
}

TEST(ModSquare, ConjugateSymmetryInTwoDims) {
  auto c = fourier_modsq_coeffs(TorusFunction::parse("trig:1,0@0,0;0.5,0.5@1,2;0.2,0@-1,1", 2), 32, 8);
  EXPECT_GE(c(std::vector<int>{0, 0}).real(), 0.0);
  EXPECT_NEAR(c(std::vector<int>{0, 0}).imag(), 0.0, 1e-15);
  for (int a = -8; a <= 8; ++a)
    for (int b = -8; b <= 8; ++b)
      EXPECT_NEAR(std::abs(c(std::vector<int>{-a, -b}) - std::conj(c(std::vector<int>{a, b}))), 0.0,
                  1e-14);
}

TEST(ModSquare, AliasingMarginEnforced) {
  EXPECT_THROW(fourier_modsq_coeffs(TorusFunction::constant(1, 1.0), 32, 9), std::invalid_argument);
}

TEST(PdoSingularValues, MultiplicationOperator) {
  auto one = TorusFunction::constant(1, 1.0);
  auto r = pdo_singular_values({one, one, inverse_distance(), 1.0, 20, 0});
  ASSERT_EQ(r.svalues.size(), 40u);
  EXPECT_EQ(r.support, 40u);
  for (std::size_t m = 0; m < 40; ++m) {
    EXPECT_NEAR(r.svalues[m], 1.0 / static_cast<double>(m / 2 + 1), 1e-12);
  }
}

TEST(PdoSingularValues, SinglePointSupport) {
  auto f = TorusFunction::parse("trig:1,0@0;0.5,0@1", 1);
  auto g = TorusFunction::parse("trig:2,0@0;0,1@-1", 1);
  std::map<Cell, Complex> w{{Cell{3}, Complex(0.7, -0.2)}};
  auto r = pdo_singular_values({f, g, LatticeSymbol::table(1, w), 1.0, 4, 0});
  // c^f_0 = 1.25, c^g_0 = 5
  EXPECT_NEAR(r.svalues[0], std::abs(Complex(0.7, -0.2)) * std::sqrt(1.25 * 5.0), 1e-12);
  for (std::size_t m = 1; m < r.svalues.size(); ++m) EXPECT_EQ(r.svalues[m], 0.0);
}

TEST(PdoSingularValues, AdjointSwap) {
  // adjoint of f Phi W Phi^* g is conj(g) Phi conj(W) Phi^* conj(f)
  auto f = TorusFunction::parse("trig:1,0@0;0.3,0.4@2", 1);
  auto fbar = TorusFunction::parse("trig:1,0@0;0.3,-0.4@-2", 1);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::map<Cell, Complex> w, wbar;
  for (int n = -5; n <= 5; ++n) {
    Complex z(u(rng), u(rng));
    w[Cell{n}] = z;
    wbar[Cell{n}] = std::conj(z);
  }
  auto a = pdo_singular_values({f, fbar, LatticeSymbol::table(1, w), 1.0, 5, 0});
  auto b = pdo_singular_values({f, fbar, LatticeSymbol::table(1, wbar), 1.0, 5, 0});
  ASSERT_EQ(a.svalues.size(), b.svalues.size());
  for (std::size_t m = 0; m < a.svalues.size(); ++m) EXPECT_NEAR(a.svalues[m], b.svalues[m], 1e-12);
}

TEST(PdoSingularValues, GramMatchesDirectAssembly) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto f = TorusFunction::parse("trig:1,0@0;0.5,0.25@1;0,0.3@-2", 1);
  auto g = TorusFunction::half_indicator(1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    std::map<Cell, Complex> w;
    std::vector<Cell> cells;
    std::vector<Complex> vals;
    for (int n = -6; n <= 6; ++n) {
      if (u(rng) < -0.3) continue;
      Complex z(u(rng), u(rng));
      w[Cell{n}] = z;
      cells.push_back(Cell{n});
      vals.push_back(z);
    }
    auto r = pdo_singular_values({f, g, LatticeSymbol::table(1, w), 1.0, 6, 64});
    auto direct = oracle::direct_pdo_svalues(
        1, [&](std::span<const double> k) { return f(k); },
        [&](std::span<const double> k) { return g(k); }, cells, vals, 64);
    EXPECT_LT(max_rel_diff(direct, r.svalues.values()), 1e-8);
  }
}

TEST(MultiplierSingularValues, MatchesDirect) {
  auto f = TorusFunction::parse("trig:1,0@0,0;0.4,0@1,0;0,0.2@0,1", 2);
  std::vector<Cell> cells;
  std::vector<Complex> vals;
  std::map<Cell, Complex> w;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) {
      Complex z(std::sin(a + 2.0 * b + 0.5), std::cos(3.0 * a - b));
      cells.push_back({a, b});
      vals.push_back(z);
      w[Cell{a, b}] = z;
    }
  auto s = multiplier_singular_values(f, LatticeSymbol::table(2, w), 2, 16);
  auto d = oracle::direct_multiplier_svalues(
      2, [&](std::span<const double> k) { return f(k); }, cells, vals, 16);
  EXPECT_LT(max_rel_diff(d, s.values()), 1e-10);
}

TEST(CwikelRatio, RegimeChecks) {
  auto one = TorusFunction::constant(1, 1.0);
  auto w = inverse_distance();
  EXPECT_NO_THROW(cwikel_ratio(one, w, 1.0, 2.0, 8));
  EXPECT_THROW(cwikel_ratio(one, w, 1.0, 3.0, 8), std::invalid_argument);
  EXPECT_THROW(cwikel_ratio(one, w, 3.0, 2.0, 8), std::invalid_argument);
  EXPECT_THROW(cwikel_ratio(one, w, 2.0, 2.0, 8), std::invalid_argument);
  EXPECT_NO_THROW(cwikel_ratio(one, w, 2.0, 4.0, 8));
}

TEST(CwikelRatio, ScaleInvariantAndFiniteRank) {
  auto f = TorusFunction::parse("trig:1,0@0;0.5,0@1", 1);
  std::map<Cell, Complex> w{{Cell{1}, 1.0}, {Cell{-2}, 0.5}, {Cell{4}, 0.25}};
  std::map<Cell, Complex> w3;
  for (auto [n, z] : w) w3[n] = 3.0 * z;
  double a = cwikel_ratio(f, LatticeSymbol::table(1, w), 1.0, 2.0, 8);
  double b = cwikel_ratio(f, LatticeSymbol::table(1, w3), 1.0, 2.0, 8);
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_NEAR(a, b, 1e-12 * a);
}

TEST(CwikelRatio, ConstantSymbolValue) {
  auto one = TorusFunction::constant(1, 1.0);
  EXPECT_NEAR(cwikel_ratio(one, inverse_distance(), 1.0, 2.0, 32), 1.0 / std::sqrt(2.0 * pi), 1e-10);
}

TEST(DpFormula, ExampleValues) {
  auto one = TorusFunction::constant(1, 1.0);
  auto v = AngularProfile::constant(1.0);
  EXPECT_NEAR(dp_formula(one, v, one, 1.0, 64), 2.0, 1e-12);
  EXPECT_EQ(dp_formula(one, AngularProfile::constant(0.0), one, 1.0, 64), 0.0);
  EXPECT_NEAR(dp_formula(TorusFunction::half_indicator(1, 1), v, one, 1.0, 64), 1.0, 1e-12);
}

TEST(DpVsFormula, MultiplicationCaseApproachesTwo) {
  auto one = TorusFunction::constant(1, 1.0);
  auto v = AngularProfile::constant(1.0);
  double prev_gap = INFINITY;
  for (int radius : {32, 64, 128}) {
    auto c = dp_vs_formula(one, v, one, 1.0, radius);
    EXPECT_NEAR(c.formula, 2.0, 1e-12);
    double gap = 2.0 - c.empirical.inf_est;
    EXPECT_LE(gap, prev_gap);
    EXPECT_NEAR(c.empirical.sup_est, 2.0, 0.2);
    prev_gap = gap;
  }
}

TEST(CommutatorDecay, ConstantIsZero) {
  auto r = commutator_decay(TorusFunction::constant(1, 2.0), inverse_distance(), 1.0, 16);
  for (double s : r.svalues.values()) EXPECT_EQ(s, 0.0);
}

TEST(CommutatorDecay, RejectsNonPolynomial) {
  EXPECT_THROW(commutator_decay(TorusFunction::half_indicator(1, 1), inverse_distance(), 1.0, 8),
               std::invalid_argument);
}

TEST(CommutatorDecay, FiniteSupportGivesFiniteRank) {
  std::map<Cell, Complex> w{{Cell{0}, 1.0}, {Cell{1}, 2.0}};
  auto r = commutator_decay(TorusFunction::parse("exp:1", 1), LatticeSymbol::table(1, w), 1.0, 20);
  std::size_t rank = 0;
  for (double s : r.svalues.values()) rank += s > 1e-12;
  EXPECT_LE(rank, 4u);
  EXPECT_GT(rank, 0u);
}

TEST(CommutatorDecay, ShiftTailDecays) {
  auto r = commutator_decay(TorusFunction::parse("exp:1", 1), inverse_distance(), 1.0, 128);
  EXPECT_GT(r.scaled[9], 2.0 * r.scaled[99]);
}

TEST(SvalueCsv, Schema) {
  std::ostringstream out;
  write_svalue_csv(out, WeightedSequence({1.0, 0.5}), 1.0);
  EXPECT_EQ(out.str(), "m,s_m,m^{1/p}s_m\n1,1,1\n2,0.5,1\n");
  std::ostringstream sum;
  write_dp_summary_csv(sum, {{512, 4096, 2.0, 1.9, 2.0}});
  EXPECT_EQ(sum.str(), "L,M,dp_sup,dp_inf,formula\n512,4096,2,1.8999999999999999,2\n");
}
