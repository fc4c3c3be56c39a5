#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gapcount/periodic_graph.hpp"

using namespace gapcount;

namespace {

GraphSpecDocument dimer_spec() {
  GraphSpecDocument s;
  s.dim = 1;
  s.vertices = {{1, {0.0}, 0.0}, {2, {0.5}, 2.0}};
  s.edges = {{1, 2, {0}}, {2, 1, {1}}};
  return s;
}

Eigen::MatrixXd dense(const FiniteHamiltonian& h) { return Eigen::MatrixXd(h.matrix); }

}  // namespace

TEST(BuildGraph, ChainDegree) {
  auto g = build_graph(lattice_spec(1));
  EXPECT_EQ(g.nu(), 1);
  ASSERT_EQ(g.degrees().size(), 1u);
  EXPECT_EQ(g.degrees()[0], 2);
}

TEST(BuildGraph, DimerDegrees) {
  auto g = build_graph(dimer_spec());
  EXPECT_EQ(g.degrees(), (std::vector<int>{2, 2}));
  EXPECT_EQ(g.q(), (std::vector<double>{0.0, 2.0}));
}

TEST(BuildGraph, LatticeDegreesInHigherDim) {
  EXPECT_EQ(build_graph(lattice_spec(2)).degrees()[0], 4);
  EXPECT_EQ(build_graph(lattice_spec(3)).degrees()[0], 6);
}

TEST(BuildGraph, UnknownVertexRejected) {
  auto s = dimer_spec();
  s.edges.push_back({1, 3, {0}});
  try {
    build_graph(s);
    FAIL() << "expected rejection";
  } catch (const GraphSpecError& e) {
    EXPECT_EQ(e.where(), "/edges/2/to");
  }
}

TEST(BuildGraph, OffsetOutsideCellRejected) {
  auto s = dimer_spec();
  s.vertices[1].offset = {1.0};
  EXPECT_THROW(build_graph(s), GraphSpecError);
}

TEST(BuildGraph, DuplicateIdRejected) {
  auto s = dimer_spec();
  s.vertices[1].id = 1;
  EXPECT_THROW(build_graph(s), GraphSpecError);
}

TEST(BuildGraph, DisconnectedRejected) {
  GraphSpecDocument s;
  s.dim = 1;
  s.vertices = {{1, {0.0}, 0.0}, {2, {0.5}, 0.0}};
  s.edges = {{1, 1, {1}}, {2, 2, {1}}};
  EXPECT_THROW(build_graph(s), GraphSpecError);
}

TEST(BuildGraph, IsolatedOrbitRejectedInTwoDims) {
  // only horizontal edges: components are disjoint rows
  GraphSpecDocument s;
  s.dim = 2;
  s.vertices = {{1, {0.0, 0.0}, 0.0}};
  s.edges = {{1, 1, {1, 0}}};
  EXPECT_THROW(build_graph(s), GraphSpecError);
}

TEST(BuildGraph, ZeroLoopDropped) {
  auto s = lattice_spec(1);
  s.edges.push_back({1, 1, {0}});
  auto g = build_graph(s);
  EXPECT_EQ(g.degrees()[0], 2);
  EXPECT_EQ(g.edges().size(), 1u);
}

TEST(BuildGraph, ReversedEdgesGiveSameGraph) {
  auto s = dimer_spec();
  auto r = s;
  for (auto& e : r.edges) {
    std::swap(e.from, e.to);
    for (int& x : e.cell) x = -x;
  }
  EXPECT_EQ(build_graph(s), build_graph(r));

  auto l = lattice_spec(3);
  auto lr = l;
  for (auto& e : lr.edges)
    for (int& x : e.cell) x = -x;
  EXPECT_EQ(build_graph(l), build_graph(lr));
}

TEST(BuildGraph, MultiEdgesCount) {
  auto s = lattice_spec(1);
  s.edges.push_back({1, 1, {-1}});
  auto g = build_graph(s);
  EXPECT_EQ(g.degrees()[0], 4);
  auto h = assemble_truncated(g, 2);
  EXPECT_DOUBLE_EQ(h.matrix.coeff(1, 2), -2.0);
}

TEST(GraphSpecJson, RoundTrip) {
  auto s = dimer_spec();
  auto back = graph_spec_from_json(graph_spec_to_json(s));
  EXPECT_EQ(build_graph(s), build_graph(back));
}

TEST(GraphSpecJson, SyntaxErrorIsLineAnchored) {
  try {
    parse_graph_spec("{\n  \"dim\": 1,\n  \"vertices\": [\n}");
    FAIL() << "expected rejection";
  } catch (const GraphSpecError& e) {
    EXPECT_NE(e.where().find("line 4"), std::string::npos) << e.where();
  }
}

TEST(GraphSpecJson, SchemaErrorNamesPointer) {
  try {
    parse_graph_spec(R"({"dim": 1, "vertices": [{"id": 1, "offset": [0.0], "Q": "x"}], "edges": []})");
    FAIL() << "expected rejection";
  } catch (const GraphSpecError& e) {
    EXPECT_EQ(e.where(), "/vertices/0/Q");
  }
}

TEST(AssembleTruncated, ChainRadiusOne) {
  auto h = assemble_truncated(build_graph(lattice_spec(1)), 1);
  Eigen::MatrixXd expect(3, 3);
  expect << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  EXPECT_EQ(dense(h), expect);
}

TEST(AssembleTruncated, ChainRadiusZero) {
  auto h = assemble_truncated(build_graph(lattice_spec(1)), 0);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_DOUBLE_EQ(h.matrix.coeff(0, 0), 2.0);
}

TEST(AssembleTruncated, DimerRowSums) {
  auto g = build_graph(dimer_spec());
  auto h = assemble_truncated(g, 1);
  ASSERT_EQ(h.size(), 6u);
  Eigen::MatrixXd m = dense(h);
  EXPECT_EQ(m, m.transpose());
  Eigen::VectorXd sums = m.rowwise().sum();
  // vertex 1 of cell -1 loses its link to vertex 2 of cell -2
  EXPECT_DOUBLE_EQ(sums[0], 1.0);
  // vertex 2 of cell 1 loses its link to vertex 1 of cell 2
  EXPECT_DOUBLE_EQ(sums[5], 2.0 + 1.0);
  for (int i = 1; i < 5; ++i) EXPECT_DOUBLE_EQ(sums[i], g.q()[i % 2]);
  for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(m(i, i), 2.0 + g.q()[i % 2]);
}

TEST(AssembleTruncated, ExactSymmetryAndHarmonicConstants) {
  for (int d = 1; d <= 3; ++d) {
    auto g = build_graph(lattice_spec(d));
    auto h = assemble_truncated(g, 3);
    Eigen::MatrixXd m = dense(h);
    EXPECT_EQ(m, m.transpose());
    Eigen::VectorXd hu = m * Eigen::VectorXd::Ones(m.rows());
    for (std::size_t row = 0; row < h.size(); ++row) {
      Cell c = h.index.cell_of(row);
      bool interior = true;
      for (int x : c) interior = interior && std::abs(x) < 3;
      EXPECT_GE(hu[row], 0.0);
      if (interior) EXPECT_EQ(hu[row], 0.0);
    }
  }
}

TEST(BoxIndex, RowRoundTrip) {
  BoxIndex idx(2, 3, 2);
  EXPECT_EQ(idx.size(), 75u);
  for (std::size_t row = 0; row < idx.size(); ++row) {
    EXPECT_EQ(idx.row(idx.vertex_of(row), idx.cell_of(row)), row);
  }
  EXPECT_FALSE(idx.contains(Cell{3, 0}));
  EXPECT_EQ(idx.cell_of(0), (Cell{-2, -2}));
}

TEST(SamplePotential, ChainInverseDistance) {
  auto g = build_graph(lattice_spec(1));
  auto v = sample_potential(g, AngularProfile::constant(1.0), 1.0, 5);
  for (std::size_t row = 0; row < v.index.size(); ++row) {
    int n = v.index.cell_of(row)[0];
    EXPECT_DOUBLE_EQ(v.values[row], n == 0 ? 1.0 : 1.0 / std::abs(n));
  }
}

TEST(SamplePotential, TailIsSmall) {
  auto g = build_graph(lattice_spec(2));
  for (double p : {0.5, 1.0, 4.0}) {
    auto v = sample_potential(g, AngularProfile::constant(1.0), p, 20);
    double tail = 0.0;
    for (std::size_t row = 0; row < v.index.size(); ++row) {
      Cell c = v.index.cell_of(row);
      if (std::max(std::abs(c[0]), std::abs(c[1])) == 20) tail = std::max(tail, v.values[row]);
    }
    EXPECT_LT(tail, std::pow(20.0, -2.0 / p) * 1.0000001);
  }
}

TEST(SamplePotential, NegativeProfileRejected) {
  auto g = build_graph(lattice_spec(1));
  EXPECT_THROW(sample_potential(g, AngularProfile::constant(-1.0), 1.0, 3), std::invalid_argument);
}

TEST(SamplePotential, DoublingProfileDoublesValues) {
  auto g = build_graph(lattice_spec(2));
  auto a = sample_potential(g, AngularProfile::cos2(), 1.5, 4);
  auto b = sample_potential(g, AngularProfile::cos2().scaled(2.0), 1.5, 4);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_DOUBLE_EQ(b.values[i], 2.0 * a.values[i]);
}

TEST(SamplePotential, UsesEmbeddedPositions) {
  auto g = build_graph(dimer_spec());
  auto v = sample_potential(g, AngularProfile::constant(1.0), 1.0, 3);
  // vertex 2 in cell 2 sits at 2.5
  std::size_t row = v.index.row(1, Cell{2});
  EXPECT_DOUBLE_EQ(v.values[row], 1.0 / 2.5);
}
