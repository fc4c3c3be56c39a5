#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapcount/angular_profile.hpp"
#include "json.hpp"

namespace gapcount {

/// Raised for malformed graph documents. `where` is a JSON pointer
/// ("/edges/3/to") or "line L, column C" for syntax errors.
class GraphSpecError : public std::invalid_argument {
 public:
  GraphSpecError(std::string where, const std::string& what)
      : std::invalid_argument(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

using Cell = std::vector<int>;

struct VertexSpec {
  int id = 0;
  std::vector<double> offset;
  double q = 0.0;
};

struct EdgeSpec {
  int from = 0;
  int to = 0;
  Cell cell;
};

/// On-disk description of a Z^d-periodic graph: vertex orbit representatives in
/// the unit cell [0,1)^d and edges (from, to, n) joining x_from to x_to + n.
struct GraphSpecDocument {
  int dim = 0;
  std::vector<VertexSpec> vertices;
  std::vector<EdgeSpec> edges;
};

GraphSpecDocument graph_spec_from_json(const nlohmann::json& doc);
GraphSpecDocument parse_graph_spec(const std::string& text);
GraphSpecDocument load_graph_spec(const std::string& path);
nlohmann::json graph_spec_to_json(const GraphSpecDocument& spec);

/// Z^d with one vertex per cell and the d unit-step edges.
GraphSpecDocument lattice_spec(int dim);

/// Canonical undirected edge, 0-based vertex indices. Orientation is chosen so
/// that from < to, or from == to with the cell vector lexicographically positive.
struct Edge {
  int from = 0;
  int to = 0;
  Cell cell;

  auto operator<=>(const Edge&) const = default;
  bool self_orbit() const { return from == to; }
};

class PeriodicGraph {
 public:
  int dim() const { return dim_; }
  int nu() const { return static_cast<int>(offsets_.size()); }
  const std::vector<std::vector<double>>& offsets() const { return offsets_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& degrees() const { return degrees_; }
  const std::vector<double>& q() const { return q_; }

  /// Same graph with the periodic potential replaced.
  PeriodicGraph with_potential(std::vector<double> q) const;

  bool operator==(const PeriodicGraph&) const = default;

 private:
  friend PeriodicGraph build_graph(const GraphSpecDocument& spec);

  int dim_ = 0;
  std::vector<std::vector<double>> offsets_;
  std::vector<Edge> edges_;
  std::vector<int> degrees_;
  std::vector<double> q_;
};

/// Validates and canonicalizes. Loops (j, j, 0) are dropped: they contribute
/// nothing to the Laplacian. A self-orbit edge (j, j, n), n != 0, adds 2 to
/// degree(j). Connectivity is checked on the 3^d-cell patch around the origin.
PeriodicGraph build_graph(const GraphSpecDocument& spec);

/// Row numbering of the truncation box {(j, n) : |n|_inf <= L}. Cells are
/// enumerated lexicographically (first coordinate slowest), vertices fastest.
class BoxIndex {
 public:
  BoxIndex(int dim, int nu, int radius);

  int dim() const { return dim_; }
  int nu() const { return nu_; }
  int radius() const { return radius_; }
  std::size_t cells() const { return cells_; }
  std::size_t size() const { return cells_ * static_cast<std::size_t>(nu_); }

  bool contains(std::span<const int> cell) const;
  std::size_t row(int vertex, std::span<const int> cell) const;
  int vertex_of(std::size_t row) const { return static_cast<int>(row % nu_); }
  Cell cell_of(std::size_t row) const;

 private:
  int dim_;
  int nu_;
  int radius_;
  std::size_t cells_;
};

/// Embedded position x_j + n of the box vertex at `row`.
std::vector<double> vertex_position(const PeriodicGraph& graph, const BoxIndex& index,
                                    std::size_t row);

/// Compression of H = Delta + Q to the box |n|_inf <= L. Diagonal entries keep the
/// full-graph degree; couplings leaving the box are dropped.
struct FiniteHamiltonian {
  BoxIndex index;
  Eigen::SparseMatrix<double> matrix;

  int radius() const { return index.radius(); }
  std::size_t size() const { return index.size(); }
};

FiniteHamiltonian assemble_truncated(const PeriodicGraph& graph, int radius);

/// Nonnegative decaying potential sampled on the truncation box, one value per row.
struct DecayingPotential {
  double p = 0.0;
  std::string profile;
  BoxIndex index;
  std::vector<double> values;
};

/// V(x) = |x|^{-d/p} theta(x/|x|) for |x| >= 1 and sup theta inside the unit ball.
DecayingPotential sample_potential(const PeriodicGraph& graph, const AngularProfile& theta,
                                   double p, int radius);

/// V(x) = profile(x) at every box vertex, for potentials outside the homogeneous family.
/// `p` is recorded only as metadata.
DecayingPotential sample_potential(const PeriodicGraph& graph,
                                   const std::function<double(std::span<const double>)>& profile,
                                   std::string name, double p, int radius);

}  // namespace gapcount
