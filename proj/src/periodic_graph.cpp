#include "gapcount/periodic_graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <string_view>
#include <set>
#include <sstream>

namespace gapcount {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw GraphSpecError(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw GraphSpecError(where, std::string("missing field '") + key + "'");
  return *it;
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw GraphSpecError(where, "expected an integer");
  return v.get<int>();
}

double as_real(const json& v, const std::string& where) {
  if (!v.is_number()) throw GraphSpecError(where, "expected a number");
  return v.get<double>();
}

bool lex_positive(const Cell& n) {
  for (int x : n) {
    if (x != 0) return x > 0;
  }
  return false;
}

Cell negated(Cell n) {
  for (int& x : n) x = -x;
  return n;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

GraphSpecDocument graph_spec_from_json(const json& doc) {
  GraphSpecDocument spec;
  spec.dim = as_int(require(doc, "dim", ""), "/dim");
  if (spec.dim < 1) throw GraphSpecError("/dim", "dimension must be >= 1");

  const json& verts = require(doc, "vertices", "");
  if (!verts.is_array() || verts.empty()) {
    throw GraphSpecError("/vertices", "expected a nonempty array");
  }
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const std::string at = "/vertices/" + std::to_string(i);
    VertexSpec v;
    v.id = as_int(require(verts[i], "id", at), at + "/id");
    const json& off = require(verts[i], "offset", at);
    if (!off.is_array() || static_cast<int>(off.size()) != spec.dim) {
      throw GraphSpecError(at + "/offset", "expected " + std::to_string(spec.dim) + " coordinates");
    }
    for (std::size_t c = 0; c < off.size(); ++c) {
      v.offset.push_back(as_real(off[c], at + "/offset/" + std::to_string(c)));
    }
    if (auto it = verts[i].find("Q"); it != verts[i].end()) v.q = as_real(*it, at + "/Q");
    spec.vertices.push_back(std::move(v));
  }

  const json& edges = require(doc, "edges", "");
  if (!edges.is_array()) throw GraphSpecError("/edges", "expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string at = "/edges/" + std::to_string(i);
    EdgeSpec e;
    e.from = as_int(require(edges[i], "from", at), at + "/from");
    e.to = as_int(require(edges[i], "to", at), at + "/to");
    const json& cell = require(edges[i], "cell", at);
    if (!cell.is_array() || static_cast<int>(cell.size()) != spec.dim) {
      throw GraphSpecError(at + "/cell", "expected " + std::to_string(spec.dim) + " integers");
    }
    for (std::size_t c = 0; c < cell.size(); ++c) {
      e.cell.push_back(as_int(cell[c], at + "/cell/" + std::to_string(c)));
    }
    spec.edges.push_back(std::move(e));
  }
  return spec;
}

namespace {

// Byte offset of the value addressed by a JSON pointer in already-valid JSON text.
class PointerLocator {
 public:
  PointerLocator(const std::string& text, const std::string& pointer) : text_(text) {
    std::size_t pos = 1;
    while (pos <= pointer.size() && pointer.size() > 0) {
      auto next = pointer.find('/', pos);
      if (next == std::string::npos) next = pointer.size();
      target_.push_back(pointer.substr(pos, next - pos));
      pos = next + 1;
    }
  }

  std::optional<std::size_t> find() {
    value(0);
    return found_;
  }

 private:
  void skip_ws() {
    while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
  }

  std::string string_token() {
    std::string out;
    ++i_;
    while (i_ < text_.size() && text_[i_] != '"') {
      if (text_[i_] == '\\') ++i_;
      out += text_[i_++];
    }
    ++i_;
    return out;
  }

  void value(std::size_t depth) {
    skip_ws();
    if (found_) return;
    if (depth == target_.size() && matched_ == depth) {
      found_ = i_;
      return;
    }
    const char c = text_[i_];
    if (c == '{' || c == '[') {
      ++i_;
      const bool object = c == '{';
      for (std::size_t index = 0;; ++index) {
        skip_ws();
        if (text_[i_] == (object ? '}' : ']')) break;
        std::string key = std::to_string(index);
        if (object) {
          key = string_token();
          skip_ws();
          ++i_;  // ':'
        }
        const bool on_path = matched_ == depth && depth < target_.size() && target_[depth] == key;
        if (on_path) ++matched_;
        value(depth + 1);
        if (found_) return;
        if (on_path) --matched_;
        skip_ws();
        if (text_[i_] == ',') ++i_;
      }
      ++i_;
    } else if (c == '"') {
      string_token();
    } else {
      while (i_ < text_.size() && std::string_view(",]} \t\r\n").find(text_[i_]) == std::string_view::npos) ++i_;
    }
  }

  const std::string& text_;
  std::vector<std::string> target_;
  std::size_t i_ = 0;
  std::size_t matched_ = 0;
  std::optional<std::size_t> found_;
};

std::string line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

GraphSpecDocument parse_graph_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based
    throw GraphSpecError(line_column(text, e.byte > 0 ? e.byte - 1 : 0), "JSON syntax error");
  }
  return graph_spec_from_json(doc);
}

GraphSpecDocument load_graph_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphSpecError(path, "cannot open graph spec");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return parse_graph_spec(text);
  } catch (const GraphSpecError& e) {
    std::string where = e.where();
    if (where.starts_with("/") || where.empty()) {
      auto at = PointerLocator(text, where).find();
      if (at) where = line_column(text, *at) + " (" + (where.empty() ? "/" : where) + ")";
    }
    throw GraphSpecError(path + ": " + where, std::string(e.what()).substr(e.where().size() + 2));
  }
}

json graph_spec_to_json(const GraphSpecDocument& spec) {
  json doc;
  doc["dim"] = spec.dim;
  doc["vertices"] = json::array();
  for (const auto& v : spec.vertices) {
    doc["vertices"].push_back({{"id", v.id}, {"offset", v.offset}, {"Q", v.q}});
  }
  doc["edges"] = json::array();
  for (const auto& e : spec.edges) {
    doc["edges"].push_back({{"from", e.from}, {"to", e.to}, {"cell", e.cell}});
  }
  return doc;
}

GraphSpecDocument lattice_spec(int dim) {
  GraphSpecDocument spec;
  spec.dim = dim;
  spec.vertices.push_back({1, std::vector<double>(dim, 0.0), 0.0});
  for (int a = 0; a < dim; ++a) {
    Cell n(dim, 0);
    n[a] = 1;
    spec.edges.push_back({1, 1, n});
  }
  return spec;
}

PeriodicGraph PeriodicGraph::with_potential(std::vector<double> q) const {
  if (static_cast<int>(q.size()) != nu()) {
    throw std::invalid_argument("with_potential: expected one value per orbit vertex");
  }
  PeriodicGraph g = *this;
  g.q_ = std::move(q);
  return g;
}

PeriodicGraph build_graph(const GraphSpecDocument& spec) {
  if (spec.dim < 1) throw GraphSpecError("/dim", "dimension must be >= 1");
  const int nu = static_cast<int>(spec.vertices.size());
  if (nu == 0) throw GraphSpecError("/vertices", "graph has no vertices");

  PeriodicGraph g;
  g.dim_ = spec.dim;
  g.offsets_.assign(nu, {});
  g.q_.assign(nu, 0.0);
  std::vector<bool> seen(nu, false);
  for (std::size_t i = 0; i < spec.vertices.size(); ++i) {
    const auto& v = spec.vertices[i];
    const std::string at = "/vertices/" + std::to_string(i);
    if (v.id < 1 || v.id > nu) {
      throw GraphSpecError(at + "/id", "ids must be 1.." + std::to_string(nu));
    }
    if (seen[v.id - 1]) throw GraphSpecError(at + "/id", "duplicate id " + std::to_string(v.id));
    seen[v.id - 1] = true;
    if (static_cast<int>(v.offset.size()) != spec.dim) {
      throw GraphSpecError(at + "/offset", "wrong number of coordinates");
    }
    for (double x : v.offset) {
      if (!(x >= 0.0 && x < 1.0)) throw GraphSpecError(at + "/offset", "offset outside [0,1)^d");
    }
    g.offsets_[v.id - 1] = v.offset;
    g.q_[v.id - 1] = v.q;
  }

  for (std::size_t i = 0; i < spec.edges.size(); ++i) {
    const auto& e = spec.edges[i];
    const std::string at = "/edges/" + std::to_string(i);
    if (e.from < 1 || e.from > nu) {
      throw GraphSpecError(at + "/from", "unknown vertex id " + std::to_string(e.from));
    }
    if (e.to < 1 || e.to > nu) {
      throw GraphSpecError(at + "/to", "unknown vertex id " + std::to_string(e.to));
    }
    if (static_cast<int>(e.cell.size()) != spec.dim) {
      throw GraphSpecError(at + "/cell", "wrong number of coordinates");
    }
    Edge c{e.from - 1, e.to - 1, e.cell};
    if (c.from == c.to && std::ranges::all_of(c.cell, [](int x) { return x == 0; })) {
      continue;  // loop with n = 0
    }
    if (c.from > c.to || (c.from == c.to && !lex_positive(c.cell))) {
      std::swap(c.from, c.to);
      c.cell = negated(c.cell);
    }
    g.edges_.push_back(std::move(c));
  }
  std::sort(g.edges_.begin(), g.edges_.end());

  g.degrees_.assign(nu, 0);
  for (const auto& e : g.edges_) {
    ++g.degrees_[e.from];
    ++g.degrees_[e.to];
  }

  // connectivity on the 3^d patch of cells {-1,0,1}^d
  const BoxIndex patch(spec.dim, nu, 1);
  DisjointSets sets(patch.size());
  for (std::size_t r = 0; r < patch.size(); r += nu) {
    const Cell base = patch.cell_of(r);
    for (const auto& e : g.edges_) {
      Cell other = base;
      for (int a = 0; a < spec.dim; ++a) other[a] += e.cell[a];
      if (!patch.contains(other)) continue;
      sets.unite(patch.row(e.from, base), patch.row(e.to, other));
    }
  }
  for (std::size_t r = 1; r < patch.size(); ++r) {
    if (sets.find(r) != sets.find(0)) {
      const Cell c = patch.cell_of(r);
      std::ostringstream os;
      os << "graph is disconnected on the 3^d-cell patch (vertex " << patch.vertex_of(r) + 1
         << " in cell [";
      for (std::size_t a = 0; a < c.size(); ++a) os << (a ? "," : "") << c[a];
      os << "] is unreachable from vertex 1 in cell 0)";
      throw GraphSpecError("/edges", os.str());
    }
  }
  return g;
}

BoxIndex::BoxIndex(int dim, int nu, int radius) : dim_(dim), nu_(nu), radius_(radius), cells_(1) {
  if (radius < 0) throw std::invalid_argument("truncation radius must be >= 0");
  for (int a = 0; a < dim; ++a) cells_ *= static_cast<std::size_t>(2 * radius + 1);
}

bool BoxIndex::contains(std::span<const int> cell) const {
  for (int x : cell) {
    if (x < -radius_ || x > radius_) return false;
  }
  return true;
}

std::size_t BoxIndex::row(int vertex, std::span<const int> cell) const {
  const std::size_t side = 2 * radius_ + 1;
  std::size_t lin = 0;
  for (int x : cell) lin = lin * side + static_cast<std::size_t>(x + radius_);
  return lin * nu_ + vertex;
}

Cell BoxIndex::cell_of(std::size_t row) const {
  const std::size_t side = 2 * radius_ + 1;
  std::size_t lin = row / nu_;
  Cell c(dim_);
  for (int a = dim_ - 1; a >= 0; --a) {
    c[a] = static_cast<int>(lin % side) - radius_;
    lin /= side;
  }
  return c;
}

std::vector<double> vertex_position(const PeriodicGraph& graph, const BoxIndex& index,
                                    std::size_t row) {
  const Cell n = index.cell_of(row);
  std::vector<double> x = graph.offsets()[index.vertex_of(row)];
  for (std::size_t a = 0; a < x.size(); ++a) x[a] += n[a];
  return x;
}

FiniteHamiltonian assemble_truncated(const PeriodicGraph& graph, int radius) {
  FiniteHamiltonian h{BoxIndex(graph.dim(), graph.nu(), radius), {}};
  const BoxIndex& idx = h.index;
  const std::size_t n = idx.size();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(n * (1 + 2 * graph.edges().size() / std::max(1, graph.nu())));
  for (std::size_t r = 0; r < n; ++r) {
    const int j = idx.vertex_of(r);
    entries.emplace_back(r, r, graph.degrees()[j] + graph.q()[j]);
  }
  for (std::size_t r = 0; r < n; r += graph.nu()) {
    const Cell base = idx.cell_of(r);
    for (const auto& e : graph.edges()) {
      Cell other = base;
      for (int a = 0; a < graph.dim(); ++a) other[a] += e.cell[a];
      if (!idx.contains(other)) continue;
      const std::size_t a = idx.row(e.from, base);
      const std::size_t b = idx.row(e.to, other);
      entries.emplace_back(a, b, -1.0);
      entries.emplace_back(b, a, -1.0);
    }
  }
  h.matrix.resize(n, n);
  h.matrix.setFromTriplets(entries.begin(), entries.end());
  return h;
}

namespace {

double euclidean_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

DecayingPotential sample_potential(const PeriodicGraph& graph, const AngularProfile& theta,
                                   double p, int radius) {
  if (!(p > 0.0)) throw std::invalid_argument("sample_potential: exponent p must be > 0");
  if (theta.sup() < 0.0) {
    throw std::invalid_argument("sample_potential: angular profile is negative (V must be >= 0)");
  }
  DecayingPotential v{p, theta.name(), BoxIndex(graph.dim(), graph.nu(), radius), {}};
  const double power = -static_cast<double>(graph.dim()) / p;
  v.values.resize(v.index.size());
  for (std::size_t r = 0; r < v.values.size(); ++r) {
    std::vector<double> x = vertex_position(graph, v.index, r);
    const double norm = euclidean_norm(x);
    if (norm < 1.0) {
      v.values[r] = theta.sup();
      continue;
    }
    for (double& c : x) c /= norm;
    const double t = theta(x);
    if (t < 0.0) {
      throw std::invalid_argument("sample_potential: angular profile takes a negative value");
    }
    v.values[r] = std::pow(norm, power) * t;
  }
  return v;
}

DecayingPotential sample_potential(const PeriodicGraph& graph,
                                   const std::function<double(std::span<const double>)>& profile,
                                   std::string name, double p, int radius) {
  DecayingPotential v{p, std::move(name), BoxIndex(graph.dim(), graph.nu(), radius), {}};
  v.values.resize(v.index.size());
  for (std::size_t r = 0; r < v.values.size(); ++r) {
    const std::vector<double> x = vertex_position(graph, v.index, r);
    const double value = profile(x);
    if (!(value >= 0.0)) throw std::invalid_argument("sample_potential: V must be >= 0");
    v.values[r] = value;
  }
  return v;
}

}  // namespace gapcount
